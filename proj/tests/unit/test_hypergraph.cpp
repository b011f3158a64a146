#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "igmirag/error.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/text.hpp"
#include "support.hpp"

using namespace igmirag;

namespace {

Hypergraph tiny() {
    Hypergraph g;
    Chunk c;
    c.id = "doc#0";
    c.source_title = "doc";
    c.text = "Francis Bacon painted Head I.";
    c.token_count = text::count_tokens(c.text);
    g.upsert_chunk(c);
    g.upsert_vertex(make_entity("Francis Bacon", "painter", {}, {"doc#0"}));
    g.upsert_vertex(make_entity("Head I", "painting", {}, {"doc#0"}));
    g.upsert_vertex(make_relation(Layer::pair_relation, {"Head I", "Francis Bacon"}, "painted", {}, {"doc#0"}));
    return g;
}

}  // namespace

TEST(CanonicalKey, FoldsCaseTrimsAndSorts) {
    const std::vector<std::string> a{"  Francis Bacon ", "HEAD I"};
    const std::vector<std::string> b{"head i", "francis bacon"};
    EXPECT_EQ(canonical_key(Layer::pair_relation, a), canonical_key(Layer::pair_relation, b));
    EXPECT_EQ(canonical_key(Layer::pair_relation, a), "2|francis bacon\xe2\x8a\x95head i");
    const std::vector<std::string> one{"Eric Hall"};
    EXPECT_EQ(canonical_key(Layer::entity, one), "1|eric hall");
}

TEST(CanonicalKey, PermutationInvariantProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> pool;
        for (int i = 0; i < 30; ++i) pool.push_back("Name " + std::to_string(i));
        auto names = testkit::sample_distinct(rng, pool, testkit::uniform(rng, 3, 6));
        const auto key = canonical_key(Layer::multi_association, names);
        std::shuffle(names.begin(), names.end(), rng);
        for (auto& s : names) {
            if (testkit::uniform01(rng) < 0.5) std::transform(s.begin(), s.end(), s.begin(), ::toupper);
        }
        EXPECT_EQ(canonical_key(Layer::multi_association, names), key);
    }
}

TEST(Hypergraph, UpsertMergesDescriptionsAndChunks) {
    auto g = tiny();
    Chunk c;
    c.id = "doc#1";
    c.source_title = "doc";
    c.text = "More.";
    g.upsert_chunk(c);
    g.upsert_vertex(make_entity("francis bacon", "Irish-born", {"artist"}, {"doc#1"}));
    const auto& v = g.vertex("1|francis bacon");
    EXPECT_EQ(v.name, "Francis Bacon");
    EXPECT_EQ(v.description, "painter\nIrish-born");
    EXPECT_EQ(v.chunk_ids.size(), 2u);
    EXPECT_EQ(g.chunk_degree("1|francis bacon"), 2u);
    g.upsert_vertex(make_entity("Francis Bacon", "painter", {}, {"doc#0"}));
    EXPECT_EQ(g.vertex("1|francis bacon").description, "painter\nIrish-born");
}

TEST(Hypergraph, RejectsMalformedRelations) {
    auto g = tiny();
    EXPECT_THROW(g.upsert_vertex(make_relation(Layer::pair_relation, {"Francis Bacon", "Nobody"}, "x", {}, {"doc#0"})),
                 Error);
    EXPECT_THROW(g.upsert_vertex(make_relation(Layer::pair_relation, {"Francis Bacon"}, "x", {}, {"doc#0"})), Error);
    EXPECT_THROW(g.upsert_vertex(make_relation(Layer::multi_association, {"Francis Bacon", "Francis Bacon"}, "x",
                                               {}, {"doc#0"})),
                 Error);
}

TEST(Hypergraph, LayerFilteredNeighbours) {
    const auto g = tiny();
    const std::string pair = "2|francis bacon\xe2\x8a\x95head i";
    EXPECT_EQ(g.layer_filtered_neighbors(pair, Direction::forward),
              (std::vector<std::string>{"1|francis bacon", "1|head i"}));
    EXPECT_EQ(g.layer_filtered_neighbors("1|head i", Direction::backward), std::vector<std::string>{pair});
    EXPECT_TRUE(g.layer_filtered_neighbors("1|head i", Direction::forward).empty());
    EXPECT_TRUE(g.layer_filtered_neighbors(pair, Direction::backward).empty());
}

TEST(Hypergraph, IncidenceDualityProperty) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = testkit::random_graph(rng, {.max_vertices = 60});
        for (const auto& [key, v] : g.vertices()) {
            for (const auto& m : g.layer_filtered_neighbors(key, Direction::forward)) {
                const auto& back = g.layer_filtered_neighbors(m, Direction::backward);
                EXPECT_TRUE(std::binary_search(back.begin(), back.end(), key));
            }
            for (const auto& c : g.layer_filtered_neighbors(key, Direction::backward)) {
                const auto& fwd = g.layer_filtered_neighbors(c, Direction::forward);
                EXPECT_TRUE(std::binary_search(fwd.begin(), fwd.end(), key));
            }
        }
        EXPECT_EQ(g.lr_edges().size() + g.hr_edges().size(), [&] {
            std::size_t n = 0;
            for (const auto& [k, v] : g.vertices()) n += v.members.size();
            return n;
        }());
        EXPECT_NO_THROW(g.validate());
    }
}

TEST(Hypergraph, SerializationRoundTripProperty) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = testkit::random_graph(rng, {.max_vertices = 50});
        const auto text = serialize(g);
        const auto back = deserialize_hypergraph(text);
        EXPECT_EQ(back, g);
        EXPECT_EQ(serialize(back), text);
    }
}

TEST(Hypergraph, SaveLoadAndCorruption) {
    testkit::TempDir dir("hhhg");
    const auto g = tiny();
    save(g, dir / "g.hhhg");
    EXPECT_EQ(load_hypergraph(dir / "g.hhhg"), g);
    testkit::write_file(dir / "bad.hhhg", "{not json");
    try {
        load_hypergraph(dir / "bad.hhhg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::corrupt_store);
    }
    try {
        load_hypergraph(dir / "missing.hhhg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
}

TEST(Hypergraph, ValidateRequiresProvenance) {
    Hypergraph g;
    g.upsert_vertex(make_entity("Orphan", "no chunk"));
    EXPECT_THROW(g.validate(true), Error);
    EXPECT_NO_THROW(g.validate(false));
    EXPECT_EQ(g.fr_edge_count(), 0u);
}
