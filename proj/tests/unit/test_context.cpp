#include <random>

#include <gtest/gtest.h>

#include "igmirag/context.hpp"
#include "igmirag/error.hpp"
#include "igmirag/text.hpp"
#include "support.hpp"

using namespace igmirag;

namespace {

Hypergraph bacon() {
    Hypergraph g;
    for (int i = 0; i < 2; ++i) {
        Chunk c;
        c.id = "Francis Bacon#" + std::to_string(i);
        c.source_title = "Francis Bacon";
        c.text = i == 0 ? "Francis Bacon was born in Dublin." : "His father was a horse trainer.";
        g.upsert_chunk(c);
    }
    g.upsert_vertex(make_entity("Francis Bacon", "Irish-born painter", {}, {"Francis Bacon#0", "Francis Bacon#1"}));
    g.upsert_vertex(make_entity("Dublin", "", {}, {"Francis Bacon#0"}));
    g.upsert_vertex(make_relation(Layer::pair_relation, {"Francis Bacon", "Dublin"}, "born in", {}, {"Francis Bacon#0"}));
    return g;
}

}  // namespace

TEST(Window, QuotasScaleWithDepth) {
    for (int d = 1; d <= 5; ++d) {
        EXPECT_EQ(window_quotas(d), (WindowBudget{static_cast<std::size_t>(5 * d), static_cast<std::size_t>(2 * d)}));
    }
    EXPECT_EQ(window_quotas(2, WindowParams{3, 1, 0.5}), (WindowBudget{6, 2}));
    EXPECT_THROW(window_quotas(0), Error);
    EXPECT_THROW(window_quotas(6), Error);
}

TEST(Window, SelectUnitsKeepsAnchorsAndTruncatesExpansion) {
    const ScoreMap anchors{{"a", 0.2}, {"b", 0.9}};
    const ScoreMap extended{{"a", 0.3}, {"b", 1.0}, {"c", 0.05}, {"d", 0.5}, {"e", 0.5}, {"f", 0.01}};
    EXPECT_EQ(select_units(anchors, extended, 2), (std::vector<std::string>{"b", "a", "d", "e"}));
    EXPECT_EQ(select_units(anchors, extended, 0), (std::vector<std::string>{"b", "a"}));
    EXPECT_EQ(select_units(anchors, extended, 10).size(), 6u);
}

TEST(Window, FuseChunkScores) {
    const auto g = bacon();
    const ChunkScores initial{{"Francis Bacon#0", 0.4}};
    // Extended: Francis Bacon 0.4 over two chunks, the pair 0.1 over one.
    const ScoreMap ext{{"1|francis bacon", 0.4}, {"2|dublin\xe2\x8a\x95" "francis bacon", 0.1}};
    const auto f = fuse_chunk_scores(initial, ext, g, 0.5);
    EXPECT_NEAR(f.at("Francis Bacon#0"), 0.5 * 0.4 + 0.5 * 0.3, 1e-15);
    EXPECT_NEAR(f.at("Francis Bacon#1"), 0.5 * 0.2, 1e-15);
    EXPECT_THROW(fuse_chunk_scores(initial, ext, g, 1.5), Error);
    const auto only_initial = fuse_chunk_scores(initial, ext, g, 1.0);
    EXPECT_EQ(only_initial.size(), 1u);
}

TEST(Window, SelectChunksOrdersByScoreThenId) {
    const ChunkScores s{{"b", 0.3}, {"a", 0.3}, {"c", 0.9}};
    EXPECT_EQ(select_chunks(s, 2), (std::vector<std::string>{"c", "a"}));
    EXPECT_TRUE(select_chunks(s, 0).empty());
}

TEST(Window, RenderedSections) {
    const auto g = bacon();
    Strategy st;
    const auto w = assemble("q", st, {"1|francis bacon", "2|dublin\xe2\x8a\x95" "francis bacon", "1|dublin"},
                            {"Francis Bacon#1"}, g, WindowBudget{5, 2});
    const std::string want =
        "-*Entities*-\n- Francis Bacon: Irish-born painter\n- Dublin\n\n"
        "-*Pairwise Relations*-\n- <Dublin, Francis Bacon>: born in\n\n"
        "-*Multiple Associations*-\n\n"
        "-*Passages*-\n- Title: Francis Bacon\nHis father was a horse trainer.\n";
    EXPECT_EQ(w.rendered, want);
    EXPECT_EQ(w.units.size(), 3u);
}

TEST(Window, TokenCountNondecreasingInDepthProperty) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = testkit::random_graph(rng, {.max_vertices = 120, .min_entities = 20, .chunks = 12});
        const auto anchors = testkit::random_anchors(rng, g, 8);
        ScoreMap ext = anchors;
        for (const auto& [k, v] : g.vertices()) ext.emplace(k, 0.001 + testkit::uniform01(rng));
        const auto initial = chunk_relevance(anchors, g);
        Strategy st;
        std::size_t prev = 0;
        for (int d = 1; d <= 5; ++d) {
            const auto b = window_quotas(d);
            const auto w = assemble("q", st, select_units(anchors, ext, b.top_ku),
                                    select_chunks(fuse_chunk_scores(initial, ext, g, 0.5), b.top_kc), g, b);
            const auto n = text::count_tokens(w.rendered);
            EXPECT_GE(n, prev);
            prev = n;
        }
    }
}

TEST(AnswerParsing, SplitsOnLastMarker) {
    const auto a = parse_answer("Thought: Bacon's father was Edward.\nAnswer: Edward Mortimer Bacon");
    EXPECT_EQ(a.thought, "Bacon's father was Edward.");
    EXPECT_EQ(a.answer, "Edward Mortimer Bacon");
    EXPECT_FALSE(a.marker_missing);
    const auto b = parse_answer("thought: the answer: is unclear\nANSWER: 1966");
    EXPECT_EQ(b.answer, "1966");
    EXPECT_EQ(b.thought, "the answer: is unclear");
}

TEST(AnswerParsing, MissingMarkerUsesWholeReply) {
    const auto a = parse_answer("  Sir Nicholas Bacon \n");
    EXPECT_TRUE(a.marker_missing);
    EXPECT_EQ(a.answer, "Sir Nicholas Bacon");
}

TEST(AnswerParsing, PromptCarriesQueryAndContext) {
    ContextWindow w;
    w.rendered = "-*Entities*-\n- {query}\n";
    const auto m = answer_messages("Who?", w, AnswerMode::brief);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_NE(m[0].content.find("Who?"), std::string::npos);
    EXPECT_NE(m[0].content.find("- {query}"), std::string::npos);
    EXPECT_NE(answer_messages("Who?", w, AnswerMode::detailed)[0].content, m[0].content);
}

TEST(AnswerParsing, DetailedModeKeepsWholeReply) {
    GatewayConfig cfg;
    cfg.stub_fallback = StubFallback::error;
    Gateway gw(cfg);
    gw.add_rule({{}, "", "Answer: a long explanation"});
    ContextWindow w;
    const auto d = answer("q", w, gw, AnswerMode::detailed);
    EXPECT_EQ(d.answer, "Answer: a long explanation");
    const auto b = answer("q", w, gw, AnswerMode::brief);
    EXPECT_EQ(b.answer, "a long explanation");
    EXPECT_EQ(gw.ledger().usage_for("answer").total(), d.usage.total() + b.usage.total());
    EXPECT_EQ(answer_mode_from_string("detailed"), AnswerMode::detailed);
    EXPECT_THROW(answer_mode_from_string("long"), Error);
}
