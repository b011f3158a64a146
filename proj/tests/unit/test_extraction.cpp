#include <gtest/gtest.h>

#include "igmirag/config.hpp"
#include "igmirag/error.hpp"
#include "igmirag/extraction.hpp"
#include "igmirag/text.hpp"
#include "support.hpp"

using namespace igmirag;

namespace {

std::string sentences(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += "alpha beta gamma delta epsilon zeta eta theta iota. ";
    return out;
}

Gateway stub() {
    GatewayConfig c;
    c.stub_fallback = StubFallback::error;
    return Gateway(c);
}

void add_stage_rules(Gateway& gw, const std::string& entities_reply) {
    gw.add_rule({{}, "Identify as many entities as possible", entities_reply});
    gw.add_rule({{}, "For all the entities determined in Step 1",
                 R"({"pairs": [{"entities_pair": ["Francis Bacon", "dublin"], "relationship_description": "born in"},
                               {"entities_pair": ["Bacon", "Ghost"], "relationship_description": "x"},
                               {"entities_pair": ["Francis Bacon", "Francis Bacon"], "relationship_description": "self"}]})"});
    gw.add_rule({{}, "Based on all the identified entity relationships in Step 2",
                 R"({"high_level_keywords": ["painting", "Irish art"]})"});
    gw.add_rule({{}, "Based on the entities in Step 1, the entities pairs in Step 2",
                 R"(```json
{"associations": [{"entities_set": ["Francis Bacon", "Dublin", "Head I"], "relationship_description": "early life"}]}
```)"});
}

const char* kEntities =
    R"({"entities": [{"entity_name": "Francis Bacon", "entity_description": "painter", "attribute": ["Irish"]},
                     {"entity_name": "Dublin", "entity_description": "city"},
                     {"entity_name": "Head I", "entity_description": "painting"}]})";

}  // namespace

TEST(Chunking, PacksSentencesGreedily) {
    const Document doc{"Long", sentences(160)};
    EXPECT_EQ(text::count_tokens(doc.text), 1600u);
    const auto chunks = chunk_document(doc, 780);
    ASSERT_EQ(chunks.size(), 3u);
    std::string joined;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        EXPECT_EQ(chunks[i].id, "Long#" + std::to_string(i + 1));
        EXPECT_LE(chunks[i].token_count, 780u);
        EXPECT_EQ(chunks[i].token_count, text::count_tokens(chunks[i].text));
        joined += chunks[i].text;
    }
    EXPECT_EQ(joined, doc.text);
    EXPECT_EQ(chunks[0].token_count, 780u);
}

TEST(Chunking, SplitsOnNewlinesAndHardSplitsHugeSentences) {
    std::string huge;
    for (int i = 0; i < 300; ++i) huge += "w" + std::to_string(i) + " ";
    const Document doc{"H", "Short line\nAnother line\n" + huge};
    const auto chunks = chunk_document(doc, 100);
    std::string joined;
    for (const auto& c : chunks) {
        EXPECT_LE(c.token_count, 100u + kChunkOverflowSlack);
        joined += c.text;
    }
    EXPECT_EQ(joined, doc.text);
    EXPECT_GE(chunks.size(), 3u);
    EXPECT_THROW(chunk_document(Document{"E", "   "}, 100), Error);
    EXPECT_THROW(chunk_document(doc, 0), Error);
}

TEST(Chunking, SlightlyLongSentenceStaysWhole) {
    std::string s;
    for (int i = 0; i < 120; ++i) s += "x ";
    s += ".";
    const auto chunks = chunk_document(Document{"S", s}, 100);
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].token_count, 121u);
}

TEST(Repair, ExactThenLongestContainment) {
    const std::vector<ExtractedEntity> es{{"Francis Bacon", "", {}}, {"Bacon", "", {}}, {"Head I", "", {}},
                                          {"Head II", "", {}}};
    EXPECT_EQ(repair_member("francis bacon", es), "Francis Bacon");
    EXPECT_EQ(repair_member("Bacon", es), "Bacon");
    EXPECT_EQ(repair_member("Sir Francis Bacon", es), "Francis Bacon");
    EXPECT_EQ(repair_member("Head", es), "Head II");
    EXPECT_EQ(repair_member("Dublin", es), "");
    EXPECT_EQ(repair_member("  ", es), "");
}

TEST(Repair, TiesBreakLexicographically) {
    const std::vector<ExtractedEntity> es{{"Zeta Hall", "", {}}, {"Alfa Hall", "", {}}};
    EXPECT_EQ(repair_member("Hall", es), "Alfa Hall");
}

TEST(Extract, FourStageConversation) {
    auto gw = stub();
    add_stage_rules(gw, kEntities);
    Chunk c;
    c.id = "Francis Bacon#1";
    c.source_title = "Francis Bacon";
    c.text = "Francis Bacon was born in Dublin.";
    const auto r = extract_knowledge(c, gw);
    ASSERT_EQ(r.entities.size(), 3u);
    EXPECT_EQ(r.entities[0].attributes, std::vector<std::string>{"Irish"});
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0].members, (std::vector<std::string>{"Francis Bacon", "Dublin"}));
    EXPECT_EQ(r.keywords, (std::vector<std::string>{"painting", "Irish art"}));
    ASSERT_EQ(r.associations.size(), 1u);
    EXPECT_EQ(r.associations[0].members.size(), 3u);
    EXPECT_FALSE(r.repairs.empty());
    EXPECT_EQ(gw.ledger().entries().at(0).tag, "extraction");
    EXPECT_EQ(gw.ledger().calls(), 4u);
    EXPECT_EQ(r.usage, gw.ledger().totals());
}

TEST(Extract, RetryCarriesNoticeAndThenFails) {
    auto gw = stub();
    gw.add_rule({{}, "could not be parsed", kEntities});
    add_stage_rules(gw, "I found some entities but will not say which.");
    Chunk c;
    c.id = "x#1";
    c.source_title = "x";
    c.text = "Francis Bacon was born in Dublin.";
    const auto r = extract_knowledge(c, gw);
    EXPECT_EQ(r.entities.size(), 3u);
    EXPECT_EQ(gw.ledger().calls(), 5u);

    auto bad = stub();
    bad.add_rule({{}, "could not be parsed", "no json here"});
    add_stage_rules(bad, "no json here");
    try {
        extract_knowledge(c, bad, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::extraction_failure);
        EXPECT_EQ(e.detail(), "no json here");
    }
    EXPECT_EQ(bad.ledger().calls(), 3u);
}

TEST(BuildIndex, FixtureCountsAndParallelDeterminism) {
    const auto fx = testkit::fixture_dir() / "bacon";
    const auto cfg = load_config(fx / "stub.json");
    const auto corpus = load_corpus(fx / "corpus.jsonl");
    ASSERT_EQ(corpus.size(), 5u);
    auto p1 = cfg.build;
    p1.parallelism = 1;
    auto p4 = cfg.build;
    p4.parallelism = 4;
    Gateway g1(cfg.gateway);
    Gateway g4(cfg.gateway);
    const auto a = build_index(corpus, p1, g1);
    const auto b = build_index(corpus, p4, g4);
    EXPECT_EQ(a.stats.entities, 15u);
    EXPECT_EQ(a.stats.pairs, 9u);
    EXPECT_EQ(a.stats.associations, 2u);
    EXPECT_EQ(a.stats.chunks, 5u);
    EXPECT_TRUE(a.stats.failed_chunks.empty());
    EXPECT_EQ(a.graph, b.graph);
    EXPECT_EQ(a.stats, b.stats);
    EXPECT_EQ(a.df.table(), b.df.table());
    EXPECT_NO_THROW(a.graph.validate(true));
    EXPECT_EQ(a.df.size(), a.graph.vertex_count());
}

TEST(BuildIndex, FailedChunksAreReportedNotFatal) {
    GatewayConfig gc;
    gc.stub_fallback = StubFallback::error;
    Gateway gw(gc);
    gw.add_rule({{"Title: good\nText:"}, "Identify as many entities as possible", kEntities});
    gw.add_rule({{"Title: good\nText:"}, "", R"({"pairs": [], "high_level_keywords": [], "associations": []})"});
    gw.add_rule({{"Title: bad\nText:"}, "", "not json"});
    BuildParams p;
    p.parallelism = 2;
    const auto r = build_index({{"good", "Francis Bacon was born in Dublin."}, {"bad", "Nothing here."}}, p, gw);
    EXPECT_EQ(r.stats.failed_chunks, std::vector<std::string>{"bad#1"});
    EXPECT_EQ(r.stats.entities, 3u);
    EXPECT_EQ(r.stats.chunks, 2u);

    Gateway none(gc);
    none.add_rule({{}, "", "not json"});
    try {
        build_index({{"bad", "Nothing here."}}, p, none);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::build_failure);
    }
}

TEST(Corpus, LoadsDirectoryAndJsonLines) {
    testkit::TempDir dir("corpus");
    std::filesystem::create_directories(dir / "docs");
    testkit::write_file(dir / "docs" / "b.txt", "Second.");
    testkit::write_file(dir / "docs" / "a.txt", "First.");
    const auto docs = load_corpus(dir / "docs");
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].title, "a");
    EXPECT_EQ(docs[1].text, "Second.");
    testkit::write_file(dir / "c.jsonl", "{\"title\": \"T\", \"text\": \"x\"}\n\n{\"nope\": 1}\n");
    EXPECT_THROW(load_corpus(dir / "c.jsonl"), Error);
    try {
        load_corpus(dir / "missing");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
}
