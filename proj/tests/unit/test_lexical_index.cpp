#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "igmirag/lexical_index.hpp"
#include "igmirag/text.hpp"
#include "support.hpp"

using namespace igmirag;

namespace {

// Direct Okapi BM25 over vertex names.
std::vector<std::pair<std::string, double>> naive_bm25(const Hypergraph& g, const std::string& query) {
    std::map<std::string, std::vector<std::string>> docs;
    double total = 0.0;
    for (const auto& [k, v] : g.vertices()) {
        docs[k] = text::lexical_terms(v.name);
        total += static_cast<double>(docs[k].size());
    }
    const double n = static_cast<double>(docs.size());
    const double avgdl = total / n;
    const auto q = text::lexical_terms(query);
    const std::set<std::string> terms(q.begin(), q.end());
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [k, d] : docs) {
        double s = 0.0;
        for (const auto& t : terms) {
            const double tf = static_cast<double>(std::count(d.begin(), d.end(), t));
            if (tf == 0.0) continue;
            double df = 0.0;
            for (const auto& [k2, d2] : docs) df += std::count(d2.begin(), d2.end(), t) > 0 ? 1.0 : 0.0;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            s += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * static_cast<double>(d.size()) / avgdl));
        }
        if (s > 0.0) out.emplace_back(k, s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

Hypergraph named_graph(std::mt19937_64& rng) {
    static const std::vector<std::string> words{"bacon", "head", "portrait", "father", "dyer", "figure",
                                                "landscape", "durer", "elder", "hall", "eric", "ireland"};
    Hypergraph g;
    Chunk c;
    c.id = "d#0";
    c.source_title = "d";
    c.text = "x";
    g.upsert_chunk(c);
    std::vector<std::string> names;
    const auto n = testkit::uniform(rng, 5, 40);
    for (std::size_t i = 0; i < n; ++i) {
        std::string name;
        const auto len = testkit::uniform(rng, 1, 4);
        for (std::size_t j = 0; j < len; ++j) name += words[testkit::uniform(rng, 0, words.size() - 1)] + " ";
        name += std::to_string(i);
        names.push_back(name);
        g.upsert_vertex(make_entity(name, "", {}, {"d#0"}));
    }
    for (std::size_t i = 0; i + 1 < names.size(); i += 3) {
        g.upsert_vertex(make_relation(Layer::pair_relation, {names[i], names[i + 1]}, "", {}, {"d#0"}));
    }
    return g;
}

}  // namespace

TEST(LexicalIndex, MatchesNaiveBm25Property) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = named_graph(rng);
        const auto idx = LexicalIndex::build(g);
        const std::string query = "bacon father head head eric";
        const auto want = naive_bm25(g, query);
        const auto got = idx.search(query, 1000);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_NEAR(got[i].score, want[i].second, 1e-12);
            if (i > 0) {
                EXPECT_TRUE(got[i - 1].score > got[i].score ||
                            (got[i - 1].score == got[i].score && got[i - 1].key < got[i].key));
            }
        }
    }
}

TEST(LexicalIndex, TopNAndEmptyQueries) {
    std::mt19937_64 rng(42);
    const auto g = named_graph(rng);
    const auto idx = LexicalIndex::build(g);
    EXPECT_LE(idx.search("bacon head portrait", 3).size(), 3u);
    EXPECT_TRUE(idx.search("", 10).empty());
    EXPECT_TRUE(idx.search("zzz", 10).empty());
    EXPECT_TRUE(idx.search("bacon", 0).empty());
}
