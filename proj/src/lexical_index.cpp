#include "igmirag/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "igmirag/text.hpp"

namespace igmirag {

LexicalIndex LexicalIndex::build(const Hypergraph& graph, const Bm25Params& params) {
    LexicalIndex idx;
    idx.params_ = params;
    std::size_t total = 0;
    for (const auto& [key, v] : graph.vertices()) {
        const auto terms = text::lexical_terms(v.name);
        std::map<std::string, std::size_t> tf;
        for (const auto& t : terms) ++tf[t];
        for (auto& [t, n] : tf) idx.postings_[t].emplace_back(key, n);
        idx.doc_lengths_[key] = terms.size();
        total += terms.size();
    }
    if (!idx.doc_lengths_.empty()) {
        idx.avgdl_ = static_cast<double>(total) / static_cast<double>(idx.doc_lengths_.size());
    }
    return idx;
}

std::vector<LexicalHit> LexicalIndex::search(std::string_view query, std::size_t top_n) const {
    const auto terms = text::lexical_terms(query);
    const std::set<std::string> unique(terms.begin(), terms.end());
    if (unique.empty() || doc_lengths_.empty() || top_n == 0) return {};

    const auto n = static_cast<double>(doc_lengths_.size());
    std::map<std::string, double> scores;
    for (const auto& term : unique) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& [key, tf] : it->second) {
            const auto f = static_cast<double>(tf);
            const double dl = static_cast<double>(doc_lengths_.at(key));
            const double norm = avgdl_ > 0.0 ? dl / avgdl_ : 0.0;
            scores[key] += idf * f * (params_.k1 + 1.0) /
                           (f + params_.k1 * (1.0 - params_.b + params_.b * norm));
        }
    }
    std::vector<LexicalHit> hits;
    for (auto& [key, s] : scores) {
        if (s > 0.0) hits.push_back(LexicalHit{key, s});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const LexicalHit& a, const LexicalHit& b) { return a.score > b.score; });
    if (hits.size() > top_n) hits.resize(top_n);
    return hits;
}

}  // namespace igmirag
