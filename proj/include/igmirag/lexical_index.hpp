#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "igmirag/hypergraph.hpp"

namespace igmirag {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    std::size_t top_n = 20;

    bool operator==(const Bm25Params&) const = default;
};

struct LexicalHit {
    std::string key;
    double score = 0.0;
};

/// Okapi BM25 over vertex name tokens.
class LexicalIndex {
public:
    LexicalIndex() = default;

    static LexicalIndex build(const Hypergraph& graph, const Bm25Params& params = {});

    /// Descending score, ties by ascending key. Keys with zero score are omitted.
    std::vector<LexicalHit> search(std::string_view query, std::size_t top_n) const;

    std::size_t size() const noexcept { return doc_lengths_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    const Bm25Params& params() const noexcept { return params_; }

private:
    std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> postings_;
    std::map<std::string, std::size_t> doc_lengths_;
    double avgdl_ = 0.0;
    Bm25Params params_;
};

}  // namespace igmirag
