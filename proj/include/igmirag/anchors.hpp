#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "igmirag/df_index.hpp"
#include "igmirag/gateway.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/lexical_index.hpp"
#include "igmirag/strategy.hpp"

namespace igmirag {

/// vertex key -> relevance score (only positive scores are stored)
using ScoreMap = std::map<std::string, double>;
/// chunk id -> relevance score
using ChunkScores = std::map<std::string, double>;

/// Descending score, ties by ascending key.
std::vector<std::pair<std::string, double>> ranked(const std::map<std::string, double>& scores);

/// s(v) = sum over rankings containing v of 1 / (k0 + rank), ranks 1-based.
ScoreMap rrf_fuse(const std::vector<std::vector<std::string>>& rankings, int k0 = 60);

struct RetrievalParams {
    QuotaParams quotas;
    int rrf_k0 = 60;
};

struct AnchorResult {
    ScoreMap anchors;
    std::vector<std::string> df_ranking;
    std::vector<std::string> bm25_ranking;
};

/// Dual-focus vector channel on the rewritten question plus BM25 on the
/// composite query, fused by RRF. The BM25 list length is k_G + k_L.
AnchorResult retrieve_anchors(const Strategy& s, const DFIndex& df, const LexicalIndex& lex,
                              Gateway& gateway, const RetrievalParams& params = {});

/// s(c) = sum over anchors v mapped to c of s(v) / chunk_degree(v).
ChunkScores chunk_relevance(const ScoreMap& anchors, const Hypergraph& graph);

}  // namespace igmirag
