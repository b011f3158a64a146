#include "igmirag/anchors.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"

namespace igmirag {

std::vector<std::pair<std::string, double>> ranked(const std::map<std::string, double>& scores) {
    std::vector<std::pair<std::string, double>> out(scores.begin(), scores.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

ScoreMap rrf_fuse(const std::vector<std::vector<std::string>>& rankings, int k0) {
    if (rankings.empty()) throw Error(ErrorCode::invalid_argument, "rrf_fuse: no rankings");
    if (k0 < 0) throw Error(ErrorCode::invalid_argument, "rrf_fuse: k0 must be >= 0");
    ScoreMap fused;
    for (const auto& ranking : rankings) {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            if (!seen.insert(ranking[i]).second) continue;
            fused[ranking[i]] += 1.0 / (static_cast<double>(k0) + static_cast<double>(i + 1));
        }
    }
    return fused;
}

AnchorResult retrieve_anchors(const Strategy& s, const DFIndex& df, const LexicalIndex& lex,
                              Gateway& gateway, const RetrievalParams& params) {
    AnchorResult result;
    const auto q = quotas(s.matching_score, params.quotas);
    if (df.size() > 0) {
        const std::vector<std::string> texts{s.rewrite_question};
        const auto emb = gateway.embed(texts);
        result.df_ranking = df.search(emb.at(0), s.target_layer, s.matching_score, params.quotas);
    }
    for (auto& hit : lex.search(composite_query(s), static_cast<std::size_t>(q.global + q.local))) {
        result.bm25_ranking.push_back(std::move(hit.key));
    }
    result.anchors = rrf_fuse({result.bm25_ranking, result.df_ranking}, params.rrf_k0);
    if (result.anchors.empty()) spdlog::warn("retrieval: both channels empty; no anchors");
    return result;
}

ChunkScores chunk_relevance(const ScoreMap& anchors, const Hypergraph& graph) {
    ChunkScores out;
    for (const auto& [key, s] : anchors) {
        const auto& v = graph.vertex(key);
        if (v.chunk_ids.empty()) continue;
        const double share = s / static_cast<double>(v.chunk_ids.size());
        for (const auto& c : v.chunk_ids) out[c] += share;
    }
    return out;
}

}  // namespace igmirag
