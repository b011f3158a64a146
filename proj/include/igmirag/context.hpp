#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "igmirag/anchors.hpp"
#include "igmirag/gateway.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/strategy.hpp"

namespace igmirag {

struct WindowParams {
    int k_u = 5;  // knowledge units per depth step
    int k_c = 2;  // chunks per depth step
    double fusion_w = 0.5;

    bool operator==(const WindowParams&) const = default;
};

struct WindowBudget {
    std::size_t top_ku = 0;
    std::size_t top_kc = 0;

    bool operator==(const WindowBudget&) const = default;
};

WindowBudget window_quotas(int depth, const WindowParams& params = {});

/// Anchors by s descending, then up to `top_ku` non-anchor keys by s' descending.
std::vector<std::string> select_units(const ScoreMap& anchors, const ScoreMap& extended,
                                      std::size_t top_ku);

/// w * initial(c) + (1 - w) * extended(c), extended(c) from the chunk-relevance
/// rule applied to `extended_vertex_scores`.
ChunkScores fuse_chunk_scores(const ChunkScores& initial, const ScoreMap& extended_vertex_scores,
                              const Hypergraph& graph, double w);

/// Top `top_kc` chunk ids, descending score, ties by ascending id.
std::vector<std::string> select_chunks(const ChunkScores& scores, std::size_t top_kc);

struct ContextWindow {
    std::vector<Vertex> units;
    std::vector<Chunk> chunks;
    std::string rendered;
    WindowBudget budget;
};

std::string render_context(const std::vector<Vertex>& units, const std::vector<Chunk>& chunks);

ContextWindow assemble(std::string_view query, const Strategy& strategy,
                       const std::vector<std::string>& unit_keys,
                       const std::vector<std::string>& chunk_ids, const Hypergraph& graph,
                       const WindowBudget& budget);

enum class AnswerMode { brief, detailed };
AnswerMode answer_mode_from_string(std::string_view s);
std::string_view to_string(AnswerMode m) noexcept;

struct Answer {
    std::string thought;
    std::string answer;
    std::string raw;
    TokenUsage usage;
    bool marker_missing = false;
};

std::vector<ChatMessage> answer_messages(std::string_view query, const ContextWindow& window,
                                         AnswerMode mode);

/// Splits a "Thought: ... Answer: ..." reply. Without an "Answer:" marker
/// the whole reply becomes the answer and `marker_missing` is set.
Answer parse_answer(std::string_view reply);

Answer answer(std::string_view query, const ContextWindow& window, Gateway& gateway,
              AnswerMode mode);

}  // namespace igmirag
