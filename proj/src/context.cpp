#include "igmirag/context.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"
#include "igmirag/prompts.hpp"
#include "igmirag/text.hpp"

namespace igmirag {

WindowBudget window_quotas(int depth, const WindowParams& params) {
    if (depth < 1 || depth > 5) throw Error(ErrorCode::invalid_argument, "depth must be in [1,5]");
    if (params.k_u < 0 || params.k_c < 0) {
        throw Error(ErrorCode::invalid_argument, "window multipliers must be >= 0");
    }
    return WindowBudget{static_cast<std::size_t>(params.k_u * depth),
                        static_cast<std::size_t>(params.k_c * depth)};
}

std::vector<std::string> select_units(const ScoreMap& anchors, const ScoreMap& extended,
                                      std::size_t top_ku) {
    std::vector<std::string> out;
    for (const auto& [key, s] : ranked(anchors)) out.push_back(key);
    ScoreMap expansion;
    for (const auto& [key, s] : extended) {
        if (!anchors.count(key)) expansion.emplace(key, s);
    }
    std::size_t taken = 0;
    for (const auto& [key, s] : ranked(expansion)) {
        if (taken == top_ku) break;
        out.push_back(key);
        ++taken;
    }
    return out;
}

ChunkScores fuse_chunk_scores(const ChunkScores& initial, const ScoreMap& extended_vertex_scores,
                              const Hypergraph& graph, double w) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::invalid_argument, "fusion weight must be in [0,1]");
    const auto extended = chunk_relevance(extended_vertex_scores, graph);
    ChunkScores out;
    std::set<std::string> ids;
    for (const auto& [id, s] : initial) ids.insert(id);
    for (const auto& [id, s] : extended) ids.insert(id);
    for (const auto& id : ids) {
        const auto a = initial.find(id);
        const auto b = extended.find(id);
        const double si = a == initial.end() ? 0.0 : a->second;
        const double se = b == extended.end() ? 0.0 : b->second;
        const double f = w * si + (1.0 - w) * se;
        if (f > 0.0) out[id] = f;
    }
    return out;
}

std::vector<std::string> select_chunks(const ChunkScores& scores, std::size_t top_kc) {
    std::vector<std::string> out;
    for (const auto& [id, s] : ranked(scores)) {
        if (out.size() == top_kc) break;
        out.push_back(id);
    }
    return out;
}

std::string render_context(const std::vector<Vertex>& units, const std::vector<Chunk>& chunks) {
    std::string out;
    for (Layer layer : {Layer::entity, Layer::pair_relation, Layer::multi_association}) {
        out += "-*";
        out += layer_label(layer);
        out += "*-\n";
        for (const auto& v : units) {
            if (v.layer != layer) continue;
            out += "- " + v.name;
            if (!v.description.empty()) out += ": " + v.description;
            out += "\n";
        }
        out += "\n";
    }
    out += "-*Passages*-\n";
    for (const auto& c : chunks) {
        out += "- Title: " + c.source_title + "\n";
        out += c.text;
        if (!c.text.empty() && c.text.back() != '\n') out += "\n";
    }
    return out;
}

ContextWindow assemble(std::string_view /*query*/, const Strategy& /*strategy*/,
                       const std::vector<std::string>& unit_keys,
                       const std::vector<std::string>& chunk_ids, const Hypergraph& graph,
                       const WindowBudget& budget) {
    ContextWindow w;
    w.budget = budget;
    for (const auto& k : unit_keys) w.units.push_back(graph.vertex(k));
    for (const auto& id : chunk_ids) w.chunks.push_back(graph.chunk(id));
    w.rendered = render_context(w.units, w.chunks);
    return w;
}

AnswerMode answer_mode_from_string(std::string_view s) {
    if (s == "brief") return AnswerMode::brief;
    if (s == "detailed") return AnswerMode::detailed;
    throw Error(ErrorCode::invalid_argument, "unknown answer mode '" + std::string(s) + "'");
}

std::string_view to_string(AnswerMode m) noexcept {
    return m == AnswerMode::brief ? "brief" : "detailed";
}

std::vector<ChatMessage> answer_messages(std::string_view query, const ContextWindow& window,
                                         AnswerMode mode) {
    auto tmpl = prompts::get(mode == AnswerMode::brief ? "answer_brief" : "answer_detailed");
    // Query first so braces inside retrieved text are never re-substituted.
    tmpl = text::substitute(std::move(tmpl), "query", query);
    tmpl = text::substitute(std::move(tmpl), "info", window.rendered);
    return {ChatMessage{"user", std::move(tmpl)}};
}

Answer parse_answer(std::string_view reply) {
    Answer a;
    a.raw = std::string(reply);
    const auto lower = text::fold_case(reply);
    const auto ans = lower.rfind("answer:");
    if (ans == std::string::npos) {
        a.answer = std::string(text::trim(reply));
        a.marker_missing = true;
        return a;
    }
    a.answer = std::string(text::trim(reply.substr(ans + 7)));
    const auto th = lower.find("thought:");
    if (th != std::string::npos && th < ans) {
        a.thought = std::string(text::trim(reply.substr(th + 8, ans - th - 8)));
    } else {
        a.thought = std::string(text::trim(reply.substr(0, ans)));
    }
    return a;
}

Answer answer(std::string_view query, const ContextWindow& window, Gateway& gateway,
              AnswerMode mode) {
    const auto messages = answer_messages(query, window, mode);
    ChatOptions opts;
    opts.ledger_tag = "answer";
    auto reply = gateway.chat(messages, opts);
    Answer a;
    if (mode == AnswerMode::detailed) {
        a.raw = reply.text;
        a.answer = std::string(text::trim(reply.text));
    } else {
        a = parse_answer(reply.text);
        if (a.marker_missing) spdlog::warn("answer: reply has no 'Answer:' marker; using whole reply");
    }
    a.usage = reply.usage;
    return a;
}

}  // namespace igmirag
