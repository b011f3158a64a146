#include "igmirag/diffusion.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "igmirag/error.hpp"

namespace igmirag {
namespace {

void require_high_order(std::string_view c, const Hypergraph& graph) {
    if (graph.vertex_layer(c) == Layer::entity) {
        throw Error(ErrorCode::invalid_argument, "expected a layer-2/3 vertex: " + std::string(c));
    }
}

std::size_t count_above(const std::vector<std::string>& keys, double threshold,
                        const DiffusionState& state) {
    return static_cast<std::size_t>(std::count_if(
        keys.begin(), keys.end(), [&](const std::string& k) { return state.score(k) > threshold; }));
}

}  // namespace

void DiffusionParams::validate() const {
    for (double v : {gamma, tau_L, tau_H, bias_cap, forward_stall_step, backward_relief_step,
                     backward_stall_step, target_layer_bonus}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::invalid_argument, "diffusion parameters must lie in [0,1]");
        }
    }
    if (max_total_iterations_factor < 1) {
        throw Error(ErrorCode::invalid_argument, "max_total_iterations_factor must be >= 1");
    }
}

double DiffusionState::score(std::string_view key) const {
    auto it = scores.find(std::string(key));
    return it == scores.end() ? 0.0 : it->second;
}

void DiffusionState::activate(const std::string& key, Layer layer) {
    activated.insert(key);
    layer_buckets[layer].insert(key);
}

std::size_t higher_count(std::string_view u, Direction dir, const DiffusionState& state,
                         const Hypergraph& graph) {
    return count_above(graph.layer_filtered_neighbors(u, dir), state.score(u), state);
}

double preference(std::size_t n) {
    const auto x = static_cast<double>(n);
    return x / (x + 1.0);
}

double activation_proportion(std::string_view c, const DiffusionState& state, const Hypergraph& graph) {
    require_high_order(c, graph);
    const auto& members = graph.layer_filtered_neighbors(c, Direction::forward);
    if (members.empty()) return 0.0;
    return static_cast<double>(count_above(members, state.score(c), state)) /
           static_cast<double>(members.size());
}

double preference_gain(std::string_view c, std::string_view v, const DiffusionState& state,
                       const Hypergraph& graph, Direction dir) {
    require_high_order(c, graph);
    const double sc = state.score(c);
    const double sv = state.score(v);
    const double gamma = state.params.gamma;
    if (dir == Direction::forward) {
        if (!(sc > sv)) throw Error(ErrorCode::invalid_argument, "forward gain needs S[c] > S[v]");
        const auto n = higher_count(v, Direction::backward, state, graph);
        return (sc - sv) * preference(n) * gamma;
    }
    if (!(sv > sc)) throw Error(ErrorCode::invalid_argument, "backward gain needs S[v] > S[c]");
    const auto n = higher_count(c, Direction::forward, state, graph);
    const double p = activation_proportion(c, state, graph);
    return (sv - sc) * (preference(n) * 0.5 + p * p * 0.5) * gamma;
}

bool threshold_pass(std::string_view c, const DiffusionState& state, const Hypergraph& graph,
                    Layer target_layer) {
    const Layer layer = graph.vertex_layer(c);
    require_high_order(c, graph);
    const double tau0 = layer == Layer::pair_relation ? state.params.tau_L : state.params.tau_H;
    const double bonus = layer == target_layer ? state.params.target_layer_bonus : 0.0;
    return activation_proportion(c, state, graph) > tau0 - (state.bias + bonus);
}

bool adjust_after_phase(const std::set<std::string>& new_forward,
                        const std::set<std::string>& new_backward, DiffusionState& state,
                        const Hypergraph& graph, Direction phase) {
    const auto& p = state.params;
    if (phase == Direction::forward) {
        if (new_forward.empty()) {
            state.bias = std::min(state.bias + p.forward_stall_step, p.bias_cap);
        } else {
            for (const auto& k : new_forward) state.activate(k, graph.vertex_layer(k));
        }
        return false;
    }
    if (new_backward.empty()) {
        state.bias = std::min(state.bias + p.backward_stall_step, p.bias_cap);
        state.iteration -= 1;
        return true;
    }
    for (const auto& k : new_backward) state.activate(k, graph.vertex_layer(k));
    state.bias = std::max(state.bias - p.backward_relief_step, 0.0);
    return false;
}

nlohmann::json to_json(const DiffusionTraceRecord& r) {
    nlohmann::json gains = nlohmann::json::object();
    for (const auto& [k, g] : r.gains) gains[k] = g;
    return {{"step", r.step},
            {"iteration", r.iteration},
            {"phase", r.phase == Direction::forward ? "forward" : "backward"},
            {"bias", r.bias},
            {"newly_activated", r.newly_activated},
            {"gains", std::move(gains)},
            {"backtracked", r.backtracked}};
}

std::string_view to_string(DiffusionExit e) noexcept {
    switch (e) {
        case DiffusionExit::depth_reached: return "depth_reached";
        case DiffusionExit::bias_cap: return "bias_cap";
        case DiffusionExit::safety_cap: return "safety_cap";
    }
    return "unknown";
}

DiffusionResult diffuse(const ScoreMap& anchors, Layer target_layer, int depth,
                        const Hypergraph& graph, const DiffusionParams& params) {
    if (anchors.empty()) throw Error(ErrorCode::invalid_argument, "diffuse: empty anchors");
    if (depth < 1 || depth > 5) throw Error(ErrorCode::invalid_argument, "diffuse: depth must be in [1,5]");
    params.validate();

    DiffusionState state;
    state.params = params;
    for (const auto& [key, s] : anchors) {
        const Layer layer = graph.vertex_layer(key);
        if (s < 0.0) throw Error(ErrorCode::invalid_argument, "diffuse: negative anchor score");
        state.scores[key] = s;
        state.activate(key, layer);
    }

    DiffusionResult result;
    const int max_pairs = params.max_total_iterations_factor * depth;
    result.exit = DiffusionExit::safety_cap;
    while (state.iteration < depth) {
        if (result.phase_pairs >= max_pairs) break;
        ++result.phase_pairs;
        const int iteration = state.iteration + 1;
        ScoreMap staged = state.scores;

        // Top-down: layer-2/3 activated vertices broadcast to their members.
        DiffusionTraceRecord fwd;
        fwd.step = result.phase_pairs;
        fwd.iteration = iteration;
        fwd.phase = Direction::forward;
        std::set<std::string> new_forward;
        std::set<std::string> high;
        for (Layer l : {Layer::pair_relation, Layer::multi_association}) {
            const auto& b = state.layer_buckets[l];
            high.insert(b.begin(), b.end());
        }
        for (const auto& c : high) {
            for (const auto& v : graph.layer_filtered_neighbors(c, Direction::forward)) {
                if (!(state.score(c) > state.score(v))) continue;
                if (higher_count(v, Direction::backward, state, graph) == 0) continue;
                const double g = preference_gain(c, v, state, graph, Direction::forward);
                staged[v] += g;
                fwd.gains[v] += g;
                if (!state.activated.count(v)) new_forward.insert(v);
            }
        }
        adjust_after_phase(new_forward, {}, state, graph, Direction::forward);
        fwd.bias = state.bias;
        fwd.newly_activated.assign(new_forward.begin(), new_forward.end());
        result.trace.push_back(std::move(fwd));

        // Bottom-up: entities push into incident vertices that clear the threshold.
        DiffusionTraceRecord bwd;
        bwd.step = result.phase_pairs;
        bwd.iteration = iteration;
        bwd.phase = Direction::backward;
        std::set<std::string> new_backward;
        const auto low = state.layer_buckets[Layer::entity];
        for (const auto& v : low) {
            for (const auto& c : graph.layer_filtered_neighbors(v, Direction::backward)) {
                if (!(state.score(v) > state.score(c))) continue;
                if (!threshold_pass(c, state, graph, target_layer)) continue;
                const double g = preference_gain(c, v, state, graph, Direction::backward);
                staged[c] += g;
                bwd.gains[c] += g;
                if (!state.activated.count(c)) new_backward.insert(c);
            }
        }
        bwd.backtracked = adjust_after_phase({}, new_backward, state, graph, Direction::backward);
        bwd.bias = state.bias;
        bwd.newly_activated.assign(new_backward.begin(), new_backward.end());
        result.trace.push_back(std::move(bwd));

        state.scores = std::move(staged);
        state.iteration += 1;
        if (new_forward.empty() && new_backward.empty() && state.bias == params.bias_cap) {
            result.exit = DiffusionExit::bias_cap;
            break;
        }
    }
    if (state.iteration >= depth && result.exit != DiffusionExit::bias_cap) {
        result.exit = DiffusionExit::depth_reached;
    }
    for (auto it = state.scores.begin(); it != state.scores.end();) {
        it = it->second > 0.0 ? std::next(it) : state.scores.erase(it);
    }
    result.scores = std::move(state.scores);
    result.activated = std::move(state.activated);
    result.iterations = state.iteration;
    return result;
}

}  // namespace igmirag
