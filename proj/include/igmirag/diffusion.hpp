#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "igmirag/anchors.hpp"
#include "igmirag/hypergraph.hpp"

namespace igmirag {

struct DiffusionParams {
    double gamma = 0.2;
    double tau_L = 0.5;  // pair-relation vertices
    double tau_H = 0.4;  // multi-association vertices
    double bias_cap = 0.5;
    double forward_stall_step = 0.10;
    double backward_relief_step = 0.10;
    double backward_stall_step = 0.15;
    double target_layer_bonus = 0.05;
    int max_total_iterations_factor = 3;

    void validate() const;
    bool operator==(const DiffusionParams&) const = default;
};

struct DiffusionState {
    ScoreMap scores;
    std::set<std::string> activated;
    std::map<Layer, std::set<std::string>> layer_buckets;
    double bias = 0.0;
    int iteration = 0;
    DiffusionParams params;

    double score(std::string_view key) const;
    void activate(const std::string& key, Layer layer);
};

/// Neighbours in LFN(u, dir) scoring strictly above u.
std::size_t higher_count(std::string_view u, Direction dir, const DiffusionState& state,
                         const Hypergraph& graph);

/// n / (n + 1)
double preference(std::size_t n);

/// Fraction of c's member entities scoring strictly above c.
double activation_proportion(std::string_view c, const DiffusionState& state, const Hypergraph& graph);

/// Forward (c -> member v): (S[c]-S[v]) * PA(n) * gamma, n = layer-2/3
/// vertices incident to v scoring above v.
/// Backward (member v -> c): (S[v]-S[c]) * (PA(n)*0.5 + P^2*0.5) * gamma,
/// n = members of c scoring above c, P = activation_proportion(c).
double preference_gain(std::string_view c, std::string_view v, const DiffusionState& state,
                       const Hypergraph& graph, Direction dir);

/// P(c) > tau0(c) - (bias + bonus if c lies on the target layer).
bool threshold_pass(std::string_view c, const DiffusionState& state, const Hypergraph& graph,
                    Layer target_layer);

/// Merges newly activated vertices and moves the bias. Returns true when the
/// backward phase stalled and the iteration was backtracked.
bool adjust_after_phase(const std::set<std::string>& new_forward,
                        const std::set<std::string>& new_backward, DiffusionState& state,
                        const Hypergraph& graph, Direction phase);

struct DiffusionTraceRecord {
    int step = 0;       // phase-pair counter, 1-based, counts backtracked repeats
    int iteration = 0;  // iteration being run, 1-based
    Direction phase = Direction::forward;
    double bias = 0.0;  // after the phase adjustment
    std::vector<std::string> newly_activated;
    std::map<std::string, double> gains;
    bool backtracked = false;
};

nlohmann::json to_json(const DiffusionTraceRecord& r);

enum class DiffusionExit { depth_reached, bias_cap, safety_cap };
std::string_view to_string(DiffusionExit e) noexcept;

struct DiffusionResult {
    ScoreMap scores;
    std::set<std::string> activated;
    std::vector<DiffusionTraceRecord> trace;
    int iterations = 0;   // committed iterations
    int phase_pairs = 0;  // including backtracked repeats
    DiffusionExit exit = DiffusionExit::depth_reached;
};

/// Alternating top-down broadcast and threshold-gated bottom-up screening.
/// Both phases of one iteration read the scores committed by the previous
/// iteration; at most `depth` committed iterations and 3*depth phase pairs.
DiffusionResult diffuse(const ScoreMap& anchors, Layer target_layer, int depth,
                        const Hypergraph& graph, const DiffusionParams& params = {});

}  // namespace igmirag
