#pragma once

// Straight-line reference for preference-aware bidirectional diffusion.
// Written against plain maps built from the graph's member lists; it shares
// no helpers with the library implementation.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "igmirag/hypergraph.hpp"

namespace igmirag::oracle {

struct PabdOutcome {
    std::map<std::string, double> scores;
    std::set<std::string> activated;
    int phase_pairs = 0;
    int iterations = 0;
    std::string exit;
    std::vector<double> bias_after_phase;
    std::vector<std::map<std::string, double>> forward_gains;  // per phase pair
};

inline PabdOutcome pabd(const std::map<std::string, double>& anchors, int target_layer, int depth,
                        const Hypergraph& graph) {
    const double gamma = 0.2;
    const double cap = 0.5;

    std::map<std::string, int> layer;
    std::map<std::string, std::vector<std::string>> members;
    std::map<std::string, std::vector<std::string>> incident;
    for (const auto& [key, v] : graph.vertices()) {
        layer[key] = static_cast<int>(v.layer);
        if (v.layer == Layer::entity) continue;
        members[key] = v.members;
        for (const auto& m : v.members) incident[m].push_back(key);
    }
    for (auto& [k, list] : incident) std::sort(list.begin(), list.end());
    for (auto& [k, list] : members) std::sort(list.begin(), list.end());

    std::map<std::string, double> S(anchors.begin(), anchors.end());
    std::set<std::string> A;
    for (const auto& [k, s] : anchors) A.insert(k);
    double bias = 0.0;
    int iter = 0;
    PabdOutcome out;
    out.exit = "safety_cap";

    auto get = [&](const std::string& k) {
        auto it = S.find(k);
        return it == S.end() ? 0.0 : it->second;
    };

    while (iter < depth && out.phase_pairs < 3 * depth) {
        out.phase_pairs += 1;
        std::map<std::string, double> next = S;

        std::set<std::string> newF;
        std::map<std::string, double> fg;
        for (const auto& c : A) {
            if (layer[c] == 1) continue;
            for (const auto& v : members[c]) {
                if (!(get(c) > get(v))) continue;
                int n = 0;
                for (const auto& c2 : incident[v]) n += get(c2) > get(v) ? 1 : 0;
                if (n == 0) continue;
                const double g = (get(c) - get(v)) * (n / (n + 1.0)) * gamma;
                next[v] += g;
                fg[v] += g;
                if (!A.count(v)) newF.insert(v);
            }
        }
        if (newF.empty()) {
            bias = std::min(bias + 0.1, cap);
        } else {
            A.insert(newF.begin(), newF.end());
        }
        out.bias_after_phase.push_back(bias);
        out.forward_gains.push_back(fg);

        std::set<std::string> newB;
        std::vector<std::string> entities;
        for (const auto& k : A) {
            if (layer[k] == 1) entities.push_back(k);
        }
        for (const auto& v : entities) {
            for (const auto& c : incident[v]) {
                if (!(get(v) > get(c))) continue;
                int n = 0;
                for (const auto& m : members[c]) n += get(m) > get(c) ? 1 : 0;
                const double P = static_cast<double>(n) / static_cast<double>(members[c].size());
                const double tau = layer[c] == 2 ? 0.5 : 0.4;
                const double bonus = layer[c] == target_layer ? 0.05 : 0.0;
                if (!(P > tau - (bias + bonus))) continue;
                const double g = (get(v) - get(c)) * ((n / (n + 1.0)) * 0.5 + P * P * 0.5) * gamma;
                next[c] += g;
                if (!A.count(c)) newB.insert(c);
            }
        }
        if (newB.empty()) {
            bias = std::min(bias + 0.15, cap);
            iter -= 1;
        } else {
            A.insert(newB.begin(), newB.end());
            bias = std::max(bias - 0.1, 0.0);
        }
        out.bias_after_phase.push_back(bias);

        S = next;
        iter += 1;
        if (newF.empty() && newB.empty() && bias == cap) {
            out.exit = "bias_cap";
            break;
        }
    }
    if (iter >= depth && out.exit != "bias_cap") out.exit = "depth_reached";
    for (const auto& [k, s] : S) {
        if (s > 0.0) out.scores[k] = s;
    }
    out.activated = A;
    out.iterations = iter;
    return out;
}

}  // namespace igmirag::oracle
