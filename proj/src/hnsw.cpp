#include "igmirag/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "igmirag/error.hpp"

namespace igmirag {
namespace {

double unit_uniform(std::mt19937_64& rng) {
    // (0, 1]; avoids log(0) below and is independent of the standard library's
    // distribution implementation.
    return (static_cast<double>(rng() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
}

bool hit_order(const AnnHit& a, const AnnHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
}

}  // namespace

HnswIndex::HnswIndex(std::vector<std::vector<float>> rows, const AnnParams& params)
    : rows_(std::move(rows)), params_(params) {
    if (params_.m < 2) throw Error(ErrorCode::invalid_argument, "hnsw: m must be >= 2");
    if (rows_.empty()) return;
    const auto dim = rows_.front().size();
    for (const auto& r : rows_) {
        if (r.size() != dim) throw Error(ErrorCode::invalid_argument, "hnsw: ragged rows");
    }
    std::mt19937_64 rng(params_.seed);
    const double ml = 1.0 / std::log(static_cast<double>(params_.m));
    links_.resize(rows_.size());
    for (std::size_t id = 0; id < rows_.size(); ++id) {
        const auto level = static_cast<std::size_t>(std::floor(-std::log(unit_uniform(rng)) * ml));
        insert(id, level);
    }
    // Pruning can leave a point with no incoming base-layer link; give it one
    // from its nearest out-neighbor.
    std::vector<char> reached(rows_.size(), 0);
    reached[entry_] = 1;
    for (const auto& l : links_) {
        for (auto n : l[0]) reached[n] = 1;
    }
    for (std::size_t id = 0; id < rows_.size(); ++id) {
        if (reached[id] == 0 && !links_[id][0].empty()) links_[links_[id][0].front()][0].push_back(id);
    }
}

float HnswIndex::distance(std::span<const float> q, std::size_t id) const {
    const auto& r = rows_[id];
    double dot = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) dot += static_cast<double>(q[i]) * r[i];
    return static_cast<float>(1.0 - dot);
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> q,
                                                          const std::vector<std::size_t>& entry,
                                                          std::size_t ef, std::size_t level) const {
    std::vector<char> visited(rows_.size(), 0);
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
    std::priority_queue<Candidate> best;  // worst on top
    for (auto e : entry) {
        if (visited[e] != 0) continue;
        visited[e] = 1;
        const Candidate c{distance(q, e), e};
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
    }
    while (!frontier.empty()) {
        const auto cur = frontier.top();
        frontier.pop();
        if (best.size() >= ef && cur > best.top()) break;
        for (auto n : links_[cur.second][level]) {
            if (visited[n] != 0) continue;
            visited[n] = 1;
            const Candidate c{distance(q, n), n};
            if (best.size() < ef || c < best.top()) {
                frontier.push(c);
                best.push(c);
                if (best.size() > ef) best.pop();
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    while (!best.empty()) {
        out.push_back(best.top());
        best.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// Keeps a candidate only when it is closer to the base than to every kept
// neighbor, so isolated points keep incoming links next to dense clusters.
std::vector<std::size_t> HnswIndex::select_neighbors(const std::vector<Candidate>& sorted,
                                                     std::size_t cap) const {
    std::vector<std::size_t> kept;
    for (const auto& [dist, id] : sorted) {
        if (kept.size() == cap) break;
        bool diverse = true;
        for (auto r : kept) {
            if (distance(rows_[id], r) < dist) {
                diverse = false;
                break;
            }
        }
        if (diverse) kept.push_back(id);
    }
    return kept;
}

void HnswIndex::shrink(std::size_t id, std::size_t level) {
    const std::size_t cap = level == 0 ? 2 * params_.m : params_.m;
    auto& nb = links_[id][level];
    if (nb.size() <= cap) return;
    std::vector<Candidate> scored;
    scored.reserve(nb.size());
    for (auto n : nb) scored.emplace_back(distance(rows_[id], n), n);
    std::sort(scored.begin(), scored.end());
    nb = select_neighbors(scored, cap);
}

void HnswIndex::insert(std::size_t id, std::size_t level) {
    links_[id].resize(level + 1);
    if (id == 0) {
        entry_ = 0;
        max_level_ = level;
        return;
    }
    const std::span<const float> q(rows_[id]);
    std::vector<std::size_t> ep{entry_};
    for (std::size_t lc = max_level_; lc > level; --lc) {
        auto w = search_layer(q, ep, 1, lc);
        ep = {w.front().second};
    }
    for (std::size_t lc = std::min(level, max_level_) + 1; lc-- > 0;) {
        auto w = search_layer(q, ep, params_.ef_construction, lc);
        const std::size_t cap = lc == 0 ? 2 * params_.m : params_.m;
        auto& mine = links_[id][lc];
        mine = select_neighbors(w, cap);
        for (auto n : mine) {
            links_[n][lc].push_back(id);
            shrink(n, lc);
        }
        ep.clear();
        for (const auto& c : w) ep.push_back(c.second);
    }
    if (level > max_level_) {
        max_level_ = level;
        entry_ = id;
    }
}

std::vector<AnnHit> HnswIndex::search(std::span<const float> query, std::size_t k) const {
    if (params_.exact) return exact_search(query, k);
    if (rows_.empty() || k == 0) return {};
    if (query.size() != rows_.front().size()) {
        throw Error(ErrorCode::invalid_argument, "hnsw: query dimension mismatch");
    }
    std::vector<std::size_t> ep{entry_};
    for (std::size_t lc = max_level_; lc > 0; --lc) {
        auto w = search_layer(query, ep, 1, lc);
        ep = {w.front().second};
    }
    auto w = search_layer(query, ep, std::max(params_.ef_search, k), 0);
    std::vector<AnnHit> out;
    for (const auto& c : w) out.push_back(AnnHit{c.second, 1.0F - c.first});
    std::sort(out.begin(), out.end(), hit_order);
    if (out.size() > k) out.resize(k);
    return out;
}

std::vector<AnnHit> HnswIndex::exact_search(std::span<const float> query, std::size_t k) const {
    if (rows_.empty() || k == 0) return {};
    if (query.size() != rows_.front().size()) {
        throw Error(ErrorCode::invalid_argument, "hnsw: query dimension mismatch");
    }
    std::vector<AnnHit> all;
    all.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) all.push_back(AnnHit{i, 1.0F - distance(query, i)});
    const auto n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), hit_order);
    all.resize(n);
    return all;
}

}  // namespace igmirag
