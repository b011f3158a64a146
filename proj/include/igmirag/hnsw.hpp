#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace igmirag {

struct AnnParams {
    std::size_t m = 16;                 // max links per node above layer 0 (2m at layer 0)
    std::size_t ef_construction = 100;
    std::size_t ef_search = 64;
    std::uint64_t seed = 42;
    bool exact = false;                 // brute-force scan instead of graph search

    bool operator==(const AnnParams&) const = default;
};

struct AnnHit {
    std::size_t id;
    float similarity;
};

/// Hierarchical navigable small world graph over unit vectors, cosine
/// similarity. Construction is seeded and inserts rows in index order, so two
/// builds from the same rows produce the same graph.
class HnswIndex {
public:
    HnswIndex() = default;
    HnswIndex(std::vector<std::vector<float>> rows, const AnnParams& params);

    /// Top-k by similarity (descending, ties by ascending id).
    std::vector<AnnHit> search(std::span<const float> query, std::size_t k) const;
    std::vector<AnnHit> exact_search(std::span<const float> query, std::size_t k) const;

    std::size_t size() const noexcept { return rows_.size(); }
    std::size_t max_level() const noexcept { return max_level_; }

private:
    using Candidate = std::pair<float, std::size_t>;  // (distance, id)

    float distance(std::span<const float> q, std::size_t id) const;
    std::vector<Candidate> search_layer(std::span<const float> q, const std::vector<std::size_t>& entry,
                                        std::size_t ef, std::size_t level) const;
    void insert(std::size_t id, std::size_t level);
    std::vector<std::size_t> select_neighbors(const std::vector<Candidate>& sorted, std::size_t cap) const;
    void shrink(std::size_t id, std::size_t level);

    std::vector<std::vector<float>> rows_;
    std::vector<std::vector<std::vector<std::size_t>>> links_;  // [node][level] -> neighbours
    AnnParams params_;
    std::size_t entry_ = 0;
    std::size_t max_level_ = 0;
};

}  // namespace igmirag
