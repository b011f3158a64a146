#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "igmirag/hnsw.hpp"

using namespace igmirag;

namespace {

std::vector<float> unit_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    std::vector<float> v(dim);
    float norm = 0.0f;
    for (auto& x : v) {
        x = n(rng);
        norm += x * x;
    }
    for (auto& x : v) x /= std::sqrt(norm);
    return v;
}

std::vector<std::vector<float>> rows(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<float>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(unit_vector(rng, dim));
    return out;
}

}  // namespace

TEST(Hnsw, RecallAgainstBruteForce) {
    std::mt19937_64 rng(21);
    const auto data = rows(rng, 1500, 32);
    const HnswIndex index(data, AnnParams{});
    std::size_t found = 0;
    std::size_t wanted = 0;
    for (int q = 0; q < 100; ++q) {
        const auto query = unit_vector(rng, 32);
        std::vector<std::pair<float, std::size_t>> truth;
        for (std::size_t i = 0; i < data.size(); ++i) {
            float dot = 0.0f;
            for (std::size_t j = 0; j < 32; ++j) dot += data[i][j] * query[j];
            truth.emplace_back(-dot, i);
        }
        std::sort(truth.begin(), truth.end());
        std::set<std::size_t> top;
        for (std::size_t i = 0; i < 10; ++i) top.insert(truth[i].second);
        for (const auto& hit : index.search(query, 10)) found += top.count(hit.id);
        wanted += 10;
    }
    EXPECT_GE(static_cast<double>(found) / static_cast<double>(wanted), 0.95);
}

TEST(Hnsw, ExactSearchMatchesBruteForceOrdering) {
    std::mt19937_64 rng(22);
    const auto data = rows(rng, 200, 8);
    const HnswIndex index(data, AnnParams{});
    const auto query = unit_vector(rng, 8);
    const auto hits = index.exact_search(query, 200);
    ASSERT_EQ(hits.size(), 200u);
    for (std::size_t i = 1; i < hits.size(); ++i) {
        EXPECT_TRUE(hits[i - 1].similarity > hits[i].similarity ||
                    (hits[i - 1].similarity == hits[i].similarity && hits[i - 1].id < hits[i].id));
    }
}

TEST(Hnsw, SeededBuildsAreIdentical) {
    std::mt19937_64 rng(23);
    const auto data = rows(rng, 400, 16);
    const HnswIndex a(data, AnnParams{});
    const HnswIndex b(data, AnnParams{});
    EXPECT_EQ(a.max_level(), b.max_level());
    for (int q = 0; q < 20; ++q) {
        const auto query = unit_vector(rng, 16);
        const auto ha = a.search(query, 7);
        const auto hb = b.search(query, 7);
        ASSERT_EQ(ha.size(), hb.size());
        for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(ha[i].id, hb[i].id);
    }
}

TEST(Hnsw, SmallAndEmptyIndexes) {
    const HnswIndex empty;
    const std::vector<float> q{1.0f, 0.0f};
    EXPECT_TRUE(empty.search(q, 3).empty());
    const HnswIndex one({{0.0f, 1.0f}}, AnnParams{});
    const auto hits = one.search(q, 5);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].id, 0u);
}

TEST(Hnsw, OutlierAfterDenseClusterStaysReachable) {
    // Near-duplicate cluster, then one distant point inserted last.
    std::mt19937_64 rng(3);
    std::normal_distribution<float> noise(0.0F, 0.01F);
    std::vector<std::vector<float>> rows;
    for (int i = 0; i < 60; ++i) {
        std::vector<float> v(16, 0.0F);
        v[0] = 1.0F;
        for (auto& x : v) x += noise(rng);
        rows.push_back(v);
    }
    std::vector<float> outlier(16, 0.0F);
    outlier[1] = 1.0F;
    rows.push_back(outlier);
    for (auto& r : rows) {
        float n = 0.0F;
        for (float x : r) n += x * x;
        for (auto& x : r) x /= std::sqrt(n);
    }
    AnnParams p;
    p.m = 4;
    HnswIndex idx(rows, p);
    const auto hits = idx.search(rows.back(), 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].id, rows.size() - 1);
}
