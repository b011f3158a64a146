#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "igmirag/anchors.hpp"
#include "igmirag/hypergraph.hpp"

namespace igmirag::testkit {

inline std::filesystem::path fixture_dir() { return IGMIRAG_FIXTURE_DIR; }
inline std::filesystem::path cli_path() { return IGMIRAG_CLI_PATH; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("igmirag-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::vector<std::string> sample_distinct(std::mt19937_64& rng, const std::vector<std::string>& pool,
                                                std::size_t n) {
    std::vector<std::string> out;
    std::sample(pool.begin(), pool.end(), std::back_inserter(out), n, rng);
    return out;
}

struct GraphShape {
    std::size_t max_vertices = 200;
    std::size_t min_entities = 3;
    std::size_t chunks = 8;
    bool fixed_chunks = false;  // exactly `chunks` instead of 1..chunks
};

/// Random layered hypergraph: entities "e<i>", pair relations over two
/// distinct entities, associations over 3..5 entities. Every vertex cites
/// 1..3 chunks, so the provenance invariant holds.
inline Hypergraph random_graph(std::mt19937_64& rng, const GraphShape& shape = {}) {
    Hypergraph g;
    const std::size_t n_chunks =
        shape.fixed_chunks ? std::max<std::size_t>(1, shape.chunks) : uniform(rng, 1, std::max<std::size_t>(1, shape.chunks));
    std::vector<std::string> chunk_ids;
    for (std::size_t i = 0; i < n_chunks; ++i) {
        Chunk c;
        c.id = "doc#" + std::to_string(i);
        c.source_title = "doc";
        c.text = "chunk " + std::to_string(i) + ".";
        c.token_count = 3;
        g.upsert_chunk(c);
        chunk_ids.push_back(c.id);
    }
    auto cites = [&] {
        auto picked = sample_distinct(rng, chunk_ids, uniform(rng, 1, std::min<std::size_t>(3, n_chunks)));
        return std::set<std::string>(picked.begin(), picked.end());
    };

    const std::size_t total = uniform(rng, shape.min_entities + 2, shape.max_vertices);
    const std::size_t n_entities = std::max(shape.min_entities, total / 2 + uniform(rng, 0, total / 4));
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n_entities; ++i) {
        names.push_back("e" + std::to_string(i));
        g.upsert_vertex(make_entity(names.back(), "entity " + names.back(), {}, cites()));
    }
    std::size_t attempts = 0;
    while (g.vertex_count() < total && attempts++ < total * 4) {
        const bool pair = names.size() < 3 || uniform01(rng) < 0.6;
        const std::size_t k = pair ? 2 : uniform(rng, 3, std::min<std::size_t>(5, names.size()));
        auto members = sample_distinct(rng, names, k);
        const Layer layer = pair ? Layer::pair_relation : Layer::multi_association;
        g.upsert_vertex(make_relation(layer, members, "links " + std::to_string(attempts), {}, cites()));
    }
    return g;
}

/// Non-empty anchor map over existing vertices, scores in (0, 1].
inline ScoreMap random_anchors(std::mt19937_64& rng, const Hypergraph& g, std::size_t max_anchors = 12) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : g.vertices()) keys.push_back(k);
    ScoreMap anchors;
    for (const auto& k : sample_distinct(rng, keys, uniform(rng, 1, std::min(max_anchors, keys.size())))) {
        anchors[k] = 0.01 + 0.99 * uniform01(rng);
    }
    return anchors;
}

}  // namespace igmirag::testkit
