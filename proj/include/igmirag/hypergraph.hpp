#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace igmirag {

/// Knowledge layers. Integer codes match the target-layer range emitted by
/// the strategy parser.
enum class Layer : int {
    entity = 1,
    pair_relation = 2,
    multi_association = 3,
};

inline constexpr int layer_code(Layer l) noexcept { return static_cast<int>(l); }
Layer layer_from_code(int code);
std::string_view layer_label(Layer l) noexcept;

enum class Direction { forward, backward };

struct Vertex {
    std::string key;
    Layer layer = Layer::entity;
    std::string name;
    std::string description;
    std::vector<std::string> attributes;
    std::vector<std::string> members;  // entity keys, sorted
    std::set<std::string> chunk_ids;

    bool operator==(const Vertex&) const = default;
};

struct Chunk {
    std::string id;
    std::string source_title;
    std::string text;
    std::size_t token_count = 0;
    std::vector<std::string> keywords;

    bool operator==(const Chunk&) const = default;
};

/// Case-fold + trim. Aliases are deliberately not merged here.
std::string normalize_name(std::string_view name);

/// "<layer>|" + normalized names sorted and joined by U+2295.
std::string canonical_key(Layer layer, std::span<const std::string> names);

/// Builders that fill in key and member keys from display names.
Vertex make_entity(std::string_view name, std::string description,
                   std::vector<std::string> attributes = {}, std::set<std::string> chunk_ids = {});
Vertex make_relation(Layer layer, const std::vector<std::string>& member_names,
                     std::string description, std::vector<std::string> attributes = {},
                     std::set<std::string> chunk_ids = {});

/// Hierarchical heterogeneous hypergraph. LR/HR incidence is derived from the
/// member lists of layer-2/3 vertices; FR incidence from vertex chunk_ids.
/// Single writer while indexing, immutable afterwards.
class Hypergraph {
public:
    std::string upsert_vertex(Vertex v);
    void upsert_chunk(Chunk c);

    bool contains(std::string_view key) const;
    const Vertex& vertex(std::string_view key) const;
    const Vertex* find_vertex(std::string_view key) const;
    bool contains_chunk(std::string_view id) const;
    const Chunk& chunk(std::string_view id) const;

    /// forward: layer-2/3 vertex -> its members; backward: entity -> incident
    /// layer-2/3 vertices. Empty otherwise. Sorted by key.
    const std::vector<std::string>& layer_filtered_neighbors(std::string_view key,
                                                             Direction dir) const;
    Layer vertex_layer(std::string_view key) const;
    std::size_t chunk_degree(std::string_view key) const;

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t count(Layer layer) const;
    std::size_t chunk_count() const noexcept { return chunks_.size(); }
    std::size_t fr_edge_count() const;

    const std::map<std::string, Vertex, std::less<>>& vertices() const noexcept {
        return vertices_;
    }
    const std::map<std::string, Chunk, std::less<>>& chunks() const noexcept { return chunks_; }

    std::vector<std::pair<std::string, std::string>> lr_edges() const;
    std::vector<std::pair<std::string, std::string>> hr_edges() const;
    std::vector<std::pair<std::string, std::string>> fr_edges() const;
    std::vector<std::string> vertices_of_chunk(std::string_view chunk_id) const;

    /// Throws invariant_violation. With `require_provenance`, every vertex must
    /// reference at least one stored chunk.
    void validate(bool require_provenance = true) const;

    bool operator==(const Hypergraph& other) const {
        return vertices_ == other.vertices_ && chunks_ == other.chunks_;
    }

private:
    std::map<std::string, Vertex, std::less<>> vertices_;
    std::map<std::string, Chunk, std::less<>> chunks_;
    std::map<std::string, std::vector<std::string>, std::less<>> incident_;
};

nlohmann::json to_json(const Hypergraph& g);
Hypergraph hypergraph_from_json(const nlohmann::json& doc);

std::string serialize(const Hypergraph& g);
Hypergraph deserialize_hypergraph(std::string_view text);

void save(const Hypergraph& g, const std::filesystem::path& path);
Hypergraph load_hypergraph(const std::filesystem::path& path);

}  // namespace igmirag
