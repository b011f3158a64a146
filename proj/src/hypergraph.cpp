#include "igmirag/hypergraph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "igmirag/error.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

constexpr std::string_view kKeyJoin = "\xE2\x8A\x95";  // ⊕
constexpr std::string_view kFormat = "igmirag.hhhg";
constexpr int kFormatVersion = 1;

const std::vector<std::string>& empty_list() {
    static const std::vector<std::string> kEmpty;
    return kEmpty;
}

std::string entity_name_from_key(std::string_view key) {
    if (key.size() < 2 || key.substr(0, 2) != "1|") {
        throw Error(ErrorCode::invariant_violation,
                    "member '" + std::string(key) + "' is not an entity key");
    }
    return std::string(key.substr(2));
}

void check_member_count(Layer layer, std::size_t n, const std::string& what) {
    switch (layer) {
        case Layer::entity:
            if (n != 0) throw Error(ErrorCode::invariant_violation, what + ": entity with members");
            break;
        case Layer::pair_relation:
            if (n != 2) {
                throw Error(ErrorCode::invariant_violation,
                            what + ": pair relation needs exactly 2 members, got " +
                                std::to_string(n));
            }
            break;
        case Layer::multi_association:
            if (n < 2) {
                throw Error(ErrorCode::invariant_violation,
                            what + ": association needs at least 2 members");
            }
            break;
    }
}

bool has_segment(const std::string& description, const std::string& segment) {
    std::size_t start = 0;
    while (start <= description.size()) {
        auto end = description.find('\n', start);
        if (end == std::string::npos) end = description.size();
        if (std::string_view(description).substr(start, end - start) == segment) return true;
        start = end + 1;
    }
    return false;
}

std::string relation_display_name(const std::vector<std::string>& display_names) {
    return "<" + text::join(display_names, ", ") + ">";
}

}  // namespace

Layer layer_from_code(int code) {
    if (code < 1 || code > 3) {
        throw Error(ErrorCode::invalid_argument, "layer code out of range: " + std::to_string(code));
    }
    return static_cast<Layer>(code);
}

std::string_view layer_label(Layer l) noexcept {
    switch (l) {
        case Layer::entity: return "Entities";
        case Layer::pair_relation: return "Pairwise Relations";
        case Layer::multi_association: return "Multiple Associations";
    }
    return "";
}

std::string normalize_name(std::string_view name) {
    return text::fold_case(text::trim(name));
}

std::string canonical_key(Layer layer, std::span<const std::string> names) {
    if (names.empty()) throw Error(ErrorCode::invalid_argument, "canonical_key: empty names");
    std::vector<std::string> norm;
    norm.reserve(names.size());
    for (const auto& n : names) {
        auto v = normalize_name(n);
        if (v.empty()) throw Error(ErrorCode::invalid_argument, "canonical_key: blank name");
        norm.push_back(std::move(v));
    }
    std::sort(norm.begin(), norm.end());
    if (layer != Layer::entity) {
        norm.erase(std::unique(norm.begin(), norm.end()), norm.end());
    }
    const bool ok = (layer == Layer::entity && norm.size() == 1) ||
                    (layer == Layer::pair_relation && norm.size() == 2) ||
                    (layer == Layer::multi_association && norm.size() >= 2);
    if (!ok) {
        throw Error(ErrorCode::invalid_argument,
                    "canonical_key: " + std::to_string(norm.size()) +
                        " distinct names for layer " + std::to_string(layer_code(layer)));
    }
    std::string key = std::to_string(layer_code(layer)) + "|";
    for (std::size_t i = 0; i < norm.size(); ++i) {
        if (i != 0) key += kKeyJoin;
        key += norm[i];
    }
    return key;
}

Vertex make_entity(std::string_view name, std::string description,
                   std::vector<std::string> attributes, std::set<std::string> chunk_ids) {
    const std::string display(text::trim(name));
    Vertex v;
    v.layer = Layer::entity;
    v.key = canonical_key(Layer::entity, std::span(&display, 1));
    v.name = display;
    v.description = std::move(description);
    v.attributes = std::move(attributes);
    v.chunk_ids = std::move(chunk_ids);
    return v;
}

Vertex make_relation(Layer layer, const std::vector<std::string>& member_names,
                     std::string description, std::vector<std::string> attributes,
                     std::set<std::string> chunk_ids) {
    if (layer == Layer::entity) {
        throw Error(ErrorCode::invalid_argument, "make_relation: layer must be 2 or 3");
    }
    Vertex v;
    v.layer = layer;
    v.key = canonical_key(layer, member_names);
    std::map<std::string, std::string> by_key;  // member key -> first display name
    for (const auto& n : member_names) {
        const std::string display(text::trim(n));
        by_key.emplace("1|" + normalize_name(display), display);
    }
    std::vector<std::string> displays;
    for (const auto& [k, d] : by_key) {
        v.members.push_back(k);
        displays.push_back(d);
    }
    v.name = relation_display_name(displays);
    v.description = std::move(description);
    v.attributes = std::move(attributes);
    v.chunk_ids = std::move(chunk_ids);
    return v;
}

std::string Hypergraph::upsert_vertex(Vertex v) {
    const std::string what = "upsert '" + v.key + "'";
    check_member_count(v.layer, v.members.size(), what);

    std::string expected;
    if (v.layer == Layer::entity) {
        if (text::trim(v.name).empty()) {
            throw Error(ErrorCode::invariant_violation, what + ": entity without name");
        }
        const std::string name(v.name);
        expected = canonical_key(Layer::entity, std::span(&name, 1));
    } else {
        std::vector<std::string> names;
        for (const auto& m : v.members) names.push_back(entity_name_from_key(m));
        std::sort(v.members.begin(), v.members.end());
        if (std::adjacent_find(v.members.begin(), v.members.end()) != v.members.end()) {
            throw Error(ErrorCode::invariant_violation, what + ": duplicate members");
        }
        expected = canonical_key(v.layer, names);
        std::vector<std::string> displays;
        for (const auto& m : v.members) {
            const auto* member = find_vertex(m);
            if (member == nullptr || member->layer != Layer::entity) {
                throw Error(ErrorCode::invariant_violation,
                            what + ": member '" + m + "' is not a stored entity");
            }
            displays.push_back(member->name);
        }
        if (v.name.empty()) v.name = relation_display_name(displays);
    }
    if (v.key.empty()) v.key = expected;
    if (v.key != expected) {
        throw Error(ErrorCode::invariant_violation,
                    what + ": key does not match canonical key '" + expected + "'");
    }

    auto it = vertices_.find(v.key);
    if (it == vertices_.end()) {
        for (const auto& m : v.members) {
            auto& inc = incident_[m];
            inc.insert(std::lower_bound(inc.begin(), inc.end(), v.key), v.key);
        }
        auto key = v.key;
        vertices_.emplace(key, std::move(v));
        return key;
    }

    Vertex& cur = it->second;
    if (cur.layer != v.layer) {
        throw Error(ErrorCode::invariant_violation, what + ": layer mismatch on merge");
    }
    if (!v.description.empty() && !has_segment(cur.description, v.description)) {
        cur.description = cur.description.empty() ? v.description
                                                  : cur.description + "\n" + v.description;
    }
    for (auto& a : v.attributes) {
        if (std::find(cur.attributes.begin(), cur.attributes.end(), a) == cur.attributes.end()) {
            cur.attributes.push_back(std::move(a));
        }
    }
    cur.chunk_ids.insert(v.chunk_ids.begin(), v.chunk_ids.end());
    return cur.key;
}

void Hypergraph::upsert_chunk(Chunk c) {
    auto it = chunks_.find(c.id);
    if (it == chunks_.end()) {
        auto id = c.id;
        chunks_.emplace(std::move(id), std::move(c));
        return;
    }
    for (auto& k : c.keywords) {
        auto& kw = it->second.keywords;
        if (std::find(kw.begin(), kw.end(), k) == kw.end()) kw.push_back(std::move(k));
    }
}

bool Hypergraph::contains(std::string_view key) const {
    return vertices_.find(key) != vertices_.end();
}

const Vertex* Hypergraph::find_vertex(std::string_view key) const {
    auto it = vertices_.find(key);
    return it == vertices_.end() ? nullptr : &it->second;
}

const Vertex& Hypergraph::vertex(std::string_view key) const {
    const auto* v = find_vertex(key);
    if (v == nullptr) throw Error(ErrorCode::not_found, "vertex '" + std::string(key) + "'");
    return *v;
}

bool Hypergraph::contains_chunk(std::string_view id) const {
    return chunks_.find(id) != chunks_.end();
}

const Chunk& Hypergraph::chunk(std::string_view id) const {
    auto it = chunks_.find(id);
    if (it == chunks_.end()) throw Error(ErrorCode::not_found, "chunk '" + std::string(id) + "'");
    return it->second;
}

const std::vector<std::string>& Hypergraph::layer_filtered_neighbors(std::string_view key,
                                                                     Direction dir) const {
    const Vertex& v = vertex(key);
    if (v.layer == Layer::entity) {
        if (dir == Direction::forward) return empty_list();
        auto it = incident_.find(key);
        return it == incident_.end() ? empty_list() : it->second;
    }
    return dir == Direction::forward ? v.members : empty_list();
}

Layer Hypergraph::vertex_layer(std::string_view key) const {
    return vertex(key).layer;
}

std::size_t Hypergraph::chunk_degree(std::string_view key) const {
    return vertex(key).chunk_ids.size();
}

std::size_t Hypergraph::count(Layer layer) const {
    return static_cast<std::size_t>(std::count_if(
        vertices_.begin(), vertices_.end(), [layer](const auto& kv) { return kv.second.layer == layer; }));
}

std::size_t Hypergraph::fr_edge_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : vertices_) n += v.chunk_ids.size();
    return n;
}

std::vector<std::pair<std::string, std::string>> Hypergraph::lr_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : vertices_) {
        if (v.layer != Layer::pair_relation) continue;
        for (const auto& m : v.members) out.emplace_back(k, m);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> Hypergraph::hr_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : vertices_) {
        if (v.layer != Layer::multi_association) continue;
        for (const auto& m : v.members) out.emplace_back(k, m);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> Hypergraph::fr_edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : vertices_) {
        for (const auto& c : v.chunk_ids) out.emplace_back(k, c);
    }
    return out;
}

std::vector<std::string> Hypergraph::vertices_of_chunk(std::string_view chunk_id) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : vertices_) {
        if (v.chunk_ids.find(std::string(chunk_id)) != v.chunk_ids.end()) out.push_back(k);
    }
    return out;
}

void Hypergraph::validate(bool require_provenance) const {
    std::map<std::string, std::vector<std::string>, std::less<>> incident;
    for (const auto& [key, v] : vertices_) {
        const std::string what = "vertex '" + key + "'";
        if (v.key != key) throw Error(ErrorCode::invariant_violation, what + ": key field mismatch");
        check_member_count(v.layer, v.members.size(), what);
        std::string expected;
        if (v.layer == Layer::entity) {
            expected = canonical_key(Layer::entity, std::span(&v.name, 1));
        } else {
            std::vector<std::string> names;
            for (const auto& m : v.members) {
                names.push_back(entity_name_from_key(m));
                const auto* member = find_vertex(m);
                if (member == nullptr || member->layer != Layer::entity) {
                    throw Error(ErrorCode::invariant_violation, what + ": dangling member " + m);
                }
                incident[m].push_back(key);
            }
            if (!std::is_sorted(v.members.begin(), v.members.end())) {
                throw Error(ErrorCode::invariant_violation, what + ": members not sorted");
            }
            expected = canonical_key(v.layer, names);
        }
        if (expected != key) throw Error(ErrorCode::invariant_violation, what + ": non-canonical key");
        if (require_provenance && v.chunk_ids.empty()) {
            throw Error(ErrorCode::invariant_violation, what + ": no source chunk");
        }
        for (const auto& c : v.chunk_ids) {
            if (!contains_chunk(c)) {
                throw Error(ErrorCode::invariant_violation, what + ": unknown chunk " + c);
            }
        }
    }
    for (const auto& [id, c] : chunks_) {
        if (c.id != id) throw Error(ErrorCode::invariant_violation, "chunk '" + id + "': id mismatch");
        if (c.token_count == 0) {
            throw Error(ErrorCode::invariant_violation, "chunk '" + id + "': zero tokens");
        }
    }
    for (auto& [k, list] : incident) std::sort(list.begin(), list.end());
    std::erase_if(incident, [](const auto& kv) { return kv.second.empty(); });
    auto stored = incident_;
    std::erase_if(stored, [](const auto& kv) { return kv.second.empty(); });
    if (stored != incident) {
        throw Error(ErrorCode::invariant_violation, "incidence index out of sync with members");
    }
}

nlohmann::json to_json(const Hypergraph& g) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& [id, c] : g.chunks()) {
        chunks.push_back({{"id", c.id},
                          {"source_title", c.source_title},
                          {"token_count", c.token_count},
                          {"keywords", c.keywords},
                          {"text", c.text}});
    }
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& [key, v] : g.vertices()) {
        vertices.push_back({{"key", v.key},
                            {"layer", layer_code(v.layer)},
                            {"name", v.name},
                            {"description", v.description},
                            {"attributes", v.attributes},
                            {"members", v.members},
                            {"chunk_ids", v.chunk_ids}});
    }
    return {{"format", kFormat},
            {"version", kFormatVersion},
            {"chunks", std::move(chunks)},
            {"vertices", std::move(vertices)}};
}

Hypergraph hypergraph_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kFormat) {
            throw Error(ErrorCode::corrupt_store, "unexpected format tag");
        }
        if (doc.at("version").get<int>() != kFormatVersion) {
            throw Error(ErrorCode::corrupt_store, "unsupported store version");
        }
        Hypergraph g;
        for (const auto& jc : doc.at("chunks")) {
            Chunk c;
            c.id = jc.at("id").get<std::string>();
            c.source_title = jc.at("source_title").get<std::string>();
            c.text = jc.at("text").get<std::string>();
            c.token_count = jc.at("token_count").get<std::size_t>();
            c.keywords = jc.at("keywords").get<std::vector<std::string>>();
            if (g.contains_chunk(c.id)) throw Error(ErrorCode::corrupt_store, "duplicate chunk " + c.id);
            g.upsert_chunk(std::move(c));
        }
        std::vector<Vertex> relations;
        std::set<std::string> seen;
        for (const auto& jv : doc.at("vertices")) {
            Vertex v;
            v.key = jv.at("key").get<std::string>();
            v.layer = layer_from_code(jv.at("layer").get<int>());
            v.name = jv.at("name").get<std::string>();
            v.description = jv.at("description").get<std::string>();
            v.attributes = jv.at("attributes").get<std::vector<std::string>>();
            v.members = jv.at("members").get<std::vector<std::string>>();
            v.chunk_ids = jv.at("chunk_ids").get<std::set<std::string>>();
            if (!seen.insert(v.key).second) {
                throw Error(ErrorCode::corrupt_store, "duplicate vertex " + v.key);
            }
            if (v.layer == Layer::entity) {
                g.upsert_vertex(std::move(v));
            } else {
                relations.push_back(std::move(v));
            }
        }
        for (auto& v : relations) g.upsert_vertex(std::move(v));
        g.validate(true);
        return g;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::corrupt_store) throw;
        throw Error(ErrorCode::corrupt_store, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_store, e.what());
    }
}

std::string serialize(const Hypergraph& g) {
    g.validate(true);
    return to_json(g).dump(1) + "\n";
}

Hypergraph deserialize_hypergraph(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_store, e.what());
    }
    return hypergraph_from_json(doc);
}

void save(const Hypergraph& g, const std::filesystem::path& path) {
    const auto data = serialize(g);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
    out << data;
}

Hypergraph load_hypergraph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "store file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_hypergraph(ss.str());
}

}  // namespace igmirag
