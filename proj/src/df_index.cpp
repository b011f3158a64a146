#include "igmirag/df_index.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "igmirag/error.hpp"

namespace igmirag {
namespace {

constexpr std::string_view kFormat = "igmirag.dfidx";
constexpr int kFormatVersion = 1;

}  // namespace

Quotas quotas(int m, int k_b, int k_min, int k_max) {
    if (m < 1 || m > 5) throw Error(ErrorCode::invalid_argument, "matching score must be in [1,5]");
    if (k_b < 1) throw Error(ErrorCode::invalid_argument, "k_b must be >= 1");
    if (k_min < 1 || k_max < 1 || k_min > k_max) {
        throw Error(ErrorCode::invalid_argument, "need 1 <= k_min <= k_max");
    }
    // (1 - m/6) * k_b + k_min == ((6 - m) * k_b + 6 * k_min) / 6, all terms nonnegative.
    const int num = (6 - m) * k_b + 6 * k_min;
    const int global = std::min((num + 5) / 6, k_max);
    const int local = (m * k_b) / 6;
    return Quotas{global, local};
}

void EmbeddingTable::insert(const std::string& key, std::vector<float> v) {
    if (v.empty()) throw Error(ErrorCode::invalid_argument, "empty embedding for " + key);
    if (dim == 0) dim = v.size();
    if (v.size() != dim) throw Error(ErrorCode::invalid_argument, "embedding dim mismatch for " + key);
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error(ErrorCode::invalid_argument, "zero embedding for " + key);
    for (auto& x : v) x = static_cast<float>(x / norm);
    vectors[key] = std::move(v);
}

void EmbeddingTable::validate() const {
    for (const auto& [key, v] : vectors) {
        if (v.size() != dim) throw Error(ErrorCode::invariant_violation, "dim mismatch for " + key);
        double norm = 0.0;
        for (float x : v) norm += static_cast<double>(x) * x;
        if (std::abs(std::sqrt(norm) - 1.0) > 1e-6) {
            throw Error(ErrorCode::invariant_violation, "non-unit embedding for " + key);
        }
    }
}

DFIndex DFIndex::build(EmbeddingTable table, const std::map<std::string, Layer>& layers,
                       const AnnParams& params) {
    if (table.vectors.empty()) throw Error(ErrorCode::build_failure, "df index: no vectors");
    table.validate();
    DFIndex idx;
    idx.params_ = params;
    std::vector<std::vector<float>> global_rows;
    std::array<std::vector<std::vector<float>>, 3> local_rows;
    for (const auto& [key, v] : table.vectors) {
        auto it = layers.find(key);
        if (it == layers.end()) throw Error(ErrorCode::build_failure, "df index: no layer for " + key);
        idx.layers_.emplace(key, it->second);
        idx.global_.keys.push_back(key);
        global_rows.push_back(v);
        const auto slot = static_cast<std::size_t>(layer_code(it->second) - 1);
        idx.local_[slot].keys.push_back(key);
        local_rows[slot].push_back(v);
    }
    idx.global_.ann = HnswIndex(std::move(global_rows), params);
    for (std::size_t i = 0; i < 3; ++i) {
        // Distinct seeds per layer keep the four graphs independent but reproducible.
        AnnParams p = params;
        p.seed = params.seed + i + 1;
        idx.local_[i].ann = HnswIndex(std::move(local_rows[i]), p);
    }
    idx.table_ = std::move(table);
    return idx;
}

std::size_t DFIndex::local_size(Layer layer) const noexcept {
    return local_[static_cast<std::size_t>(layer_code(layer) - 1)].keys.size();
}

void DFIndex::check_query(std::span<const float> query) const {
    if (query.size() != table_.dim) {
        throw Error(ErrorCode::invalid_argument,
                    "query dim " + std::to_string(query.size()) + " != index dim " +
                        std::to_string(table_.dim));
    }
}

std::vector<ScoredKey> DFIndex::run(const Sub& sub, std::span<const float> query, std::size_t k) const {
    std::vector<ScoredKey> out;
    for (const auto& hit : sub.ann.search(query, k)) out.push_back(ScoredKey{sub.keys[hit.id], hit.similarity});
    return out;
}

std::vector<ScoredKey> DFIndex::search_global(std::span<const float> query, std::size_t k) const {
    if (size() == 0) return {};
    check_query(query);
    return run(global_, query, k);
}

std::vector<ScoredKey> DFIndex::search_local(std::span<const float> query, Layer layer,
                                             std::size_t k) const {
    if (size() == 0) return {};
    check_query(query);
    return run(local_[static_cast<std::size_t>(layer_code(layer) - 1)], query, k);
}

std::vector<std::string> DFIndex::search(std::span<const float> query, Layer target_layer, int m,
                                         const QuotaParams& quota_params) const {
    const auto q = quotas(m, quota_params);
    if (size() == 0) return {};
    check_query(query);
    std::vector<std::string> ranking;
    std::set<std::string> seen;
    for (auto& hit : search_global(query, static_cast<std::size_t>(q.global))) {
        if (seen.insert(hit.key).second) ranking.push_back(std::move(hit.key));
    }
    for (auto& hit : search_local(query, target_layer, static_cast<std::size_t>(q.local))) {
        if (seen.insert(hit.key).second) ranking.push_back(std::move(hit.key));
    }
    return ranking;
}

nlohmann::json DFIndex::to_json() const {
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& [key, v] : table_.vectors) {
        vectors.push_back({{"key", key}, {"layer", layer_code(layers_.at(key))}, {"v", v}});
    }
    return {{"format", kFormat},
            {"version", kFormatVersion},
            {"dim", table_.dim},
            {"ann",
             {{"m", params_.m},
              {"ef_construction", params_.ef_construction},
              {"ef_search", params_.ef_search},
              {"seed", params_.seed},
              {"exact", params_.exact}}},
            {"vectors", std::move(vectors)}};
}

DFIndex DFIndex::from_json(const nlohmann::json& doc, const AnnParams* override_params) {
    try {
        if (doc.at("format").get<std::string>() != kFormat ||
            doc.at("version").get<int>() != kFormatVersion) {
            throw Error(ErrorCode::corrupt_store, "not a version-1 dfidx document");
        }
        AnnParams p;
        const auto& ann = doc.at("ann");
        p.m = ann.at("m").get<std::size_t>();
        p.ef_construction = ann.at("ef_construction").get<std::size_t>();
        p.ef_search = ann.at("ef_search").get<std::size_t>();
        p.seed = ann.at("seed").get<std::uint64_t>();
        p.exact = ann.at("exact").get<bool>();
        if (override_params != nullptr) p = *override_params;
        EmbeddingTable table;
        table.dim = doc.at("dim").get<std::size_t>();
        std::map<std::string, Layer> layers;
        for (const auto& jv : doc.at("vectors")) {
            const auto key = jv.at("key").get<std::string>();
            auto v = jv.at("v").get<std::vector<float>>();
            if (v.size() != table.dim) throw Error(ErrorCode::corrupt_store, "dim mismatch for " + key);
            table.vectors[key] = std::move(v);
            layers[key] = layer_from_code(jv.at("layer").get<int>());
        }
        return build(std::move(table), layers, p);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_store, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::corrupt_store) throw;
        throw Error(ErrorCode::corrupt_store, e.what());
    }
}

void save(const DFIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
    out << index.to_json().dump() << "\n";
}

DFIndex load_df_index(const std::filesystem::path& path, const AnnParams* override_params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "index file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::corrupt_store, e.what());
    }
    return DFIndex::from_json(doc, override_params);
}

}  // namespace igmirag
