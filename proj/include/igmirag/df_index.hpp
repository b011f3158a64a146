#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "igmirag/hnsw.hpp"
#include "igmirag/hypergraph.hpp"

namespace igmirag {

struct QuotaParams {
    int k_b = 12;
    int k_min = 5;
    int k_max = 20;

    bool operator==(const QuotaParams&) const = default;
};

struct Quotas {
    int global = 0;
    int local = 0;

    bool operator==(const Quotas&) const = default;
};

/// Dynamic global/local split of the vector-recall budget for matching score m:
///   global = min(ceil((1 - m/6) * k_b + k_min), k_max)
///   local  = floor(m/6 * k_b)
/// evaluated in exact integer arithmetic.
Quotas quotas(int m, int k_b, int k_min, int k_max);
inline Quotas quotas(int m, const QuotaParams& p) { return quotas(m, p.k_b, p.k_min, p.k_max); }

/// Unit-normalized description embeddings keyed by vertex key.
struct EmbeddingTable {
    std::size_t dim = 0;
    std::map<std::string, std::vector<float>> vectors;

    /// Normalizes `v` and inserts it; the first insert fixes `dim`.
    void insert(const std::string& key, std::vector<float> v);
    void validate() const;
    bool operator==(const EmbeddingTable&) const = default;
};

struct ScoredKey {
    std::string key;
    double score = 0.0;
};

/// Dual-focus index: one ANN graph over every vertex plus one per layer.
class DFIndex {
public:
    DFIndex() = default;

    static DFIndex build(EmbeddingTable table, const std::map<std::string, Layer>& layers,
                         const AnnParams& params);

    /// Global top-k_G followed by target-layer top-k_L, first occurrence wins.
    std::vector<std::string> search(std::span<const float> query, Layer target_layer, int m,
                                    const QuotaParams& quota_params) const;

    std::vector<ScoredKey> search_global(std::span<const float> query, std::size_t k) const;
    std::vector<ScoredKey> search_local(std::span<const float> query, Layer layer, std::size_t k) const;

    std::size_t size() const noexcept { return global_.keys.size(); }
    std::size_t local_size(Layer layer) const noexcept;
    std::size_t dim() const noexcept { return table_.dim; }
    const EmbeddingTable& table() const noexcept { return table_; }
    const std::map<std::string, Layer>& layers() const noexcept { return layers_; }
    const AnnParams& params() const noexcept { return params_; }

    nlohmann::json to_json() const;
    static DFIndex from_json(const nlohmann::json& doc, const AnnParams* override_params = nullptr);

private:
    struct Sub {
        std::vector<std::string> keys;
        HnswIndex ann;
    };

    std::vector<ScoredKey> run(const Sub& sub, std::span<const float> query, std::size_t k) const;
    void check_query(std::span<const float> query) const;

    EmbeddingTable table_;
    std::map<std::string, Layer> layers_;
    AnnParams params_;
    Sub global_;
    std::array<Sub, 3> local_;
};

void save(const DFIndex& index, const std::filesystem::path& path);
DFIndex load_df_index(const std::filesystem::path& path, const AnnParams* override_params = nullptr);

}  // namespace igmirag
