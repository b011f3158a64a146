#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "igmirag/anchors.hpp"
#include "igmirag/config.hpp"
#include "igmirag/context.hpp"
#include "igmirag/df_index.hpp"
#include "igmirag/diffusion.hpp"
#include "igmirag/extraction.hpp"
#include "igmirag/hypergraph.hpp"
#include "igmirag/lexical_index.hpp"
#include "igmirag/strategy.hpp"

namespace igmirag {

/// A persisted store is three files sharing a prefix:
/// <prefix>.hhhg (graph), <prefix>.dfidx (embeddings), <prefix>.manifest.json
/// (config and build stats).
struct StorePaths {
    std::filesystem::path graph;
    std::filesystem::path index;
    std::filesystem::path manifest;
};

/// Accepts a bare prefix or any of the three file names.
StorePaths store_paths(const std::filesystem::path& store);

struct Store {
    Hypergraph graph;
    DFIndex df;
    LexicalIndex lexical;
    Config config;
    BuildStats stats;
};

nlohmann::json to_json(const BuildStats& s);

void save_store(const BuiltIndex& built, const Config& config, const std::filesystem::path& prefix);

/// The lexical index is rebuilt from the graph. `config_override` replaces the
/// manifest's configuration (the ANN graphs are rebuilt with its parameters).
Store load_store(const std::filesystem::path& store, const Config* config_override = nullptr);

struct QueryOptions {
    bool diffusion = true;
    std::optional<AnswerMode> mode;  // config default when unset
};

struct QueryResult {
    std::string question;
    Strategy strategy;
    AnchorResult retrieval;
    ChunkScores initial_chunks;
    std::optional<DiffusionResult> diffusion;
    ScoreMap extended;
    ChunkScores final_chunks;
    std::vector<std::string> unit_keys;
    std::vector<std::string> chunk_ids;
    WindowBudget budget;
    ContextWindow window;
    Answer answer;
    TokenUsage usage;  // every gateway call made for this query
};

/// Strategy -> anchors -> chunk relevance -> diffusion -> window -> answer.
/// `out` is filled stage by stage, so it holds the partial state when a stage throws.
void run_query(const Store& store, std::string_view question, Gateway& gateway,
               const QueryOptions& options, QueryResult& out);

/// Diffusion trace as JSON lines.
std::string trace_jsonl(const DiffusionResult& d);

}  // namespace igmirag
