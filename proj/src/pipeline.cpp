#include "igmirag/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"

namespace igmirag {
namespace {

using json = nlohmann::json;

constexpr std::string_view kManifestFormat = "igmirag.store";

std::filesystem::path with_suffix(const std::filesystem::path& prefix, std::string_view suffix) {
    return std::filesystem::path(prefix.string() + std::string(suffix));
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
    out << content;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "store file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BuildStats stats_from_json(const json& j) {
    BuildStats s;
    s.entities = j.at("entities").get<std::size_t>();
    s.pairs = j.at("pairs").get<std::size_t>();
    s.associations = j.at("associations").get<std::size_t>();
    s.chunks = j.at("chunks").get<std::size_t>();
    s.corpus_tokens = j.at("corpus_tokens").get<std::size_t>();
    s.llm.prompt_tokens = j.at("llm_prompt_tokens").get<std::uint64_t>();
    s.llm.completion_tokens = j.at("llm_completion_tokens").get<std::uint64_t>();
    s.failed_chunks = j.at("failed_chunks").get<std::vector<std::string>>();
    return s;
}

TokenUsage delta(const TokenUsage& after, const TokenUsage& before) {
    return TokenUsage{after.prompt_tokens - before.prompt_tokens,
                      after.completion_tokens - before.completion_tokens};
}

}  // namespace

StorePaths store_paths(const std::filesystem::path& store) {
    std::string s = store.string();
    for (std::string_view ext : {".manifest.json", ".hhhg", ".dfidx"}) {
        if (s.size() > ext.size() && s.compare(s.size() - ext.size(), ext.size(), ext) == 0) {
            s.resize(s.size() - ext.size());
            break;
        }
    }
    const std::filesystem::path prefix(s);
    return StorePaths{with_suffix(prefix, ".hhhg"), with_suffix(prefix, ".dfidx"),
                      with_suffix(prefix, ".manifest.json")};
}

json to_json(const BuildStats& s) {
    return {{"entities", s.entities},
            {"pairs", s.pairs},
            {"associations", s.associations},
            {"chunks", s.chunks},
            {"corpus_tokens", s.corpus_tokens},
            {"llm_prompt_tokens", s.llm.prompt_tokens},
            {"llm_completion_tokens", s.llm.completion_tokens},
            {"failed_chunks", s.failed_chunks}};
}

void save_store(const BuiltIndex& built, const Config& config, const std::filesystem::path& prefix) {
    const auto paths = store_paths(prefix);
    if (paths.graph.has_parent_path()) std::filesystem::create_directories(paths.graph.parent_path());
    save(built.graph, paths.graph);
    save(built.df, paths.index);
    const json manifest{{"format", kManifestFormat},
                        {"version", 1},
                        {"config", to_json(config)},
                        {"stats", to_json(built.stats)}};
    write_text(paths.manifest, manifest.dump(1) + "\n");
}

Store load_store(const std::filesystem::path& store, const Config* config_override) {
    const auto paths = store_paths(store);
    Store s;
    json manifest;
    try {
        manifest = json::parse(read_text(paths.manifest));
        if (manifest.at("format").get<std::string>() != kManifestFormat) {
            throw Error(ErrorCode::corrupt_store, "not a store manifest");
        }
        s.stats = stats_from_json(manifest.at("stats"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_store, "manifest: " + std::string(e.what()));
    }
    s.config = config_override != nullptr
                   ? *config_override
                   : config_from_json(manifest.at("config"), paths.manifest.parent_path());
    s.graph = load_hypergraph(paths.graph);
    const AnnParams ann = s.config.build.ann;
    s.df = load_df_index(paths.index, &ann);
    for (const auto& [key, layer] : s.df.layers()) {
        if (!s.graph.contains(key)) throw Error(ErrorCode::corrupt_store, "index key not in graph: " + key);
    }
    s.lexical = LexicalIndex::build(s.graph, s.config.build.bm25);
    return s;
}

void run_query(const Store& store, std::string_view question, Gateway& gateway,
               const QueryOptions& options, QueryResult& out) {
    const auto before = gateway.ledger().totals();
    const auto& cfg = store.config;
    out = QueryResult{};
    out.question = std::string(question);
    try {
        out.strategy = parse_strategy(question, gateway, cfg.strategy_retries);
        out.retrieval = retrieve_anchors(out.strategy, store.df, store.lexical, gateway, cfg.retrieval);
        const auto& anchors = out.retrieval.anchors;
        out.budget = window_quotas(out.strategy.semantic_depth, cfg.window);
        if (!anchors.empty()) {
            out.initial_chunks = chunk_relevance(anchors, store.graph);
            if (options.diffusion) {
                out.diffusion = diffuse(anchors, out.strategy.target_layer, out.strategy.semantic_depth,
                                        store.graph, cfg.diffusion);
                out.extended = out.diffusion->scores;
                out.final_chunks = fuse_chunk_scores(out.initial_chunks, out.extended, store.graph,
                                                     cfg.window.fusion_w);
            } else {
                out.extended = anchors;
                out.final_chunks = out.initial_chunks;
            }
            out.unit_keys = select_units(anchors, out.extended, out.budget.top_ku);
            out.chunk_ids = select_chunks(out.final_chunks, out.budget.top_kc);
        } else {
            spdlog::warn("query: no anchors; answering with an empty context");
        }
        out.window = assemble(question, out.strategy, out.unit_keys, out.chunk_ids, store.graph, out.budget);
        out.answer = answer(question, out.window, gateway, options.mode.value_or(cfg.answer_mode));
    } catch (...) {
        out.usage = delta(gateway.ledger().totals(), before);
        throw;
    }
    out.usage = delta(gateway.ledger().totals(), before);
}

std::string trace_jsonl(const DiffusionResult& d) {
    std::string out;
    for (const auto& r : d.trace) out += to_json(r).dump() + "\n";
    return out;
}

}  // namespace igmirag
