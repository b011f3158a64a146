#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "igmirag/anchors.hpp"
#include "igmirag/context.hpp"
#include "igmirag/diffusion.hpp"
#include "igmirag/extraction.hpp"
#include "igmirag/gateway.hpp"

namespace igmirag {

/// Every tunable with its default. Sections: chunking, extraction, quotas,
/// ann, bm25, rrf, diffusion, window, answer, strategy, gateway, judge.
struct Config {
    BuildParams build;
    RetrievalParams retrieval;
    DiffusionParams diffusion;
    WindowParams window;
    AnswerMode answer_mode = AnswerMode::brief;
    int strategy_retries = 2;
    GatewayConfig gateway;
    GatewayConfig judge;  // gateway fields overridden by the "judge" section
};

/// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
Config config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
nlohmann::json to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

}  // namespace igmirag
