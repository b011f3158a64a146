#include "igmirag/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "igmirag/error.hpp"

namespace igmirag {
namespace {

using json = nlohmann::json;

void check_keys(const json& section, std::string_view name, std::initializer_list<std::string_view> allowed) {
    if (!section.is_object()) {
        throw Error(ErrorCode::invalid_argument, "config section '" + std::string(name) + "' must be an object");
    }
    for (const auto& [k, v] : section.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) throw Error(ErrorCode::invalid_argument, "unknown config key " + std::string(name) + "." + k);
    }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
    if (auto it = section.find(key); it != section.end()) out = it->get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

void read_gateway(const json& s, std::string_view name, const std::filesystem::path& base, GatewayConfig& g) {
    check_keys(s, name,
               {"mode", "endpoint", "chat_model", "embed_model", "temperature", "timeout_seconds",
                "retries", "retry_backoff_ms", "max_in_flight", "api_key_env", "cassette",
                "record_path", "stub_rules", "stub_fallback", "stub_embedding_dim"});
    if (s.contains("mode")) g.mode = gateway_mode_from_string(s.at("mode").get<std::string>());
    read(s, "endpoint", g.endpoint);
    read(s, "chat_model", g.chat_model);
    read(s, "embed_model", g.embed_model);
    read(s, "temperature", g.temperature);
    read(s, "timeout_seconds", g.timeout_seconds);
    read(s, "retries", g.retries);
    read(s, "retry_backoff_ms", g.retry_backoff_ms);
    read(s, "max_in_flight", g.max_in_flight);
    read(s, "api_key_env", g.api_key_env);
    read(s, "stub_embedding_dim", g.stub_embedding_dim);
    if (s.contains("cassette")) g.cassette = resolve(base, s.at("cassette").get<std::string>());
    if (s.contains("record_path")) g.record_path = resolve(base, s.at("record_path").get<std::string>());
    if (s.contains("stub_rules")) g.stub_rules = resolve(base, s.at("stub_rules").get<std::string>());
    if (s.contains("stub_fallback")) {
        const auto f = s.at("stub_fallback").get<std::string>();
        if (f == "empty_json") g.stub_fallback = StubFallback::empty_json;
        else if (f == "echo") g.stub_fallback = StubFallback::echo;
        else if (f == "error") g.stub_fallback = StubFallback::error;
        else throw Error(ErrorCode::invalid_argument, "unknown stub_fallback '" + f + "'");
    }
}

std::string_view fallback_name(StubFallback f) {
    switch (f) {
        case StubFallback::empty_json: return "empty_json";
        case StubFallback::echo: return "echo";
        case StubFallback::error: return "error";
    }
    return "";
}

json gateway_json(const GatewayConfig& g) {
    return {{"mode", to_string(g.mode)},
            {"endpoint", g.endpoint},
            {"chat_model", g.chat_model},
            {"embed_model", g.embed_model},
            {"temperature", g.temperature},
            {"timeout_seconds", g.timeout_seconds},
            {"retries", g.retries},
            {"retry_backoff_ms", g.retry_backoff_ms},
            {"max_in_flight", g.max_in_flight},
            {"api_key_env", g.api_key_env},
            {"cassette", g.cassette.string()},
            {"record_path", g.record_path.string()},
            {"stub_rules", g.stub_rules.string()},
            {"stub_fallback", fallback_name(g.stub_fallback)},
            {"stub_embedding_dim", g.stub_embedding_dim}};
}

}  // namespace

Config config_from_json(const json& doc, const std::filesystem::path& base_dir) {
    Config c;
    try {
        check_keys(doc, "<root>",
                   {"chunking", "extraction", "quotas", "ann", "bm25", "rrf", "diffusion", "window",
                    "answer", "strategy", "gateway", "judge"});
        if (doc.contains("chunking")) {
            const auto& s = doc.at("chunking");
            check_keys(s, "chunking", {"chunk_tokens"});
            read(s, "chunk_tokens", c.build.chunk_tokens);
        }
        if (doc.contains("extraction")) {
            const auto& s = doc.at("extraction");
            check_keys(s, "extraction", {"parallelism", "max_retries"});
            read(s, "parallelism", c.build.parallelism);
            read(s, "max_retries", c.build.max_retries);
        }
        if (doc.contains("quotas")) {
            const auto& s = doc.at("quotas");
            check_keys(s, "quotas", {"k_b", "k_min", "k_max"});
            read(s, "k_b", c.retrieval.quotas.k_b);
            read(s, "k_min", c.retrieval.quotas.k_min);
            read(s, "k_max", c.retrieval.quotas.k_max);
        }
        if (doc.contains("ann")) {
            const auto& s = doc.at("ann");
            check_keys(s, "ann", {"m", "ef_construction", "ef_search", "seed", "exact"});
            read(s, "m", c.build.ann.m);
            read(s, "ef_construction", c.build.ann.ef_construction);
            read(s, "ef_search", c.build.ann.ef_search);
            read(s, "seed", c.build.ann.seed);
            read(s, "exact", c.build.ann.exact);
        }
        if (doc.contains("bm25")) {
            const auto& s = doc.at("bm25");
            check_keys(s, "bm25", {"k1", "b"});
            read(s, "k1", c.build.bm25.k1);
            read(s, "b", c.build.bm25.b);
        }
        if (doc.contains("rrf")) {
            const auto& s = doc.at("rrf");
            check_keys(s, "rrf", {"k0"});
            read(s, "k0", c.retrieval.rrf_k0);
        }
        if (doc.contains("diffusion")) {
            const auto& s = doc.at("diffusion");
            check_keys(s, "diffusion",
                       {"gamma", "tau_L", "tau_H", "bias_cap", "forward_stall_step",
                        "backward_relief_step", "backward_stall_step", "target_layer_bonus",
                        "max_total_iterations_factor"});
            auto& d = c.diffusion;
            read(s, "gamma", d.gamma);
            read(s, "tau_L", d.tau_L);
            read(s, "tau_H", d.tau_H);
            read(s, "bias_cap", d.bias_cap);
            read(s, "forward_stall_step", d.forward_stall_step);
            read(s, "backward_relief_step", d.backward_relief_step);
            read(s, "backward_stall_step", d.backward_stall_step);
            read(s, "target_layer_bonus", d.target_layer_bonus);
            read(s, "max_total_iterations_factor", d.max_total_iterations_factor);
        }
        if (doc.contains("window")) {
            const auto& s = doc.at("window");
            check_keys(s, "window", {"k_u", "k_c", "fusion_w"});
            read(s, "k_u", c.window.k_u);
            read(s, "k_c", c.window.k_c);
            read(s, "fusion_w", c.window.fusion_w);
        }
        if (doc.contains("answer")) {
            const auto& s = doc.at("answer");
            check_keys(s, "answer", {"mode"});
            if (s.contains("mode")) c.answer_mode = answer_mode_from_string(s.at("mode").get<std::string>());
        }
        if (doc.contains("strategy")) {
            const auto& s = doc.at("strategy");
            check_keys(s, "strategy", {"max_retries"});
            read(s, "max_retries", c.strategy_retries);
        }
        if (doc.contains("gateway")) read_gateway(doc.at("gateway"), "gateway", base_dir, c.gateway);
        c.judge = c.gateway;
        c.judge.record_path.clear();
        if (doc.contains("judge")) read_gateway(doc.at("judge"), "judge", base_dir, c.judge);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("config: ") + e.what());
    }
    c.diffusion.validate();
    c.gateway.validate();
    c.judge.validate();
    if (c.build.chunk_tokens == 0) throw Error(ErrorCode::invalid_argument, "chunk_tokens must be > 0");
    if (c.window.fusion_w < 0.0 || c.window.fusion_w > 1.0) {
        throw Error(ErrorCode::invalid_argument, "window.fusion_w must be in [0,1]");
    }
    return c;
}

json to_json(const Config& c) {
    const auto& d = c.diffusion;
    return {{"chunking", {{"chunk_tokens", c.build.chunk_tokens}}},
            {"extraction", {{"parallelism", c.build.parallelism}, {"max_retries", c.build.max_retries}}},
            {"quotas",
             {{"k_b", c.retrieval.quotas.k_b},
              {"k_min", c.retrieval.quotas.k_min},
              {"k_max", c.retrieval.quotas.k_max}}},
            {"ann",
             {{"m", c.build.ann.m},
              {"ef_construction", c.build.ann.ef_construction},
              {"ef_search", c.build.ann.ef_search},
              {"seed", c.build.ann.seed},
              {"exact", c.build.ann.exact}}},
            {"bm25", {{"k1", c.build.bm25.k1}, {"b", c.build.bm25.b}}},
            {"rrf", {{"k0", c.retrieval.rrf_k0}}},
            {"diffusion",
             {{"gamma", d.gamma},
              {"tau_L", d.tau_L},
              {"tau_H", d.tau_H},
              {"bias_cap", d.bias_cap},
              {"forward_stall_step", d.forward_stall_step},
              {"backward_relief_step", d.backward_relief_step},
              {"backward_stall_step", d.backward_stall_step},
              {"target_layer_bonus", d.target_layer_bonus},
              {"max_total_iterations_factor", d.max_total_iterations_factor}}},
            {"window", {{"k_u", c.window.k_u}, {"k_c", c.window.k_c}, {"fusion_w", c.window.fusion_w}}},
            {"answer", {{"mode", to_string(c.answer_mode)}}},
            {"strategy", {{"max_retries", c.strategy_retries}}},
            {"gateway", gateway_json(c.gateway)},
            {"judge", gateway_json(c.judge)}};
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::not_found, "config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, "config " + path.string() + ": " + e.what());
    }
    return config_from_json(doc, std::filesystem::absolute(path).parent_path());
}

}  // namespace igmirag
