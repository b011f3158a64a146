#include "igmirag/gateway.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

using nlohmann::json;

json messages_json(std::span<const ChatMessage> messages) {
    json arr = json::array();
    for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
    return arr;
}

TokenUsage approx_usage(std::span<const ChatMessage> messages, std::string_view reply) {
    TokenUsage u;
    for (const auto& m : messages) u.prompt_tokens += text::count_tokens(m.content);
    u.completion_tokens = text::count_tokens(reply);
    return u;
}

const ChatMessage* last_user(std::span<const ChatMessage> messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == "user") return &*it;
    }
    return nullptr;
}

void normalize_in_place(std::vector<float>& v) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        throw Error(ErrorCode::gateway_error, "embedding service returned a zero vector");
    }
    for (auto& x : v) x = static_cast<float>(x / norm);
}

struct Endpoint {
    std::string host;    // scheme://host[:port]
    std::string prefix;  // optional path prefix without trailing '/'
};

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    Endpoint e;
    if (path_start == std::string::npos) {
        e.host = url;
    } else {
        e.host = url.substr(0, path_start);
        e.prefix = url.substr(path_start);
        while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    }
    return e;
}

}  // namespace

GatewayMode gateway_mode_from_string(std::string_view s) {
    if (s == "live") return GatewayMode::live;
    if (s == "stub") return GatewayMode::stub;
    if (s == "record") return GatewayMode::record;
    if (s == "replay") return GatewayMode::replay;
    throw Error(ErrorCode::invalid_argument, "unknown gateway mode '" + std::string(s) + "'");
}

std::string_view to_string(GatewayMode m) noexcept {
    switch (m) {
        case GatewayMode::live: return "live";
        case GatewayMode::stub: return "stub";
        case GatewayMode::record: return "record";
        case GatewayMode::replay: return "replay";
    }
    return "";
}

void GatewayConfig::validate() const {
    if (temperature < 0.0) throw Error(ErrorCode::invalid_argument, "temperature must be >= 0");
    if (retries < 0 || retries > 5) throw Error(ErrorCode::invalid_argument, "retries must be in [0,5]");
    if (max_in_flight == 0) throw Error(ErrorCode::invalid_argument, "max_in_flight must be > 0");
    if (mode == GatewayMode::replay && cassette.empty()) {
        throw Error(ErrorCode::invalid_argument, "replay mode needs a cassette");
    }
    if (mode == GatewayMode::record && record_path.empty()) {
        throw Error(ErrorCode::invalid_argument, "record mode needs record_path");
    }
}

void TokenLedger::record(std::string_view tag, const TokenUsage& usage) {
    std::lock_guard lock(mu_);
    for (auto& e : entries_) {
        if (e.tag == tag) {
            e.usage += usage;
            ++e.calls;
            return;
        }
    }
    entries_.push_back(Entry{std::string(tag), usage, 1});
}

TokenUsage TokenLedger::totals() const {
    std::lock_guard lock(mu_);
    TokenUsage t;
    for (const auto& e : entries_) t += e.usage;
    return t;
}

TokenUsage TokenLedger::usage_for(std::string_view tag) const {
    std::lock_guard lock(mu_);
    for (const auto& e : entries_) {
        if (e.tag == tag) return e.usage;
    }
    return {};
}

std::vector<TokenLedger::Entry> TokenLedger::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t TokenLedger::calls() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.calls;
    return n;
}

std::vector<float> hashing_embedding(std::string_view input, std::size_t dim) {
    if (dim == 0) throw Error(ErrorCode::invalid_argument, "embedding dim must be > 0");
    std::vector<double> acc(dim, 0.0);
    auto add = [&](std::string_view feature, double weight) {
        const auto h = text::fnv1a64(feature);
        const double sign = ((h >> 32) & 1U) != 0 ? 1.0 : -1.0;
        acc[h % dim] += sign * weight;
    };
    for (const auto& term : text::lexical_terms(input)) {
        add(term, 1.0);
        const std::string padded = "#" + term + "#";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            add(std::string_view(padded).substr(i, 3), 0.5);
        }
    }
    double norm = 0.0;
    for (double x : acc) norm += x * x;
    std::vector<float> out(dim, 0.0F);
    if (norm == 0.0) {
        out[0] = 1.0F;
        return out;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

std::string chat_request_key(std::string_view model, double temperature,
                             std::span<const ChatMessage> messages) {
    const json req = {{"model", model}, {"temperature", temperature}, {"messages", messages_json(messages)}};
    return text::hex64(text::fnv1a64(req.dump()));
}

std::string embed_request_key(std::string_view model, std::string_view input) {
    const json req = {{"model", model}, {"input", input}};
    return text::hex64(text::fnv1a64(req.dump()));
}

std::vector<StubRule> load_stub_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::not_found, "stub rules " + path.string());
    std::vector<StubRule> rules;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            StubRule r;
            r.all_of = j.value("all_of", std::vector<std::string>{});
            r.last = j.value("last", std::string{});
            r.reply = j.at("reply").get<std::string>();
            rules.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::invalid_argument,
                        path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rules;
}

struct Gateway::Impl {
    std::mutex mu;
    std::map<std::string, std::string> fixtures;
    std::vector<StubRule> rules;
    std::map<std::string, ChatResult> cassette_chat;
    std::map<std::string, std::vector<float>> cassette_embed;
    std::mutex record_mu;
    std::counting_semaphore<1024> in_flight;

    explicit Impl(std::size_t width)
        : in_flight(static_cast<std::ptrdiff_t>(std::min<std::size_t>(width, 1024))) {}
};

Gateway::Gateway(GatewayConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_.max_in_flight)) {
    config_.validate();
    if (!config_.stub_rules.empty()) impl_->rules = load_stub_rules(config_.stub_rules);
    if (config_.mode == GatewayMode::replay) {
        std::ifstream in(config_.cassette);
        if (!in) throw Error(ErrorCode::fixture_missing, "cassette " + config_.cassette.string());
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw Error(ErrorCode::fixture_missing, "corrupt cassette line: " + std::string(e.what()));
            }
            const auto kind = j.value("kind", std::string("chat"));
            if (kind == "chat") {
                const auto& r = j.at("response");
                impl_->cassette_chat[j.at("key").get<std::string>()] =
                    ChatResult{r.at("text").get<std::string>(),
                               TokenUsage{r.value("prompt_tokens", std::uint64_t{0}),
                                          r.value("completion_tokens", std::uint64_t{0})}};
            } else if (kind == "embed") {
                impl_->cassette_embed[j.at("key").get<std::string>()] =
                    j.at("vector").get<std::vector<float>>();
            }
        }
    }
}

Gateway::~Gateway() = default;

void Gateway::register_fixture(std::span<const ChatMessage> messages, std::string reply) {
    const auto key = chat_request_key(config_.chat_model, config_.temperature, messages);
    std::lock_guard lock(impl_->mu);
    impl_->fixtures[key] = std::move(reply);
}

void Gateway::add_rule(StubRule rule) {
    std::lock_guard lock(impl_->mu);
    impl_->rules.push_back(std::move(rule));
}

ChatResult Gateway::chat(std::span<const ChatMessage> messages, const ChatOptions& options) {
    if (messages.empty()) throw Error(ErrorCode::invalid_argument, "chat: no messages");
    const double temperature = options.temperature.value_or(config_.temperature);
    const auto key = chat_request_key(config_.chat_model, temperature, messages);

    ChatResult result;
    switch (config_.mode) {
        case GatewayMode::stub: result = chat_stub(messages, key); break;
        case GatewayMode::replay: result = chat_replay(key); break;
        case GatewayMode::live:
        case GatewayMode::record: result = chat_live(messages, temperature); break;
    }
    ledger_.record(options.ledger_tag, result.usage);
    if (!config_.record_path.empty()) {
        append_record({{"kind", "chat"},
                       {"key", key},
                       {"request",
                        {{"model", config_.chat_model},
                         {"temperature", temperature},
                         {"messages", messages_json(messages)}}},
                       {"response",
                        {{"text", result.text},
                         {"prompt_tokens", result.usage.prompt_tokens},
                         {"completion_tokens", result.usage.completion_tokens}}}});
    }
    return result;
}

ChatResult Gateway::chat_stub(std::span<const ChatMessage> messages, const std::string& key) {
    std::string reply;
    bool matched = false;
    {
        std::lock_guard lock(impl_->mu);
        if (auto it = impl_->fixtures.find(key); it != impl_->fixtures.end()) {
            reply = it->second;
            matched = true;
        } else {
            const auto* last = last_user(messages);
            for (const auto& rule : impl_->rules) {
                bool ok = last != nullptr && last->content.find(rule.last) != std::string::npos;
                for (const auto& needle : rule.all_of) {
                    if (!ok) break;
                    ok = std::any_of(messages.begin(), messages.end(), [&](const ChatMessage& m) {
                        return m.content.find(needle) != std::string::npos;
                    });
                }
                if (ok) {
                    reply = rule.reply;
                    matched = true;
                    break;
                }
            }
        }
    }
    if (!matched) {
        switch (config_.stub_fallback) {
            case StubFallback::empty_json: reply = "{}"; break;
            case StubFallback::echo: {
                const auto* last = last_user(messages);
                reply = last != nullptr ? last->content : std::string{};
                break;
            }
            case StubFallback::error:
                throw Error(ErrorCode::fixture_missing, "no stub fixture for request " + key);
        }
    }
    return ChatResult{reply, approx_usage(messages, reply)};
}

ChatResult Gateway::chat_replay(const std::string& key) {
    auto it = impl_->cassette_chat.find(key);
    if (it == impl_->cassette_chat.end()) {
        throw Error(ErrorCode::fixture_missing, "cassette has no chat entry " + key);
    }
    return it->second;
}

ChatResult Gateway::chat_live(std::span<const ChatMessage> messages, double temperature) {
    const json body = {{"model", config_.chat_model},
                       {"temperature", temperature},
                       {"messages", messages_json(messages)}};
    const auto ep = parse_endpoint(config_.endpoint);
    const char* key_env = std::getenv(config_.api_key_env.c_str());
    const std::string api_key = key_env != nullptr ? key_env : "";

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{impl_->in_flight};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms * attempt));
        }
        httplib::Client cli(ep.host);
        const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = cli.Post(ep.prefix + "/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            if (res->status == 400 || res->status == 401 || res->status == 403 || res->status == 404) break;
            continue;
        }
        try {
            const auto j = json::parse(res->body);
            ChatResult r;
            r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (j.contains("usage")) {
                r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
                r.usage.completion_tokens = j["usage"].value("completion_tokens", std::uint64_t{0});
            } else {
                r.usage = approx_usage(messages, r.text);
            }
            return r;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw Error(ErrorCode::gateway_error, "chat failed: " + last_error);
}

std::vector<std::vector<float>> Gateway::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw Error(ErrorCode::invalid_argument, "embed: no texts");
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    switch (config_.mode) {
        case GatewayMode::stub:
            for (const auto& t : texts) out.push_back(hashing_embedding(t, config_.stub_embedding_dim));
            return out;
        case GatewayMode::replay:
            if (impl_->cassette_embed.empty()) {
                for (const auto& t : texts) out.push_back(hashing_embedding(t, config_.stub_embedding_dim));
                return out;
            }
            for (const auto& t : texts) {
                auto it = impl_->cassette_embed.find(embed_request_key(config_.embed_model, t));
                if (it == impl_->cassette_embed.end()) {
                    throw Error(ErrorCode::fixture_missing, "cassette has no embedding for '" + t + "'");
                }
                out.push_back(it->second);
            }
            return out;
        case GatewayMode::live:
        case GatewayMode::record:
            out = embed_live(texts);
            if (!config_.record_path.empty()) {
                for (std::size_t i = 0; i < texts.size(); ++i) {
                    append_record({{"kind", "embed"},
                                   {"key", embed_request_key(config_.embed_model, texts[i])},
                                   {"model", config_.embed_model},
                                   {"text", texts[i]},
                                   {"vector", out[i]}});
                }
            }
            return out;
    }
    return out;
}

std::vector<std::vector<float>> Gateway::embed_live(std::span<const std::string> texts) {
    const json body = {{"model", config_.embed_model},
                       {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto ep = parse_endpoint(config_.endpoint);
    const char* key_env = std::getenv(config_.api_key_env.c_str());
    const std::string api_key = key_env != nullptr ? key_env : "";

    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{impl_->in_flight};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms * attempt));
        }
        httplib::Client cli(ep.host);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = cli.Post(ep.prefix + "/v1/embeddings", headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            const auto j = json::parse(res->body);
            std::vector<std::vector<float>> out(texts.size());
            for (const auto& item : j.at("data")) {
                const auto idx = item.value("index", std::size_t{0});
                if (idx >= out.size()) throw Error(ErrorCode::gateway_error, "embedding index out of range");
                out[idx] = item.at("embedding").get<std::vector<float>>();
                normalize_in_place(out[idx]);
            }
            for (const auto& v : out) {
                if (v.empty()) throw Error(ErrorCode::gateway_error, "missing embedding in response");
            }
            return out;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw Error(ErrorCode::gateway_error, "embed failed: " + last_error);
}

void Gateway::append_record(const nlohmann::json& line) {
    std::lock_guard lock(impl_->record_mu);
    std::ofstream out(config_.record_path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::gateway_error, "cannot append to " + config_.record_path.string());
    out << line.dump() << "\n";
}

}  // namespace igmirag
