#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace igmirag {

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;

    std::uint64_t total() const noexcept { return prompt_tokens + completion_tokens; }
    TokenUsage& operator+=(const TokenUsage& o) noexcept {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

struct ChatResult {
    std::string text;
    TokenUsage usage;
};

enum class GatewayMode { live, stub, record, replay };
GatewayMode gateway_mode_from_string(std::string_view s);
std::string_view to_string(GatewayMode m) noexcept;

/// What the stub answers when no fixture or rule matches.
enum class StubFallback { empty_json, echo, error };

struct GatewayConfig {
    GatewayMode mode = GatewayMode::stub;
    std::string endpoint = "https://api.openai.com";
    std::string chat_model = "gpt-4o-mini";
    std::string embed_model = "text-embedding-3-small";
    double temperature = 0.0;
    double timeout_seconds = 60.0;
    int retries = 3;
    int retry_backoff_ms = 500;
    std::size_t max_in_flight = 4;
    std::string api_key_env = "OPENAI_API_KEY";

    std::filesystem::path cassette;      // replay source (JSON lines)
    std::filesystem::path record_path;   // every served chat/embed call is appended here
    std::filesystem::path stub_rules;    // JSON lines of {all_of, last, reply}
    StubFallback stub_fallback = StubFallback::empty_json;
    std::size_t stub_embedding_dim = 64;

    void validate() const;
};

/// Per-tag token accounting; totals are the exact sum of the entries.
class TokenLedger {
public:
    struct Entry {
        std::string tag;
        TokenUsage usage;
        std::size_t calls = 0;
    };

    void record(std::string_view tag, const TokenUsage& usage);
    TokenUsage totals() const;
    TokenUsage usage_for(std::string_view tag) const;
    std::vector<Entry> entries() const;
    std::size_t calls() const;

private:
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
};

/// A stub rule matches when every `all_of` substring occurs somewhere in the
/// conversation and `last` occurs in the final user message.
struct StubRule {
    std::vector<std::string> all_of;
    std::string last;
    std::string reply;
};

/// Deterministic 64-dim feature-hashing embedding (unit norm).
std::vector<float> hashing_embedding(std::string_view text, std::size_t dim = 64);

/// Stable request key: FNV-1a over the canonical request JSON.
std::string chat_request_key(std::string_view model, double temperature,
                             std::span<const ChatMessage> messages);
std::string embed_request_key(std::string_view model, std::string_view text);

struct ChatOptions {
    std::string ledger_tag = "default";
    std::optional<double> temperature;
};

/// Uniform chat/embedding client. Thread-safe.
class Gateway {
public:
    explicit Gateway(GatewayConfig config);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    ChatResult chat(std::span<const ChatMessage> messages, const ChatOptions& options = {});
    std::vector<std::vector<float>> embed(std::span<const std::string> texts);

    void register_fixture(std::span<const ChatMessage> messages, std::string reply);
    void add_rule(StubRule rule);

    const GatewayConfig& config() const noexcept { return config_; }
    TokenLedger& ledger() noexcept { return ledger_; }
    const TokenLedger& ledger() const noexcept { return ledger_; }

private:
    struct Impl;

    ChatResult chat_stub(std::span<const ChatMessage> messages, const std::string& key);
    ChatResult chat_replay(const std::string& key);
    ChatResult chat_live(std::span<const ChatMessage> messages, double temperature);
    std::vector<std::vector<float>> embed_live(std::span<const std::string> texts);
    void append_record(const nlohmann::json& line);

    GatewayConfig config_;
    TokenLedger ledger_;
    std::unique_ptr<Impl> impl_;
};

std::vector<StubRule> load_stub_rules(const std::filesystem::path& path);

}  // namespace igmirag
