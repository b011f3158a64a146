#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "igmirag/gateway.hpp"
#include "igmirag/hypergraph.hpp"

namespace igmirag {

struct KeyEntity {
    std::string canonical;
    std::vector<std::string> aliases;

    bool operator==(const KeyEntity&) const = default;
};

/// Parsed query control block.
struct Strategy {
    std::string question;
    std::string rewrite_question;
    std::vector<KeyEntity> key_entities;
    std::vector<std::string> keywords;
    Layer target_layer = Layer::entity;
    int matching_score = 3;
    int semantic_depth = 2;

    bool downgraded = false;            // defaults used after a parse failure
    std::vector<std::string> warnings;  // clamps, missing optional fields

    bool operator==(const Strategy&) const = default;
};

/// l=1, m=3, d=2 with `downgraded` set.
Strategy fallback_strategy(std::string_view query);

std::vector<ChatMessage> strategy_messages(std::string_view query);

/// Parses a labeled-field or JSON reply. Out-of-range integers are clamped;
/// a missing target_layer/matching_score/semantic_depth throws parse_failure.
Strategy parse_strategy_reply(std::string_view reply, std::string_view query);

/// Asks the gateway, retrying up to `max_retries` times on unparseable
/// replies, then falls back to `fallback_strategy`.
Strategy parse_strategy(std::string_view query, Gateway& gateway, int max_retries = 2);

/// Key-entity names, aliases and keywords, deduplicated case-insensitively
/// (first occurrence kept) and space-joined.
std::string composite_query(const Strategy& s);

/// "Entity1 | Alias1 | Alias2, Entity2 | Alias3"
std::vector<KeyEntity> parse_key_entities(std::string_view field);

}  // namespace igmirag
