#include "igmirag/strategy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "igmirag/error.hpp"
#include "igmirag/prompts.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

constexpr std::string_view kLabels[] = {"question",     "rewrite_question", "key_entities",
                                        "keywords",     "target_layer",     "matching_score",
                                        "semantic_depth"};

bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string clean_value(std::string_view v) {
    auto s = std::string(text::trim(v));
    // Markdown emphasis and trailing separators around inline fields.
    while (!s.empty() && (s.back() == ',' || s.back() == '*' || s.back() == ';')) s.pop_back();
    while (!s.empty() && s.front() == '*') s.erase(s.begin());
    s = std::string(text::trim(s));
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    return std::string(text::trim(s));
}

struct LabelHit {
    std::size_t start;
    std::size_t value_start;
    std::string_view label;
};

std::map<std::string, std::string> labeled_fields(std::string_view reply) {
    const auto lower = text::fold_case(reply);
    std::vector<LabelHit> hits;
    for (auto label : kLabels) {
        std::size_t pos = 0;
        while ((pos = lower.find(label, pos)) != std::string::npos) {
            const std::size_t end = pos + label.size();
            const bool left_ok = pos == 0 || !is_word(lower[pos - 1]);
            std::size_t colon = end;
            while (colon < lower.size() && (lower[colon] == ' ' || lower[colon] == '\t' ||
                                            lower[colon] == '*' || lower[colon] == '"')) {
                ++colon;
            }
            if (left_ok && colon < lower.size() && lower[colon] == ':') {
                hits.push_back(LabelHit{pos, colon + 1, label});
            }
            pos = end;
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const LabelHit& a, const LabelHit& b) { return a.start < b.start; });
    std::map<std::string, std::string> fields;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const std::size_t stop = i + 1 < hits.size() ? hits[i + 1].start : reply.size();
        auto value = clean_value(reply.substr(hits[i].value_start, stop - hits[i].value_start));
        // The first occurrence of a label wins.
        fields.emplace(std::string(hits[i].label), std::move(value));
    }
    return fields;
}

std::optional<long> first_integer(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool digit = std::isdigit(static_cast<unsigned char>(s[i])) != 0;
        const bool neg = s[i] == '-' && i + 1 < s.size() &&
                         std::isdigit(static_cast<unsigned char>(s[i + 1])) != 0;
        if (!digit && !neg) continue;
        long v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
        if (ec == std::errc()) return v;
        if (ec == std::errc::result_out_of_range) return neg ? -1000000L : 1000000L;
        return std::nullopt;
    }
    return std::nullopt;
}

std::string json_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long>());
    if (v.is_number()) return std::to_string(v.get<double>());
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& e : v) {
            if (e.is_object() && e.contains("canonical")) {
                std::string item = json_text(e.at("canonical"));
                if (e.contains("aliases") && e.at("aliases").is_array()) {
                    for (const auto& a : e.at("aliases")) item += " | " + json_text(a);
                }
                parts.push_back(item);
            } else {
                parts.push_back(json_text(e));
            }
        }
        return text::join(parts, ", ");
    }
    return {};
}

std::optional<std::map<std::string, std::string>> json_fields(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return std::nullopt;
    }
    auto doc = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    std::map<std::string, std::string> fields;
    for (auto label : kLabels) {
        auto it = doc.find(std::string(label));
        if (it != doc.end() && !it->is_null()) fields[std::string(label)] = clean_value(json_text(*it));
    }
    if (fields.empty()) return std::nullopt;
    return fields;
}

int clamped(const std::map<std::string, std::string>& fields, const std::string& label, int lo,
            int hi, std::vector<std::string>& warnings) {
    auto it = fields.find(label);
    std::optional<long> v;
    if (it != fields.end()) v = first_integer(it->second);
    if (!v) throw Error(ErrorCode::parse_failure, "strategy reply lacks integer field " + label);
    if (*v < lo || *v > hi) {
        const long c = std::clamp(*v, static_cast<long>(lo), static_cast<long>(hi));
        warnings.push_back(label + "=" + std::to_string(*v) + " clamped to " + std::to_string(c));
        spdlog::warn("strategy: {}", warnings.back());
        return static_cast<int>(c);
    }
    return static_cast<int>(*v);
}

}  // namespace

Strategy fallback_strategy(std::string_view query) {
    Strategy s;
    s.question = std::string(query);
    s.rewrite_question = std::string(query);
    s.target_layer = Layer::entity;
    s.matching_score = 3;
    s.semantic_depth = 2;
    s.downgraded = true;
    return s;
}

std::vector<ChatMessage> strategy_messages(std::string_view query) {
    std::string content = prompts::get("strategy_architecture");
    content += "\n";
    content += prompts::get("strategy_goal");
    content += "\n";
    content += text::substitute(prompts::get("strategy_format"), "query", query);
    return {ChatMessage{"user", std::move(content)}};
}

std::vector<KeyEntity> parse_key_entities(std::string_view field) {
    std::vector<KeyEntity> out;
    for (const auto& item : text::split(field, ',')) {
        KeyEntity ke;
        for (const auto& part : text::split(item, '|')) {
            auto name = clean_value(part);
            if (name.size() >= 2 && (name.front() == '"' || name.front() == '\'') &&
                name.back() == name.front()) {
                name = name.substr(1, name.size() - 2);
            }
            if (name.empty()) continue;
            if (ke.canonical.empty()) {
                ke.canonical = std::move(name);
            } else {
                ke.aliases.push_back(std::move(name));
            }
        }
        if (!ke.canonical.empty()) out.push_back(std::move(ke));
    }
    return out;
}

Strategy parse_strategy_reply(std::string_view reply, std::string_view query) {
    auto has_ints = [](const std::map<std::string, std::string>& f) {
        return f.count("target_layer") && f.count("matching_score") && f.count("semantic_depth");
    };
    // Quoted JSON keys also look like labels, so a well-formed object wins.
    auto fields = json_fields(reply).value_or(std::map<std::string, std::string>{});
    if (!has_ints(fields)) {
        auto labeled = labeled_fields(reply);
        if (has_ints(labeled) || fields.empty()) fields = std::move(labeled);
    }
    Strategy s;
    s.target_layer = layer_from_code(clamped(fields, "target_layer", 1, 3, s.warnings));
    s.matching_score = clamped(fields, "matching_score", 1, 5, s.warnings);
    s.semantic_depth = clamped(fields, "semantic_depth", 1, 5, s.warnings);

    auto get = [&](const std::string& label) {
        auto it = fields.find(label);
        return it == fields.end() ? std::string() : it->second;
    };
    s.question = get("question");
    if (s.question.empty()) s.question = std::string(query);
    s.rewrite_question = get("rewrite_question");
    if (s.rewrite_question.empty()) {
        s.warnings.push_back("rewrite_question missing; using the original question");
        s.rewrite_question = std::string(query);
    }
    s.key_entities = parse_key_entities(get("key_entities"));
    for (const auto& kw : text::split(get("keywords"), ',')) {
        auto k = clean_value(kw);
        if (!k.empty()) s.keywords.push_back(std::move(k));
    }
    return s;
}

Strategy parse_strategy(std::string_view query, Gateway& gateway, int max_retries) {
    if (text::trim(query).empty()) throw Error(ErrorCode::invalid_argument, "empty query");
    auto messages = strategy_messages(query);
    ChatOptions opts;
    opts.ledger_tag = "strategy";
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        auto reply = gateway.chat(messages, opts);
        try {
            return parse_strategy_reply(reply.text, query);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::parse_failure) throw;
            last_error = e.what();
            messages.push_back(ChatMessage{"assistant", reply.text});
            messages.push_back(ChatMessage{"user", prompts::get("retry_notice")});
        }
    }
    spdlog::warn("strategy: parse failure ({}); falling back to l=1, m=3, d=2", last_error);
    auto s = fallback_strategy(query);
    s.warnings.push_back("parse failure: " + last_error);
    return s;
}

std::string composite_query(const Strategy& s) {
    std::vector<std::string> phrases;
    std::set<std::string> seen;
    auto add = [&](const std::string& p) {
        auto t = std::string(text::trim(p));
        if (t.empty()) return;
        if (seen.insert(text::fold_case(t)).second) phrases.push_back(std::move(t));
    };
    for (const auto& ke : s.key_entities) {
        add(ke.canonical);
        for (const auto& a : ke.aliases) add(a);
    }
    for (const auto& k : s.keywords) add(k);
    return text::join(phrases, " ");
}

}  // namespace igmirag
