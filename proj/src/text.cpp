#include "igmirag/text.hpp"

#include "igmirag/error.hpp"

#include <cctype>
#include <cstdio>

namespace igmirag {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::not_found: return "not-found";
        case ErrorCode::invariant_violation: return "invariant-violation";
        case ErrorCode::corrupt_store: return "corrupt-store";
        case ErrorCode::extraction_failure: return "extraction-failure";
        case ErrorCode::build_failure: return "build-failure";
        case ErrorCode::parse_failure: return "parse-failure";
        case ErrorCode::gateway_error: return "gateway-error";
        case ErrorCode::fixture_missing: return "fixture-missing";
        case ErrorCode::judge_failure: return "judge-failure";
    }
    return "unknown";
}

}  // namespace igmirag

namespace igmirag::text {
namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

bool is_term_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::vector<std::string_view> approx_tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c) != 0) {
            ++i;
        } else if (is_word_byte(c)) {
            std::size_t j = i;
            while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back(s.substr(i, j - i));
            i = j;
        } else {
            out.push_back(s.substr(i, 1));
            ++i;
        }
    }
    return out;
}

std::size_t count_tokens(std::string_view s) {
    return approx_tokens(s).size();
}

std::vector<std::string> lexical_terms(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_term_byte(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_term_byte(static_cast<unsigned char>(s[j]))) ++j;
        out.push_back(fold_case(s.substr(i, j - i)));
        i = j;
    }
    return out;
}

std::string fold_case(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i != 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string substitute(std::string tmpl, std::string_view name, std::string_view value) {
    const std::string needle = "{" + std::string(name) + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(needle, pos)) != std::string::npos) {
        tmpl.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return tmpl;
}

}  // namespace igmirag::text
