#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace igmirag::text {

/// Approximate provider tokens: a token is a maximal run of word characters
/// (ASCII alphanumerics, '_' and any non-ASCII byte) or a single other
/// non-space character.
std::vector<std::string_view> approx_tokens(std::string_view s);
std::size_t count_tokens(std::string_view s);

/// Lowercased alphanumeric runs; used by BM25 and the composite query.
std::vector<std::string> lexical_terms(std::string_view s);

std::string fold_case(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::uint64_t fnv1a64(std::string_view s) noexcept;
std::string hex64(std::uint64_t v);

/// Replaces every "{name}" placeholder with `value`.
std::string substitute(std::string tmpl, std::string_view name, std::string_view value);

}  // namespace igmirag::text
