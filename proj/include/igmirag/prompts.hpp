#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace igmirag::prompts {

/// All prompt templates compiled in from data/prompts, keyed by file stem.
const std::map<std::string, std::string, std::less<>>& registry();

/// Throws not_found for an unknown name.
const std::string& get(std::string_view name);

}  // namespace igmirag::prompts
