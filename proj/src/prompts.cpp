#include "igmirag/prompts.hpp"

#include "igmirag/error.hpp"

namespace igmirag::prompts {

const std::string& get(std::string_view name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw Error(ErrorCode::not_found, "prompt '" + std::string(name) + "'");
    return it->second;
}

}  // namespace igmirag::prompts
