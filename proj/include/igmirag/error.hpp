#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace igmirag {

enum class ErrorCode {
    invalid_argument,
    not_found,
    invariant_violation,
    corrupt_store,
    extraction_failure,
    build_failure,
    parse_failure,
    gateway_error,
    fixture_missing,
    judge_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. `detail()` carries payloads such as
/// the raw LLM reply that failed to parse.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace igmirag
