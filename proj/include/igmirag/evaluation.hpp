#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "igmirag/gateway.hpp"

namespace igmirag {

/// Lowercase, drop ASCII punctuation and the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

struct ShortFormScore {
    double em = 0.0;
    double f1 = 0.0;
};

/// EM against any gold; F1 is the best token-level F1 over golds.
ShortFormScore short_form_score(std::string_view prediction, const std::vector<std::string>& golds);

/// Token F1 between two answers after normalization.
double token_f1(std::string_view prediction, std::string_view gold);

struct JudgeScore {
    double em = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// Harmonic mean, 0 when both are 0.
double harmonic_f1(double recall, double precision);

std::vector<ChatMessage> judge_messages(std::string_view question, std::string_view gold,
                                        std::string_view prediction);

/// Reads the three "Score" values of a rubric reply. Throws judge_failure.
JudgeScore parse_judge_reply(std::string_view reply);

JudgeScore judge_score(std::string_view question, std::string_view gold, std::string_view prediction,
                       Gateway& gateway, int max_retries = 2);

}  // namespace igmirag
