#include "igmirag/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>

#include "igmirag/error.hpp"
#include "igmirag/prompts.hpp"
#include "igmirag/text.hpp"

namespace igmirag {
namespace {

std::vector<std::string> answer_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80 && std::ispunct(c) != 0) continue;
        if (c < 0x80 && std::isspace(c) != 0) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    std::erase_if(out, [](const std::string& t) { return t == "a" || t == "an" || t == "the"; });
    return out;
}

std::optional<double> score_after(std::string_view reply, std::size_t from, std::size_t to) {
    const auto lower = text::fold_case(reply.substr(from, to - from));
    const auto pos = lower.find("score");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t i = pos + 5;
    while (i < lower.size() && (lower[i] == '"' || lower[i] == ' ' || lower[i] == ':' ||
                                lower[i] == '\t' || lower[i] == '\'')) {
        ++i;
    }
    const std::string rest = lower.substr(i);
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) return std::nullopt;
    if (v < 0.0 || v > 100.0) return std::nullopt;
    return v;
}

std::size_t find_section(std::string_view reply, std::string_view name, std::size_t from) {
    const auto lower = text::fold_case(reply);
    const auto needle = "\"" + text::fold_case(name) + "\"";
    auto pos = lower.find(needle, from);
    if (pos == std::string::npos) pos = lower.find(text::fold_case(name), from);
    return pos;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    return text::join(answer_tokens(s), " ");
}

double token_f1(std::string_view prediction, std::string_view gold) {
    const auto p = answer_tokens(prediction);
    const auto g = answer_tokens(gold);
    if (p.empty() || g.empty()) return p == g ? 1.0 : 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : g) ++counts[t];
    int same = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++same;
        }
    }
    if (same == 0) return 0.0;
    const double precision = static_cast<double>(same) / static_cast<double>(p.size());
    const double recall = static_cast<double>(same) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

ShortFormScore short_form_score(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw Error(ErrorCode::invalid_argument, "short_form_score: no gold answers");
    ShortFormScore s;
    const auto p = normalize_answer(prediction);
    for (const auto& g : golds) {
        if (p == normalize_answer(g)) s.em = 1.0;
        s.f1 = std::max(s.f1, token_f1(prediction, g));
    }
    return s;
}

double harmonic_f1(double recall, double precision) {
    if (recall + precision == 0.0) return 0.0;
    return 2.0 * recall * precision / (recall + precision);
}

std::vector<ChatMessage> judge_messages(std::string_view question, std::string_view gold,
                                        std::string_view prediction) {
    auto t = prompts::get("judge");
    t = text::substitute(std::move(t), "query", question);
    t = text::substitute(std::move(t), "gold_answer", gold);
    t = text::substitute(std::move(t), "pre_answer", prediction);
    return {ChatMessage{"user", std::move(t)}};
}

JudgeScore parse_judge_reply(std::string_view reply) {
    const auto em_at = find_section(reply, "Exact Match", 0);
    const auto rc_at = em_at == std::string::npos ? em_at : find_section(reply, "Recall", em_at);
    const auto pr_at = rc_at == std::string::npos ? rc_at : find_section(reply, "Precision", rc_at);
    if (pr_at == std::string::npos) {
        throw Error(ErrorCode::judge_failure, "judge reply lacks rubric sections", std::string(reply));
    }
    const auto em = score_after(reply, em_at, rc_at);
    const auto rc = score_after(reply, rc_at, pr_at);
    const auto pr = score_after(reply, pr_at, reply.size());
    if (!em || !rc || !pr) {
        throw Error(ErrorCode::judge_failure, "judge reply lacks a score in [0,100]", std::string(reply));
    }
    return JudgeScore{*em, *rc, *pr, harmonic_f1(*rc, *pr)};
}

JudgeScore judge_score(std::string_view question, std::string_view gold, std::string_view prediction,
                       Gateway& gateway, int max_retries) {
    auto messages = judge_messages(question, gold, prediction);
    ChatOptions opts;
    opts.ledger_tag = "judge";
    std::string last;
    for (int a = 0; a <= max_retries; ++a) {
        auto r = gateway.chat(messages, opts);
        try {
            return parse_judge_reply(r.text);
        } catch (const Error&) {
            last = r.text;
            messages.push_back(ChatMessage{"assistant", r.text});
            messages.push_back(ChatMessage{"user", prompts::get("retry_notice")});
        }
    }
    throw Error(ErrorCode::judge_failure, "unparseable judge reply after retries", last);
}

}  // namespace igmirag
