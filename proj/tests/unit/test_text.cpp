#include <gtest/gtest.h>

#include "igmirag/error.hpp"
#include "igmirag/prompts.hpp"
#include "igmirag/text.hpp"

namespace text = igmirag::text;

TEST(Text, TokensSplitWordRunsAndPunctuation) {
    const auto t = text::approx_tokens("Bacon's Head I (1948).");
    const std::vector<std::string_view> want{"Bacon", "'", "s", "Head", "I", "(", "1948", ")", "."};
    EXPECT_EQ(t, want);
    EXPECT_EQ(text::count_tokens("   "), 0u);
    EXPECT_EQ(text::count_tokens("D\xc3\xbcrer"), 1u);
}

TEST(Text, LexicalTermsAreLowercaseAlnumRuns) {
    const std::vector<std::string> want{"head", "i", "1948", "bacon"};
    EXPECT_EQ(text::lexical_terms("Head I, 1948 -- BACON"), want);
}

TEST(Text, TrimSplitJoin) {
    EXPECT_EQ(text::trim("  a b \n"), "a b");
    EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_EQ(text::join({"x", "y", "z"}, "|"), "x|y|z");
}

TEST(Text, Fnv1aKnownValues) {
    EXPECT_EQ(text::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(text::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(text::hex64(0xabcULL), "0000000000000abc");
}

TEST(Text, SubstituteReplacesEveryPlaceholder) {
    EXPECT_EQ(text::substitute("{q} and {q} but {r}", "q", "x"), "x and x but {r}");
}

TEST(Prompts, RegistryHoldsEveryTemplate) {
    for (const char* name : {"answer_brief", "answer_detailed", "extract_entities", "extract_pairs",
                             "extract_keywords", "extract_associations", "judge", "retry_notice",
                             "strategy_architecture", "strategy_format", "strategy_goal"}) {
        EXPECT_FALSE(igmirag::prompts::get(name).empty()) << name;
    }
    EXPECT_THROW(igmirag::prompts::get("nope"), igmirag::Error);
    EXPECT_NE(igmirag::prompts::get("strategy_format").find("{query}"), std::string::npos);
}
