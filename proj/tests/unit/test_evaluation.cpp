#include <gtest/gtest.h>

#include "igmirag/error.hpp"
#include "igmirag/evaluation.hpp"
#include "igmirag/gateway.hpp"

using namespace igmirag;

TEST(ShortForm, Normalization) {
    EXPECT_EQ(normalize_answer("The  Portrait, of George-Dyer!"), "portrait of georgedyer");
    EXPECT_EQ(normalize_answer("An apple a day"), "apple day");
    EXPECT_EQ(normalize_answer(""), "");
    EXPECT_EQ(normalize_answer("theatre"), "theatre");
}

TEST(ShortForm, PartialMatch) {
    const auto s = short_form_score("Nicholas Bacon", {"Sir Nicholas Bacon"});
    EXPECT_EQ(s.em, 0.0);
    EXPECT_NEAR(s.f1, 0.8, 1e-12);
}

TEST(ShortForm, BestGoldWins) {
    const auto s = short_form_score("Durer's father", {"Albrecht Durer the Elder", "Durer's father"});
    EXPECT_EQ(s.em, 1.0);
    EXPECT_EQ(s.f1, 1.0);
    EXPECT_THROW(short_form_score("x", {}), Error);
}

TEST(ShortForm, EmptyAnswers) {
    EXPECT_EQ(token_f1("", ""), 1.0);
    EXPECT_EQ(token_f1("the", "a"), 1.0);
    EXPECT_EQ(token_f1("", "x"), 0.0);
    EXPECT_EQ(token_f1("x", ""), 0.0);
}

TEST(ShortForm, RepeatedTokensCountedWithMultiplicity) {
    // Overlap 2 of 3 predicted and 2 of 2 gold tokens.
    EXPECT_NEAR(token_f1("green green blue", "green blue"), 0.8, 1e-12);
}

TEST(Judge, HarmonicMean) {
    EXPECT_NEAR(harmonic_f1(80, 60), 960.0 / 14.0, 1e-12);
    EXPECT_EQ(harmonic_f1(0, 0), 0.0);
}

TEST(Judge, ParsesRubricReply) {
    const auto s = parse_judge_reply(
        "{\"Exact Match\": {\"Explanation\": \"same person\", \"Score\": 100},\n"
        " \"Recall\": {\"Explanation\": \"most\", \"Score\": 80},\n"
        " \"Precision\": {\"Explanation\": \"some extra\", \"Score\": 60}}");
    EXPECT_EQ(s.em, 100.0);
    EXPECT_EQ(s.recall, 80.0);
    EXPECT_EQ(s.precision, 60.0);
    EXPECT_NEAR(s.f1, 68.57142857142857, 1e-9);
}

TEST(Judge, RejectsMissingOrOutOfRangeScores) {
    EXPECT_THROW(parse_judge_reply("Exact Match: Score 50"), Error);
    try {
        parse_judge_reply("Exact Match Score: 120\nRecall Score: 50\nPrecision Score: 50");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::judge_failure);
    }
}

TEST(Judge, RetriesThroughGateway) {
    GatewayConfig c;
    c.stub_fallback = StubFallback::error;
    Gateway gw(c);
    gw.add_rule({{}, "could not be parsed", "Exact Match Score: 0\nRecall Score: 50\nPrecision Score: 100"});
    gw.add_rule({{}, "", "I think it is fine."});
    const auto s = judge_score("q", "gold", "pred", gw);
    EXPECT_EQ(s.em, 0.0);
    EXPECT_NEAR(s.f1, 2.0 * 50 * 100 / 150, 1e-12);
    EXPECT_EQ(gw.ledger().usage_for("judge").total(), gw.ledger().totals().total());
    EXPECT_EQ(gw.ledger().calls(), 2u);
}

TEST(Judge, PromptSubstitutesAllFields) {
    const auto m = judge_messages("Who?", "Gold One", "Pred Two");
    ASSERT_EQ(m.size(), 1u);
    for (const char* s : {"Who?", "Gold One", "Pred Two"}) EXPECT_NE(m[0].content.find(s), std::string::npos);
    EXPECT_EQ(m[0].content.find("{pre_answer}"), std::string::npos);
}
