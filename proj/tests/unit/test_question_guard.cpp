// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "bottomup/errors.hpp"
#include "bottomup/mock_backends.hpp"
#include "bottomup/question_guard.hpp"
#include "support.hpp"

namespace bottomup {
namespace {

using testing::kCatBusQuestion;
using testing::tiny_image;

constexpr const char* kAdjusted = "What does the sign sitting near the front of the bus mean?";

std::string cat_bus_reply() {
    return std::string("Analyzing the question against the scene graph:\n"
                       "1. Object Conflict: The question mentions a cat, but the scene graph contains no cat.\n"
                       "2. Object Attribute Conflict: The color of the cat cannot be compared.\n"
                       "3. Object Relation Conflict: The cat cannot sit near the bus.\n"
                       "Conclusion: There is an object conflict: the cat does not appear in the image.\n"
                       "Output Question: \"") +
           kAdjusted + "\"";
}

SceneGraph bus_sign() {
    SceneGraph sg;
    sg.objects = {{1, "Bus", {{"color", "yellow"}}}, {3, "Sign", {{"color", "red"}}}};
    sg.relations = {{3, 1, "on front of"}};
    return sg;
}

// Independent Levenshtein on token vectors, full matrix.
std::size_t oracle_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
    }
    return d[a.size()][b.size()];
}

TEST(ConflictKindTest, NamesRoundTrip) {
    for (ConflictKind k : {ConflictKind::Object, ConflictKind::Attribute, ConflictKind::Relationship}) {
        EXPECT_EQ(conflict_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(conflict_kind_from_string("Colour"), Error);
}

TEST(ParseGuardOutput, CatBusObjectConflict) {
    const GuardOutput g = parse_guard_output(cat_bus_reply());
    ASSERT_EQ(g.conflicts.size(), 1u);
    EXPECT_EQ(g.conflicts[0].kind, ConflictKind::Object);
    EXPECT_EQ(g.question, kAdjusted);
}

TEST(ParseGuardOutput, NoConflictStatement) {
    const GuardOutput g = parse_guard_output(
        "Conclusion: There is no conflict between the visual content in the image and the question.\n"
        "Output Question: \"What are the four persons doing?\"");
    EXPECT_TRUE(g.conflicts.empty());
    EXPECT_EQ(g.question, "What are the four persons doing?");
}

TEST(ParseGuardOutput, NegatedLabelsDoNotCount) {
    const GuardOutput g = parse_guard_output(
        "Conclusion: There is no object conflict and not an attribute conflict. "
        "There is a relationship conflict: the dog is beside the ball.\n"
        "Output Question: Is the dog beside the ball?");
    ASSERT_EQ(g.conflicts.size(), 1u);
    EXPECT_EQ(g.conflicts[0].kind, ConflictKind::Relationship);
    EXPECT_EQ(g.question, "Is the dog beside the ball?");
}

TEST(ParseGuardOutput, SeveralConflictsInOrder) {
    const GuardOutput g = parse_guard_output(
        "Conclusion: A relation conflict exists. An attribute conflict exists too. Also an object conflict.\n"
        "Output Question: q?");
    ASSERT_EQ(g.conflicts.size(), 3u);
    EXPECT_EQ(g.conflicts[0].kind, ConflictKind::Object);
    EXPECT_EQ(g.conflicts[1].kind, ConflictKind::Attribute);
    EXPECT_EQ(g.conflicts[2].kind, ConflictKind::Relationship);
}

TEST(ParseGuardOutput, HeadingsIgnoredWithoutConclusion) {
    const GuardOutput g = parse_guard_output(
        "1. Object Conflict: none, the hat is present.\n"
        "2. Object Attribute Conflict: the hat is red, not blue, so this is an attribute conflict.\n"
        "Output Question: \"What color is the hat?\"");
    ASSERT_EQ(g.conflicts.size(), 1u);
    EXPECT_EQ(g.conflicts[0].kind, ConflictKind::Attribute);
    EXPECT_EQ(g.question, "What color is the hat?");
}

TEST(ParseGuardOutput, LastOutputQuestionWinsAndNextLineFallback) {
    EXPECT_EQ(parse_guard_output("Output Question: first?\nOutput Question: second?").question, "second?");
    EXPECT_EQ(parse_guard_output("Conclusion: fine.\n**Output Question:**\n\"Is it red?\"").question, "Is it red?");
}

TEST(ParseGuardOutput, MissingOutputQuestionThrows) {
    EXPECT_THROW(parse_guard_output("Conclusion: there is an object conflict."), GuardParseError);
    EXPECT_THROW(parse_guard_output("Output Question: \"\""), GuardParseError);
    EXPECT_THROW(parse_guard_output(""), GuardParseError);
}

TEST(ValidateAndAdjust, CatBusAdjusts) {
    mock::ScriptedChat chat({cat_bus_reply()});
    const auto r = validate_and_adjust(chat, PromptSet::defaults(), GuardExamples::defaults(), tiny_image(), bus_sign(),
                                       kCatBusQuestion);
    EXPECT_EQ(r.question.original, kCatBusQuestion);
    EXPECT_EQ(r.question.adjusted, kAdjusted);
    EXPECT_TRUE(r.question.changed);
    EXPECT_FALSE(r.question.guard_degraded);
    ASSERT_EQ(r.question.conflicts.size(), 1u);
    EXPECT_EQ(r.question.conflicts[0].kind, ConflictKind::Object);
    const auto req = chat.requests().at(0);
    EXPECT_NE(r.exchange.prompt.find(canonicalize(bus_sign())), std::string::npos);
    EXPECT_NE(r.exchange.prompt.find(std::string("[Question]: \"") + kCatBusQuestion + "\""), std::string::npos);
    EXPECT_EQ(r.exchange.prompt, req.joined());
}

TEST(ValidateAndAdjust, NoConflictKeepsOriginalEvenIfRephrased) {
    mock::ScriptedChat chat({"Conclusion: There is no conflict.\nOutput Question: \"What are those four people up to?\""});
    const auto r = validate_and_adjust(chat, PromptSet::defaults(), GuardExamples::defaults(), tiny_image(), bus_sign(),
                                       "What are the four persons doing?");
    EXPECT_EQ(r.question.adjusted, "What are the four persons doing?");
    EXPECT_FALSE(r.question.changed);
    EXPECT_TRUE(r.question.conflicts.empty());
}

TEST(ValidateAndAdjust, UnparsableReplyDegrades) {
    mock::ScriptedChat chat({"I think the question is fine."});
    const auto r = validate_and_adjust(chat, PromptSet::defaults(), GuardExamples::defaults(), tiny_image(), bus_sign(),
                                       "Is the bus yellow?");
    EXPECT_TRUE(r.question.guard_degraded);
    EXPECT_FALSE(r.question.degraded_reason.empty());
    EXPECT_EQ(r.question.adjusted, "Is the bus yellow?");
    EXPECT_FALSE(r.question.changed);
}

TEST(ValidateAndAdjust, EmptyGraphNote) {
    mock::ScriptedChat chat({"Conclusion: no conflict.\nOutput Question: q?"});
    const auto r = validate_and_adjust(chat, PromptSet::defaults(), GuardExamples::defaults(), tiny_image(),
                                       SceneGraph{}, "Is there a cat?");
    EXPECT_NE(r.exchange.prompt.find(kEmptyGraphNote), std::string::npos);
}

TEST(ValidateAndAdjust, ExampleCount) {
    const GuardExamples ex = GuardExamples::defaults();
    for (std::size_t k = 0; k <= 2; ++k) {
        mock::ScriptedChat chat({"Output Question: q?"});
        GuardOptions opts;
        opts.k_examples = k;
        const auto r =
            validate_and_adjust(chat, PromptSet::defaults(), ex, tiny_image(), bus_sign(), "Is the bus yellow?", opts);
        EXPECT_EQ(r.exchange.prompt.find("[Example-" + std::to_string(k + 1) + "]"), std::string::npos);
        if (k > 0) {
            EXPECT_NE(r.exchange.prompt.find("[Example-" + std::to_string(k) + "]"), std::string::npos);
        }
    }
    mock::ScriptedChat chat({"Output Question: q?"});
    GuardOptions opts;
    opts.k_examples = 99;
    EXPECT_THROW(validate_and_adjust(chat, PromptSet::defaults(), ex, tiny_image(), bus_sign(), "q", opts),
                 std::out_of_range);
    EXPECT_THROW(validate_and_adjust(chat, PromptSet::defaults(), ex, tiny_image(), bus_sign(), "  "), InvalidRequest);
    EXPECT_EQ(chat.calls(), 0u);
}

TEST(WordEditCount, Examples) {
    EXPECT_EQ(word_edit_count(kCatBusQuestion, kAdjusted), 4u);
    EXPECT_EQ(word_edit_count("Is the hat blue?", "is the HAT blue"), 0u);
    EXPECT_EQ(word_edit_count("", "three more words"), 3u);
    EXPECT_EQ(word_edit_count("Is the dog under the ball?", "Is the dog beside the ball?"), 1u);
    EXPECT_EQ(edit_tokens("What's   the cat's color?"), (std::vector<std::string>{"whats", "the", "cats", "color"}));
}

TEST(WordEditCount, MatchesOracleAndAxioms) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 500; ++i) {
        const std::string a = testing::random_sentence(rng);
        const std::string b = testing::random_sentence(rng);
        const std::string c = testing::random_sentence(rng);
        const std::size_t ab = word_edit_count(a, b);
        EXPECT_EQ(ab, oracle_distance(edit_tokens(a), edit_tokens(b))) << a << " | " << b;
        EXPECT_EQ(word_edit_count(a, a), 0u);
        EXPECT_EQ(ab, word_edit_count(b, a));
        EXPECT_LE(word_edit_count(a, c), ab + word_edit_count(b, c));
        if (ab == 0) {
            EXPECT_EQ(edit_tokens(a), edit_tokens(b));
        }
    }
}

}  // namespace
}  // namespace bottomup
