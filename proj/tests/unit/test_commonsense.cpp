// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "bottomup/commonsense.hpp"
#include "bottomup/errors.hpp"
#include "bottomup/mock_backends.hpp"
#include "support.hpp"

namespace bottomup {
namespace {

using testing::tiny_image;

std::vector<Claim> three_claims() {
    return {{1, "A stop arm tells drivers to stop."}, {2, "School buses are yellow."}, {3, "A stop arm means out of service."}};
}

void fill(mock::TableSearch& s, const std::vector<Claim>& claims) {
    for (const auto& c : claims) s.add(c.text, {"About " + std::to_string(c.index), "evidence " + c.text, "", 1});
}

TEST(ClaimLabelTest, NamesRoundTrip) {
    for (ClaimLabel l : {ClaimLabel::Hallucination, ClaimLabel::NonHallucination, ClaimLabel::Unverifiable}) {
        EXPECT_EQ(claim_label_from_string(to_string(l)), l);
    }
    EXPECT_THROW(claim_label_from_string("Maybe"), Error);
}

TEST(ParseClaimList, Lines) {
    const auto claims = parse_claim_list(
        "[Commonsense Claims]\n"
        "[Claim 1]: Ducks eat bread.\n"
        "Some commentary.\n"
        "**[Claim 2]:**   Bread   is bad for ducks.\n"
        "[Claim 3]: ducks eat bread.\n"
        "[Claim 4]: ...\n"
        "[Claim 7]: Feeding ducks is common in parks.\n");
    ASSERT_EQ(claims.size(), 3u);
    EXPECT_EQ(claims[0], (Claim{1, "Ducks eat bread."}));
    EXPECT_EQ(claims[1], (Claim{2, "Bread is bad for ducks."}));
    EXPECT_EQ(claims[2], (Claim{3, "Feeding ducks is common in parks."}));
    EXPECT_TRUE(parse_claim_list("No claims here.").empty());
}

TEST(ParseClaimList, RenderRoundTrip) {
    const auto claims = three_claims();
    EXPECT_EQ(parse_claim_list(render_claims(claims)), claims);
    EXPECT_EQ(render_claims({}), "");
}

TEST(ParseLabelList, PositionalWithDefaults) {
    const auto claims = three_claims();
    const auto labels = parse_label_list(
        "[Claim 1]: x\n[Label]: Non-hallucination\n[Claim 2]: y\n[Label]: Hallucination\n", claims);
    EXPECT_EQ(labels.at(1), ClaimLabel::NonHallucination);
    EXPECT_EQ(labels.at(2), ClaimLabel::Hallucination);
    EXPECT_EQ(labels.at(3), ClaimLabel::Unverifiable);
    const auto odd = parse_label_list("[Label]: NON HALLUCINATION.\n[Label]: perhaps\n[Label]: hallucinated", claims);
    EXPECT_EQ(odd.at(1), ClaimLabel::NonHallucination);
    EXPECT_EQ(odd.at(2), ClaimLabel::Unverifiable);
    EXPECT_EQ(odd.at(3), ClaimLabel::Hallucination);
}

TEST(InduceClaims, PromptAndParse) {
    mock::ScriptedChat chat({"[Claim 1]: Stop arms stop traffic.\n[Claim 2]: Buses carry children."});
    SceneGraph sg;
    sg.objects = {{1, "Bus", {}}};
    const auto r = induce_claims(chat, PromptSet::defaults(), tiny_image(), sg, "What does the sign mean?");
    EXPECT_EQ(r.claims.size(), 2u);
    EXPECT_NE(r.exchange.prompt.find(canonicalize(sg)), std::string::npos);
    EXPECT_NE(r.exchange.prompt.find("What does the sign mean?"), std::string::npos);
    EXPECT_THROW(induce_claims(chat, PromptSet::defaults(), tiny_image(), sg, ""), InvalidRequest);
}

TEST(VerifyClaims, KeptIsNonHallucinationSet) {
    const auto claims = three_claims();
    mock::TableSearch search;
    fill(search, claims);
    mock::ScriptedChat chat({"[Label]: Non-hallucination\n[Label]: Non-hallucination\n[Label]: Hallucination"});
    const auto r = verify_claims(chat, search, PromptSet::defaults(), claims);
    ASSERT_EQ(r.verified.kept.size(), 2u);
    EXPECT_EQ(r.verified.kept[0], claims[0]);
    EXPECT_EQ(r.verified.kept[1], claims[1]);
    EXPECT_EQ(r.verified.judgments.at(3).label, ClaimLabel::Hallucination);
    EXPECT_EQ(search.calls(), 3u);
    EXPECT_EQ(chat.calls(), 1u);
    ASSERT_EQ(r.exchanges.size(), 1u);
    EXPECT_NE(r.exchanges[0].prompt.find("evidence A stop arm tells drivers to stop."), std::string::npos);
    EXPECT_EQ(r.verified.judgments.at(1).evidence.size(), 1u);
}

TEST(VerifyClaims, EmptyListMakesNoCalls) {
    mock::TableSearch search;
    mock::ScriptedChat chat({});
    const auto r = verify_claims(chat, search, PromptSet::defaults(), {});
    EXPECT_TRUE(r.verified.kept.empty());
    EXPECT_TRUE(r.verified.judgments.empty());
    EXPECT_EQ(search.calls(), 0u);
    EXPECT_EQ(chat.calls(), 0u);
}

TEST(VerifyClaims, SearchFailureIsUnverifiable) {
    const auto claims = three_claims();
    mock::TableSearch search;
    fill(search, claims);
    search.fail(claims[1].text);
    mock::ScriptedChat chat({"[Label]: Non-hallucination\n[Label]: Non-hallucination"});
    const auto r = verify_claims(chat, search, PromptSet::defaults(), claims);
    EXPECT_EQ(r.verified.judgments.at(2).label, ClaimLabel::Unverifiable);
    EXPECT_FALSE(r.verified.judgments.at(2).search_error.empty());
    EXPECT_EQ(r.verified.judgments.at(1).label, ClaimLabel::NonHallucination);
    EXPECT_EQ(r.verified.judgments.at(3).label, ClaimLabel::NonHallucination);
    EXPECT_EQ(r.verified.kept, (std::vector<Claim>{claims[0], claims[2]}));
    EXPECT_EQ(r.exchanges[0].prompt.find(claims[1].text), std::string::npos);
}

TEST(VerifyClaims, TotalOutageSkipsLabeling) {
    const auto claims = three_claims();
    mock::TableSearch search;
    search.fail_all();
    mock::ScriptedChat chat({});
    const auto r = verify_claims(chat, search, PromptSet::defaults(), claims);
    EXPECT_TRUE(r.verified.kept.empty());
    for (const auto& c : claims) EXPECT_EQ(r.verified.judgments.at(c.index).label, ClaimLabel::Unverifiable);
    EXPECT_EQ(chat.calls(), 0u);
    EXPECT_EQ(search.calls(), 3u);
}

TEST(VerifyClaims, NoResultsStillLabeled) {
    const std::vector<Claim> claims{{1, "Obscure fact."}};
    mock::TableSearch search;
    mock::ScriptedChat chat({"[Label]: Hallucination"});
    const auto r = verify_claims(chat, search, PromptSet::defaults(), claims);
    EXPECT_EQ(r.verified.judgments.at(1).label, ClaimLabel::Hallucination);
    EXPECT_NE(r.exchanges[0].prompt.find("(no results)"), std::string::npos);
}

TEST(VerifyClaims, QueryRewrite) {
    const std::vector<Claim> claims{{1, "A stop arm tells drivers to stop."}};
    mock::TableSearch search;
    search.add("school bus stop arm meaning", {"t", "s", "", 1});
    mock::ScriptedChat chat({"\nschool bus stop arm meaning\n", "[Label]: Non-hallucination"});
    ClaimVerifyOptions opts;
    opts.rewrite_queries = true;
    const auto r = verify_claims(chat, search, PromptSet::defaults(), claims, opts);
    EXPECT_EQ(search.queries(), (std::vector<std::string>{"school bus stop arm meaning"}));
    EXPECT_EQ(r.verified.judgments.at(1).query, "school bus stop arm meaning");
    EXPECT_EQ(r.exchanges.size(), 2u);
    EXPECT_EQ(r.verified.kept.size(), 1u);
}

TEST(VerifyClaims, LabelingErrorPropagates) {
    const auto claims = three_claims();
    mock::TableSearch search;
    mock::RuleChat chat({}, std::nullopt);
    EXPECT_THROW(verify_claims(chat, search, PromptSet::defaults(), claims), BackendError);
}

TEST(VerifyClaims, RandomLabelsProperty) {
    std::mt19937_64 rng(3);
    const char* names[] = {"Non-hallucination", "Hallucination", "unsure"};
    for (int round = 0; round < 100; ++round) {
        std::vector<Claim> claims;
        const int n = static_cast<int>(rng() % 7);
        for (int i = 1; i <= n; ++i) claims.push_back({i, "claim number " + std::to_string(i) + " of " + std::to_string(round)});
        mock::TableSearch search;
        fill(search, claims);
        std::set<int> failed;
        std::vector<int> labels;
        std::string reply;
        for (const auto& c : claims) {
            if (rng() % 4 == 0) {
                search.fail(c.text);
                failed.insert(c.index);
                continue;
            }
            labels.push_back(static_cast<int>(rng() % 3));
            reply += std::string("[Label]: ") + names[labels.back()] + "\n";
        }
        mock::ScriptedChat chat({reply});
        const auto r = verify_claims(chat, search, PromptSet::defaults(), claims);
        std::vector<Claim> expect;
        std::size_t li = 0;
        for (const auto& c : claims) {
            if (failed.contains(c.index)) {
                EXPECT_EQ(r.verified.judgments.at(c.index).label, ClaimLabel::Unverifiable);
                continue;
            }
            if (labels[li++] == 0) expect.push_back(c);
        }
        EXPECT_EQ(r.verified.kept, expect);
        EXPECT_EQ(search.calls(), claims.size());
        for (const auto& c : r.verified.kept) {
            EXPECT_EQ(r.verified.judgments.at(c.index).label, ClaimLabel::NonHallucination);
        }
    }
}

}  // namespace
}  // namespace bottomup
