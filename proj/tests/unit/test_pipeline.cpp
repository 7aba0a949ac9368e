// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "bottomup/errors.hpp"
#include "bottomup/fixture_store.hpp"
#include "bottomup/mock_backends.hpp"
#include "bottomup/pipeline.hpp"
#include "support.hpp"

namespace bottomup {
namespace {

using testing::CatBusWorld;
using testing::cat_bus_world;
using testing::kCatBusQuestion;
using testing::tiny_image;

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

std::vector<std::string> prompts_with(const CatBusWorld& w, std::string_view needle) {
    std::vector<std::string> out;
    for (const auto& p : w.chat->prompts()) {
        if (contains(p, needle)) out.push_back(p);
    }
    return out;
}

std::vector<int> stages(const PipelineResult& r) {
    std::vector<int> out;
    for (const auto& t : r.traces) out.push_back(t.stage);
    return out;
}

PipelineConfig freeform(AblationFlags flags = {}) {
    PipelineConfig c;
    c.flags = flags;
    c.answer_kind = AnswerKind::FreeForm;
    return c;
}

TEST(Ablation, WithoutAndValidate) {
    EXPECT_EQ(AblationFlags::without({}), AblationFlags{});
    const AblationFlags f = AblationFlags::without({"qav", "cv"});
    EXPECT_TRUE(f.tivp && f.vpv && f.ci);
    EXPECT_FALSE(f.qav || f.cv);
    EXPECT_EQ(f.describe_disabled(), "qav,cv");
    EXPECT_EQ(AblationFlags{}.describe_disabled(), "");
    EXPECT_THROW(AblationFlags::without({"xyz"}), ConfigError);
    EXPECT_THROW(AblationFlags::without({"tivp"}).validate(), ConfigError);
    EXPECT_THROW(AblationFlags::without({"ci"}).validate(), ConfigError);
    EXPECT_NO_THROW(AblationFlags::without({"tivp", "vpv"}).validate());
    EXPECT_TRUE(AblationFlags::without({"tivp", "vpv", "qav", "ci", "cv"}).all_off());
}

TEST(RouteTest, NamesRoundTrip) {
    for (Route r : {Route::PerceptionAnswered, Route::KnowledgeAnswered, Route::Degraded}) {
        EXPECT_EQ(route_from_string(to_string(r)), r);
    }
    EXPECT_THROW(route_from_string("Elsewhere"), Error);
}

TEST(RunQuery, FullPipelineCatBus) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion, freeform(), "fig");
    EXPECT_EQ(r.case_id, "fig");
    EXPECT_EQ(stages(r), (std::vector<int>{1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(r.route, Route::KnowledgeAnswered);
    EXPECT_EQ(r.final.text, testing::kCatBusKnowledgeReply);
    EXPECT_EQ(r.final.normalized, "it is a stop arm drivers must stop");
    EXPECT_EQ(r.question, kCatBusQuestion);
    EXPECT_EQ(r.effective_question, testing::kCatBusAdjusted);
    ASSERT_TRUE(r.stats.has_value());
    EXPECT_EQ(r.stats->objects_total, 3u);
    EXPECT_EQ(r.stats->objects_removed, 1u);
    EXPECT_EQ(r.stats->relations_removed, 1u);
    const auto& conflicts = r.trace(3)->decisions["conflicts"];
    ASSERT_EQ(conflicts.size(), 1u);
    EXPECT_EQ(conflicts[0]["kind"], "Object");
    EXPECT_EQ(r.trace(6)->exchanges.size(), 2u);
    EXPECT_EQ(r.trace(6)->decisions["perception_level"], "insufficient");

    const auto knowledge = prompts_with(w, testing::kNeedleP6Knowledge);
    ASSERT_EQ(knowledge.size(), 1u);
    EXPECT_TRUE(contains(knowledge[0], testing::kCatBusClaim1));
    EXPECT_FALSE(contains(knowledge[0], testing::kCatBusClaim2));
    EXPECT_TRUE(contains(knowledge[0], testing::kCatBusAdjusted));
    EXPECT_FALSE(contains(knowledge[0], "\"Cat\""));
    EXPECT_EQ(w.search->calls(), 2u);
    EXPECT_EQ(w.chat->calls(), 6u);
}

TEST(RunQuery, AllOffIsOneDirectCall) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion,
                                       freeform(AblationFlags::without({"tivp", "vpv", "qav", "ci", "cv"})));
    EXPECT_EQ(w.chat->calls(), 1u);
    EXPECT_EQ(w.chat->prompts()[0], kCatBusQuestion);
    EXPECT_EQ(stages(r), (std::vector<int>{6}));
    EXPECT_EQ(r.trace(6)->decisions["mode"], "direct");
    EXPECT_EQ(r.route, Route::PerceptionAnswered);
    EXPECT_EQ(r.final.text, testing::kCatBusDirectReply);
    EXPECT_EQ(w.detector->calls(), 0u);
    EXPECT_EQ(w.search->calls(), 0u);
    EXPECT_FALSE(r.stats.has_value());
}

TEST(RunQuery, AllOffNeedsOnlyChat) {
    CatBusWorld w = cat_bus_world();
    w.services.detector = nullptr;
    w.services.scorer = nullptr;
    w.services.search = nullptr;
    EXPECT_NO_THROW(run_query(w.services, tiny_image(), kCatBusQuestion,
                              freeform(AblationFlags::without({"tivp", "vpv", "qav", "ci", "cv"}))));
}

TEST(RunQuery, WithoutQavPassesOriginalVerbatim) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"qav"})));
    EXPECT_EQ(stages(r), (std::vector<int>{1, 2, 4, 5, 6}));
    EXPECT_TRUE(prompts_with(w, testing::kNeedleP3).empty());
    EXPECT_EQ(r.effective_question, kCatBusQuestion);
    for (const auto* needle : {testing::kNeedleP6Perception, testing::kNeedleP6Knowledge, testing::kNeedleP4}) {
        const auto ps = prompts_with(w, needle);
        ASSERT_EQ(ps.size(), 1u) << needle;
        EXPECT_TRUE(contains(ps[0], kCatBusQuestion)) << needle;
        EXPECT_FALSE(contains(ps[0], testing::kCatBusAdjusted)) << needle;
    }
}

TEST(RunQuery, WithoutVpvForwardsUnverifiedGraph) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"vpv"})));
    EXPECT_EQ(stages(r), (std::vector<int>{1, 3, 4, 5, 6}));
    EXPECT_EQ(w.detector->calls(), 0u);
    EXPECT_FALSE(r.stats.has_value());
    EXPECT_TRUE(contains(prompts_with(w, testing::kNeedleP3).at(0), "\"Cat\""));
}

TEST(RunQuery, WithoutCvUsesEveryClaim) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"cv"})));
    EXPECT_EQ(stages(r), (std::vector<int>{1, 2, 3, 4, 6}));
    EXPECT_EQ(w.search->calls(), 0u);
    const auto knowledge = prompts_with(w, testing::kNeedleP6Knowledge);
    ASSERT_EQ(knowledge.size(), 1u);
    EXPECT_TRUE(contains(knowledge[0], testing::kCatBusClaim1));
    EXPECT_TRUE(contains(knowledge[0], testing::kCatBusClaim2));
    EXPECT_EQ(r.route, Route::KnowledgeAnswered);
}

TEST(RunQuery, WithoutCiIsDegraded) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r =
        run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"ci", "cv"})));
    EXPECT_EQ(stages(r), (std::vector<int>{1, 2, 3, 6}));
    EXPECT_EQ(r.route, Route::Degraded);
    EXPECT_TRUE(prompts_with(w, testing::kNeedleP4).empty());
    EXPECT_TRUE(prompts_with(w, testing::kNeedleP6Knowledge).empty());
    EXPECT_TRUE(contains(r.final.text, "unanswerable"));
}

TEST(RunQuery, WithoutPerceptionStagesStartsEmpty) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r =
        run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"tivp", "vpv"})));
    EXPECT_EQ(stages(r), (std::vector<int>{3, 4, 5, 6}));
    EXPECT_TRUE(prompts_with(w, testing::kNeedleP1).empty());
    EXPECT_TRUE(contains(prompts_with(w, testing::kNeedleP3).at(0), kEmptyGraphNote));
}

TEST(RunQuery, SufficientPerceptionSkipsKnowledge) {
    Services s;
    s.chat = std::make_shared<mock::RuleChat>(std::vector<mock::RuleChat::Rule>{
        {{testing::kNeedleP1}, "{\"Scene Graphs\": {\"objects\": [{\"id\": 1, \"type\": \"Bus\", \"attributes\": {}}], "
                               "\"relationships\": []}}"},
        {{testing::kNeedleP3}, "Conclusion: no conflict.\nOutput Question: \"Is there a bus?\""},
        {{testing::kNeedleP6Perception}, "Yes, there is a bus."},
    });
    auto det = std::make_shared<mock::TableDetector>();
    det->add("bus", {{0, 0, 10, 10}, 0.9, "bus"});
    s.detector = det;
    s.scorer = std::make_shared<mock::TableScorer>();
    auto search = std::make_shared<mock::TableSearch>();
    s.search = search;
    const PipelineResult r = run_query(s, tiny_image(), "Is there a bus?", PipelineConfig{});
    EXPECT_EQ(stages(r), (std::vector<int>{1, 2, 3, 6}));
    EXPECT_EQ(r.route, Route::PerceptionAnswered);
    EXPECT_EQ(r.final.normalized, "yes");
    EXPECT_EQ(r.trace(6)->decisions["perception_level"], "answered");
    EXPECT_EQ(search->calls(), 0u);
}

TEST(RunQuery, StageFailureCarriesPartialTrace) {
    Services s = cat_bus_world().services;
    s.chat = std::make_shared<mock::RuleChat>(std::vector<mock::RuleChat::Rule>{
        {{testing::kNeedleP1}, "{\"Scene Graphs\": {\"objects\": [], \"relationships\": []}}"},
        {{testing::kNeedleP3}, "Conclusion: no conflict.\nOutput Question: \"q\""},
        {{testing::kNeedleP6Perception}, "unanswerable"},
    });
    try {
        run_query(s, tiny_image(), kCatBusQuestion, PipelineConfig{});
        FAIL() << "expected PipelineError";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), 4);
        std::vector<int> got;
        for (const auto& t : e.partial_trace()) got.push_back(t.stage);
        EXPECT_EQ(got, (std::vector<int>{1, 2, 3, 4}));
        EXPECT_FALSE(e.partial_trace().back().errors.empty());
    }
}

TEST(RunQuery, PerceptionFailureDegradesOrFails) {
    CatBusWorld w = cat_bus_world();
    w.services.chat = std::make_shared<mock::RuleChat>(std::vector<mock::RuleChat::Rule>{
        {{testing::kNeedleP1}, "I see a bus."},
        {{testing::kNeedleP3}, "Conclusion: no conflict.\nOutput Question: \"q\""},
        {{testing::kNeedleP6Perception}, "No."},
    });
    PipelineConfig c;
    const PipelineResult r = run_query(w.services, tiny_image(), "Is there a cat?", c);
    EXPECT_TRUE(r.trace(1)->decisions["degraded"].get<bool>());
    EXPECT_EQ(r.trace(1)->exchanges.size(), 3u);
    EXPECT_EQ(r.final.normalized, "no");
    c.degrade_on_perception_failure = false;
    try {
        run_query(w.services, tiny_image(), "Is there a cat?", c);
        FAIL() << "expected PipelineError";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.stage(), 1);
        ASSERT_EQ(e.partial_trace().size(), 1u);
    }
}

TEST(RunQuery, ConfigProblems) {
    CatBusWorld w = cat_bus_world();
    PipelineConfig c;
    c.k_examples = 50;
    EXPECT_THROW(run_query(w.services, tiny_image(), "q", c), ConfigError);
    EXPECT_THROW(run_query(w.services, tiny_image(), "  ", PipelineConfig{}), InvalidRequest);
    w.services.search = nullptr;
    EXPECT_THROW(run_query(w.services, tiny_image(), "q", PipelineConfig{}), ConfigError);
    EXPECT_NO_THROW(run_query(w.services, tiny_image(), kCatBusQuestion, freeform(AblationFlags::without({"cv"}))));
    c = PipelineConfig{};
    c.parallelism = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(w.chat->calls(), 5u);
}

TEST(RunBatch, EmptyList) {
    const CatBusWorld w = cat_bus_world();
    EXPECT_TRUE(run_batch(w.services, {}, PipelineConfig{}).empty());
    EXPECT_EQ(w.chat->calls(), 0u);
}

TEST(RunBatch, ParallelismDoesNotChangeResults) {
    const auto world = testing::random_world(21, 16);
    PipelineConfig one;
    PipelineConfig four;
    four.parallelism = 4;
    const auto a = run_batch(world.services(), world.cases, one);
    const auto b = run_batch(world.services(), world.cases, four);
    ASSERT_EQ(a.size(), world.cases.size());
    ASSERT_EQ(b.size(), world.cases.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].id, world.cases[i].id);
        EXPECT_EQ(b[i].id, world.cases[i].id);
        ASSERT_TRUE(a[i].ok()) << a[i].error;
        ASSERT_TRUE(b[i].ok()) << b[i].error;
        EXPECT_EQ(serialize_result(*a[i].result), serialize_result(*b[i].result));
    }
}

TEST(RunBatch, ReplayMissesAreCaseFailures) {
    Services s = cat_bus_world().services;
    auto store = std::make_shared<FixtureStore>(FixtureMode::Replay);
    s.chat = std::make_shared<FixtureChat>(nullptr, store);
    const std::vector<BatchCase> cases{{"a", tiny_image("a"), "Is it red?"}, {"b", tiny_image("b"), "Is it blue?"}};
    PipelineConfig c;
    c.parallelism = 2;
    const auto out = run_batch(s, cases, c);
    ASSERT_EQ(out.size(), 2u);
    for (const auto& o : out) {
        EXPECT_FALSE(o.ok());
        EXPECT_EQ(o.failed_stage, 1);
        EXPECT_FALSE(o.error.empty());
        EXPECT_EQ(o.partial_trace.size(), 1u);
    }
    c.continue_on_error = false;
    try {
        run_batch(s, cases, c);
        FAIL() << "expected BatchError";
    } catch (const BatchError& e) {
        EXPECT_EQ(e.outcomes().size(), 2u);
    }
}

TEST(Serialization, RoundTripAndDeterminism) {
    const CatBusWorld w = cat_bus_world();
    const PipelineResult r = run_query(w.services, tiny_image(), kCatBusQuestion, freeform(), "fig");
    const std::string text = serialize_result(r);
    const PipelineResult back = parse_result(text);
    EXPECT_EQ(serialize_result(back), text);
    EXPECT_EQ(back.route, r.route);
    EXPECT_EQ(back.final, r.final);
    EXPECT_EQ(back.stats, r.stats);
    EXPECT_EQ(back.traces.size(), r.traces.size());
    const CatBusWorld again = cat_bus_world();
    EXPECT_EQ(serialize_result(run_query(again.services, tiny_image(), kCatBusQuestion, freeform(), "fig")), text);
    EXPECT_FALSE(contains(text, "elapsed"));
}

TEST(Serialization, RandomWorldRoundTrips) {
    const auto world = testing::random_world(8, 10);
    for (const auto& o : run_batch(world.services(), world.cases, PipelineConfig{})) {
        ASSERT_TRUE(o.ok()) << o.error;
        const std::string text = serialize_result(*o.result);
        EXPECT_EQ(serialize_result(parse_result(text)), text);
    }
}

TEST(Serialization, MalformedTextThrows) {
    EXPECT_THROW(parse_result("not json"), Error);
    EXPECT_THROW(parse_result("{\"route\": \"Nowhere\"}"), Error);
}

}  // namespace
}  // namespace bottomup
