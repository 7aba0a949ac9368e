// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "bottomup/errors.hpp"
#include "bottomup/report.hpp"
#include "support.hpp"

namespace bottomup {
namespace {

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

TEST(MarkWordChanges, Examples) {
    EXPECT_EQ(mark_word_changes("Is the hat blue?", "Is the hat red?"), "Is the hat [-blue?-] {+red?+}");
    EXPECT_EQ(mark_word_changes("same words", "Same words!"), "Same words!");
    EXPECT_EQ(mark_word_changes("", "new"), "{+new+}");
    EXPECT_EQ(mark_word_changes("old", ""), "[-old-]");
}

TEST(TraceReport, SingleStage) {
    const auto w = testing::cat_bus_world();
    PipelineConfig c;
    c.flags = AblationFlags::without({"tivp", "vpv", "qav", "ci", "cv"});
    const PipelineResult r = run_query(w.services, testing::tiny_image(), testing::kCatBusQuestion, c, "direct");
    const std::string text = render_trace_report(r);
    EXPECT_TRUE(contains(text, "# Trace report: direct"));
    EXPECT_TRUE(contains(text, "## Stage 6"));
    EXPECT_FALSE(contains(text, "## Stage 1"));
    EXPECT_TRUE(contains(text, "all stages disabled"));
    EXPECT_TRUE(contains(text, "route: PerceptionAnswered"));
}

TEST(TraceReport, CatBusGolden) {
    const PipelineResult r = testing::run_demo_cat_bus();
    const std::string text = render_trace_report(r);
    for (int s = 1; s <= 6; ++s) EXPECT_TRUE(contains(text, "## Stage " + std::to_string(s))) << s;
    EXPECT_TRUE(contains(text, "  Object: "));
    EXPECT_TRUE(contains(text, "[-cat-]"));
    EXPECT_TRUE(contains(text, "{+sign+}"));
    EXPECT_TRUE(contains(text, "| Hallucination |"));
    EXPECT_EQ(render_trace_report(parse_result(serialize_result(r))), text);
    EXPECT_TRUE(testing::matches_golden(testing::golden_dir() / "cat_bus_report.md", text));
}

TEST(TraceReport, EmitWritesFile) {
    const PipelineResult r = testing::run_demo_cat_bus();
    testing::TempDir dir;
    const auto path = dir / "nested" / "cat_bus.md";
    emit_trace_report(r, path);
    EXPECT_EQ(testing::read_file(path), render_trace_report(r));
    EXPECT_THROW(emit_trace_report(r, "/proc/definitely/not/here.md"), IoError);
}

TEST(CatBusTrace, Golden) {
    const PipelineResult r = testing::run_demo_cat_bus();
    EXPECT_EQ(r.route, Route::KnowledgeAnswered);
    EXPECT_TRUE(testing::matches_golden(testing::golden_dir() / "cat_bus_trace.json", serialize_result(r)));
}

}  // namespace
}  // namespace bottomup
