// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bottomup/answerer.hpp"
#include "bottomup/backends.hpp"
#include "bottomup/commonsense.hpp"
#include "bottomup/errors.hpp"
#include "bottomup/exchange.hpp"
#include "bottomup/perception.hpp"
#include "bottomup/prompts.hpp"
#include "bottomup/question_guard.hpp"
#include "bottomup/verification.hpp"

namespace bottomup {

/// Stage switches. Answering always runs.
struct AblationFlags {
    bool tivp = true;  ///< target identification and visual perception
    bool vpv = true;   ///< visual perception verification
    bool qav = true;   ///< question validation and adjustment
    bool ci = true;    ///< commonsense induction
    bool cv = true;    ///< commonsense verification

    /// All stages on except the named ones ("tivp", "vpv", "qav", "ci", "cv").
    /// Throws ConfigError for unknown names.
    static AblationFlags without(const std::vector<std::string>& names);
    /// Throws ConfigError when vpv is on without tivp or cv without ci.
    void validate() const;
    bool all_off() const { return !tivp && !vpv && !qav && !ci && !cv; }
    /// Comma-separated disabled stages, "" when everything is on.
    std::string describe_disabled() const;

    bool operator==(const AblationFlags&) const = default;
};

struct PipelineConfig {
    AblationFlags flags;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
    int perception_retries = 2;
    bool partial_scene_graph = true;
    /// Continue with an empty graph when perception keeps failing.
    bool degrade_on_perception_failure = true;
    VerifyConfig verify;
    std::size_t k_examples = 2;
    std::size_t top_k = 5;
    std::size_t search_concurrency = 4;
    bool rewrite_queries = false;
    AnswerKind answer_kind = AnswerKind::Binary;
    std::vector<std::string> insufficiency_markers{"unanswerable", "cannot be answered", "not possible to determine"};
    /// Cases in flight during a batch.
    std::size_t parallelism = 1;
    /// A failing case does not fail the batch.
    bool continue_on_error = true;

    /// Throws ConfigError.
    void validate() const;
};

/// Backends and prompt assets shared by every query. Implementations must be
/// safe for concurrent use.
struct Services {
    std::shared_ptr<ChatModel> chat;
    std::shared_ptr<PhraseDetector> detector;
    std::shared_ptr<SimilarityScorer> scorer;
    std::shared_ptr<SearchProvider> search;
    PromptSet prompts = PromptSet::defaults();
    GuardExamples examples = GuardExamples::defaults();
};

enum class Route { PerceptionAnswered, KnowledgeAnswered, Degraded };

std::string_view to_string(Route route);
Route route_from_string(std::string_view s);

struct StageTrace {
    /// 1 perception, 2 verification, 3 question validation, 4 claim
    /// induction, 5 claim verification, 6 answering.
    int stage = 0;
    std::string name;
    std::vector<Exchange> exchanges;
    /// The stage's output in canonical text.
    std::string artifact;
    nlohmann::ordered_json decisions = nlohmann::ordered_json::object();
    int retries = 0;
    std::vector<std::string> errors;
    /// Wall time; not part of the serialized trace.
    double elapsed_ms = 0;
};

std::string_view stage_name(int stage);

struct PipelineResult {
    std::string case_id;
    std::string question;
    /// Question passed to answering (the original when stage 3 is off).
    std::string effective_question;
    FinalAnswer final;
    Route route = Route::PerceptionAnswered;
    std::vector<StageTrace> traces;
    /// Present when stage 2 ran.
    std::optional<HallucinationStats> stats;

    const StageTrace* trace(int stage) const;
};

class PipelineError : public Error {
public:
    PipelineError(int stage, std::string message, std::vector<StageTrace> partial)
        : Error("stage " + std::to_string(stage) + " (" + std::string(stage_name(stage)) + ") failed: " + message),
          stage_(stage), partial_(std::move(partial)) {}

    int stage() const { return stage_; }
    /// Traces of the completed stages plus the failing one.
    const std::vector<StageTrace>& partial_trace() const { return partial_; }

private:
    int stage_;
    std::vector<StageTrace> partial_;
};

/// Runs the enabled stages in order. With every switch off the question goes
/// to the chat model unchanged in a single call. Throws ConfigError for an
/// invalid config or missing services and PipelineError for stage failures.
PipelineResult run_query(const Services& services, const ImageRef& image, std::string_view question,
                         const PipelineConfig& config, std::string case_id = {});

struct BatchCase {
    std::string id;
    ImageRef image;
    std::string question;
};

struct CaseOutcome {
    std::string id;
    std::optional<PipelineResult> result;
    std::string error;
    /// Failing stage, 0 when the failure happened outside any stage.
    int failed_stage = 0;
    std::vector<StageTrace> partial_trace;

    bool ok() const { return result.has_value(); }
};

class BatchError : public Error {
public:
    explicit BatchError(std::vector<CaseOutcome> outcomes);
    const std::vector<CaseOutcome>& outcomes() const { return outcomes_; }

private:
    std::vector<CaseOutcome> outcomes_;
};

/// Runs every case with at most config.parallelism in flight; outcomes come
/// back in input order. When config.continue_on_error is off and a case
/// fails, throws BatchError carrying every outcome.
std::vector<CaseOutcome> run_batch(const Services& services, const std::vector<BatchCase>& cases,
                                   const PipelineConfig& config);

// Trace serialization. The text form is deterministic: identical results
// give identical bytes. Timing is left out.
nlohmann::ordered_json to_json(const PipelineResult& result);
PipelineResult result_from_json(const nlohmann::ordered_json& j);
std::string serialize_result(const PipelineResult& result);
/// Throws Error for malformed text.
PipelineResult parse_result(std::string_view text);

nlohmann::ordered_json to_json(const StageTrace& trace);
StageTrace trace_from_json(const nlohmann::ordered_json& j);

}  // namespace bottomup
