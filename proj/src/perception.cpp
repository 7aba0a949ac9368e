// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/perception.hpp"

#include <algorithm>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

namespace {

std::string corrective_note(const std::string& previous_reply, const std::string& problem) {
    return "Your previous reply could not be used.\nProblem:\n" + problem + "\nPrevious reply:\n" + previous_reply +
           "\nReply again with only the scene graph in the JSON format described above.";
}

bool only_dangling(const ValidationReport& report) {
    return std::all_of(report.findings.begin(), report.findings.end(),
                       [](const Finding& f) { return f.kind == FindingKind::DanglingEndpoint; });
}

// Removes relations with an unknown endpoint; returns what was removed.
std::vector<SgRelation> prune_dangling(SceneGraph& sg) {
    std::vector<SgRelation> pruned;
    std::vector<SgRelation> kept;
    for (auto& r : sg.relations) {
        if (sg.find(r.source) && sg.find(r.target)) {
            kept.push_back(std::move(r));
        } else {
            pruned.push_back(std::move(r));
        }
    }
    sg.relations = std::move(kept);
    return pruned;
}

}  // namespace

PerceptionResult extract_partial_scene_graph(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                             std::string_view question, const PerceptionOptions& options) {
    if (text::is_blank(question)) throw InvalidRequest("perception needs a non-empty question");
    if (options.retries < 0) throw InvalidRequest("retries must be non-negative");

    const std::string question_slot = options.partial ? std::string(question) : std::string(kWholeSceneInstruction);
    const std::string prompt = render_prompt(prompts.get(Stage::P1), {{"question", question_slot}});

    PerceptionResult result;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        ChatRequest req;
        req.image = image;
        req.segments.push_back(prompt);
        if (attempt > 0) req.segments.push_back(corrective_note(result.exchanges.back().reply, result.attempt_errors.back()));
        req.max_tokens = options.max_tokens;
        req.seed = options.seed;

        std::string reply = chat_complete(chat, req);
        result.exchanges.push_back({req.joined(), reply});

        std::string problem;
        try {
            SceneGraph sg = parse_scene_graph(reply);
            const ValidationReport report = validate_scene_graph(sg);
            if (report.ok() || only_dangling(report)) {
                result.pruned_relations = prune_dangling(sg);
                result.scene_graph = std::move(sg);
                result.raw_reply = std::move(reply);
                result.retries_used = attempt;
                return result;
            }
            problem = report.summary();
        } catch (const NoJsonFound& e) {
            problem = e.what();
        } catch (const SchemaMismatch& e) {
            problem = e.what();
        }
        result.attempt_errors.push_back(problem);
    }
    std::string message = "no usable scene graph after " + std::to_string(options.retries + 1) + " attempt(s): " +
                          result.attempt_errors.back();
    throw PerceptionFailed(std::move(message), std::move(result.exchanges), std::move(result.attempt_errors));
}

}  // namespace bottomup
