// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/pipeline.hpp"

#include <chrono>

#include "bottomup/parallel.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

using nlohmann::ordered_json;

AblationFlags AblationFlags::without(const std::vector<std::string>& names) {
    AblationFlags f;
    for (const auto& raw : names) {
        const std::string n = text::to_lower(text::trim(raw));
        if (n == "tivp") {
            f.tivp = false;
        } else if (n == "vpv") {
            f.vpv = false;
        } else if (n == "qav") {
            f.qav = false;
        } else if (n == "ci") {
            f.ci = false;
        } else if (n == "cv") {
            f.cv = false;
        } else if (!n.empty()) {
            throw ConfigError("unknown stage \"" + raw + "\" (expected tivp, vpv, qav, ci or cv)");
        }
    }
    return f;
}

void AblationFlags::validate() const {
    if (vpv && !tivp) throw ConfigError("vpv needs tivp: verification has no scene graph without perception");
    if (cv && !ci) throw ConfigError("cv needs ci: there are no claims to verify without induction");
}

std::string AblationFlags::describe_disabled() const {
    std::vector<std::string> off;
    if (!tivp) off.emplace_back("tivp");
    if (!vpv) off.emplace_back("vpv");
    if (!qav) off.emplace_back("qav");
    if (!ci) off.emplace_back("ci");
    if (!cv) off.emplace_back("cv");
    return text::join(off, ",");
}

void PipelineConfig::validate() const {
    flags.validate();
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    if (perception_retries < 0) throw ConfigError("perception retries must be non-negative");
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    if (search_concurrency < 1) throw ConfigError("search concurrency must be at least 1");
    if (verify.max_concurrency < 1) throw ConfigError("verification concurrency must be at least 1");
    for (double t : {verify.object_threshold, verify.attribute_threshold, verify.relation_threshold, verify.iou_floor}) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("verification thresholds must lie in [0, 1]");
    }
}

std::string_view to_string(Route route) {
    switch (route) {
        case Route::PerceptionAnswered: return "PerceptionAnswered";
        case Route::KnowledgeAnswered: return "KnowledgeAnswered";
        case Route::Degraded: return "Degraded";
    }
    return "?";
}

Route route_from_string(std::string_view s) {
    if (s == "PerceptionAnswered") return Route::PerceptionAnswered;
    if (s == "KnowledgeAnswered") return Route::KnowledgeAnswered;
    if (s == "Degraded") return Route::Degraded;
    throw Error("unknown route \"" + std::string(s) + "\"");
}

std::string_view stage_name(int stage) {
    switch (stage) {
        case 1: return "perception";
        case 2: return "verification";
        case 3: return "question_validation";
        case 4: return "claim_induction";
        case 5: return "claim_verification";
        case 6: return "answering";
    }
    return "pipeline";
}

const StageTrace* PipelineResult::trace(int stage) const {
    for (const auto& t : traces) {
        if (t.stage == stage) return &t;
    }
    return nullptr;
}

BatchError::BatchError(std::vector<CaseOutcome> outcomes)
    : Error([&] {
          std::size_t failed = 0;
          for (const auto& o : outcomes) failed += o.ok() ? 0 : 1;
          return std::to_string(failed) + " of " + std::to_string(outcomes.size()) + " case(s) failed";
      }()),
      outcomes_(std::move(outcomes)) {}

namespace {

ordered_json box_json(const Box& b) { return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

ordered_json relation_json(const SgRelation& r) {
    return {{"source", r.source}, {"target", r.target}, {"relation", r.relation}};
}

ordered_json check_json(const ElementCheck& c) {
    ordered_json j{{"kind", std::string(to_string(c.kind))}};
    if (c.kind == ElementKind::Relation) {
        j["relation"] = relation_json(c.relation);
    } else {
        j["object"] = c.object;
    }
    if (c.kind == ElementKind::Attribute) j["attribute"] = c.attribute;
    j["phrase"] = c.phrase;
    j["kept"] = c.kept;
    if (c.reason) j["reason"] = std::string(to_string(*c.reason));
    if (c.score) j["score"] = *c.score;
    if (c.box) j["box"] = box_json(*c.box);
    return j;
}

ordered_json stats_json(const HallucinationStats& s) {
    return {{"objects_total", s.objects_total},       {"objects_removed", s.objects_removed},
            {"attributes_total", s.attributes_total}, {"attributes_removed", s.attributes_removed},
            {"relations_total", s.relations_total},   {"relations_removed", s.relations_removed}};
}

HallucinationStats stats_from_json(const ordered_json& j) {
    HallucinationStats s;
    s.objects_total = j.at("objects_total").get<std::size_t>();
    s.objects_removed = j.at("objects_removed").get<std::size_t>();
    s.attributes_total = j.at("attributes_total").get<std::size_t>();
    s.attributes_removed = j.at("attributes_removed").get<std::size_t>();
    s.relations_total = j.at("relations_total").get<std::size_t>();
    s.relations_removed = j.at("relations_removed").get<std::size_t>();
    return s;
}

ordered_json claims_json(const std::vector<Claim>& claims) {
    ordered_json a = ordered_json::array();
    for (const auto& c : claims) a.push_back({{"index", c.index}, {"text", c.text}});
    return a;
}

using Clock = std::chrono::steady_clock;

class Run {
public:
    // Runs `body` as stage `n`, filling its trace. Failures become
    // PipelineError carrying the traces so far.
    template <class Body>
    void stage(int n, Body&& body) {
        StageTrace t;
        t.stage = n;
        t.name = std::string(stage_name(n));
        const auto start = Clock::now();
        try {
            body(t);
        } catch (const PipelineError&) {
            throw;
        } catch (const PerceptionFailed& e) {
            t.exchanges = e.exchanges();
            t.errors = e.attempt_errors();
            t.errors.emplace_back(e.what());
            t.retries = e.attempts() - 1;
            finish(t, start);
            throw PipelineError(n, e.what(), traces_);
        } catch (const std::exception& e) {
            t.errors.emplace_back(e.what());
            finish(t, start);
            throw PipelineError(n, e.what(), traces_);
        }
        finish(t, start);
    }

    std::vector<StageTrace> take() { return std::move(traces_); }

private:
    void finish(StageTrace& t, Clock::time_point start) {
        t.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        traces_.push_back(std::move(t));
    }

    std::vector<StageTrace> traces_;
};

void require(bool present, std::string_view what) {
    if (!present) throw ConfigError(std::string(what) + " backend is required by the enabled stages");
}

}  // namespace

PipelineResult run_query(const Services& services, const ImageRef& image, std::string_view question,
                         const PipelineConfig& config, std::string case_id) {
    config.validate();
    if (text::is_blank(question)) throw InvalidRequest("question must not be empty");
    const AblationFlags& flags = config.flags;
    require(services.chat != nullptr, "chat");
    if (flags.vpv) {
        require(services.detector != nullptr, "detector");
        require(services.scorer != nullptr, "similarity");
    }
    if (flags.cv) require(services.search != nullptr, "search");
    if (flags.qav && config.k_examples > services.examples.size()) {
        throw ConfigError("k_examples " + std::to_string(config.k_examples) + " exceeds the " +
                          std::to_string(services.examples.size()) + " available guard examples");
    }

    PipelineResult result;
    result.case_id = std::move(case_id);
    result.question = std::string(question);
    result.effective_question = result.question;
    Run run;
    ChatModel& chat = *services.chat;

    if (flags.all_off()) {
        run.stage(6, [&](StageTrace& t) {
            ChatRequest req;
            req.image = image;
            req.segments = {result.question};
            req.max_tokens = config.max_tokens;
            req.seed = config.seed;
            const std::string reply = chat_complete(chat, req);
            t.exchanges.push_back({req.joined(), reply});
            result.final = make_final_answer(text::trim(reply), config.answer_kind);
            result.route = Route::PerceptionAnswered;
            t.artifact = result.final.text;
            t.decisions = {{"mode", "direct"},
                           {"route", std::string(to_string(result.route))},
                           {"normalized", result.final.normalized}};
        });
        result.traces = run.take();
        return result;
    }

    SceneGraph graph;
    if (flags.tivp) {
        run.stage(1, [&](StageTrace& t) {
            PerceptionOptions opts;
            opts.retries = config.perception_retries;
            opts.partial = config.partial_scene_graph;
            opts.max_tokens = config.max_tokens;
            opts.seed = config.seed;
            bool degraded = false;
            try {
                PerceptionResult p = extract_partial_scene_graph(chat, services.prompts, image, question, opts);
                graph = std::move(p.scene_graph);
                t.exchanges = std::move(p.exchanges);
                t.errors = std::move(p.attempt_errors);
                t.retries = p.retries_used;
                ordered_json pruned = ordered_json::array();
                for (const auto& r : p.pruned_relations) pruned.push_back(relation_json(r));
                t.decisions["pruned_relations"] = std::move(pruned);
            } catch (const PerceptionFailed& e) {
                if (!config.degrade_on_perception_failure) throw;
                degraded = true;
                graph = {};
                t.exchanges = e.exchanges();
                t.errors = e.attempt_errors();
                t.errors.emplace_back(e.what());
                t.retries = e.attempts() - 1;
                t.decisions["pruned_relations"] = ordered_json::array();
            }
            t.decisions["partial"] = config.partial_scene_graph;
            t.decisions["degraded"] = degraded;
            t.artifact = canonicalize(graph);
        });
    }

    if (flags.vpv) {
        run.stage(2, [&](StageTrace& t) {
            VerificationOutcome v = verify_scene_graph(*services.detector, *services.scorer, graph, image, config.verify);
            graph = std::move(v.verified.graph);
            result.stats = v.stats;
            ordered_json prov = ordered_json::array();
            for (const auto& c : v.verified.provenance) prov.push_back(check_json(c));
            ordered_json boxes = ordered_json::object();
            for (const auto& [id, box] : v.verified.object_boxes) boxes[std::to_string(id)] = box_json(box);
            t.decisions["provenance"] = std::move(prov);
            t.decisions["object_boxes"] = std::move(boxes);
            t.decisions["stats"] = stats_json(v.stats);
            t.artifact = canonicalize(graph);
        });
    }

    if (flags.qav) {
        run.stage(3, [&](StageTrace& t) {
            GuardOptions opts;
            opts.k_examples = config.k_examples;
            opts.max_tokens = config.max_tokens;
            opts.seed = config.seed;
            GuardResult g = validate_and_adjust(chat, services.prompts, services.examples, image, graph, question, opts);
            t.exchanges.push_back(std::move(g.exchange));
            const AdjustedQuestion& q = g.question;
            ordered_json conflicts = ordered_json::array();
            for (const auto& c : q.conflicts) {
                conflicts.push_back({{"kind", std::string(to_string(c.kind))}, {"description", c.description}});
            }
            t.decisions["k_examples"] = config.k_examples;
            t.decisions["original"] = q.original;
            t.decisions["adjusted"] = q.adjusted;
            t.decisions["changed"] = q.changed;
            t.decisions["guard_degraded"] = q.guard_degraded;
            if (q.guard_degraded) t.errors.push_back(q.degraded_reason);
            t.decisions["conflicts"] = std::move(conflicts);
            t.artifact = q.adjusted;
            result.effective_question = q.adjusted;
        });
    }

    const std::string& q_bar = result.effective_question;
    AnswerOptions answer_opts;
    answer_opts.kind = config.answer_kind;
    answer_opts.insufficiency_markers = config.insufficiency_markers;
    answer_opts.max_tokens = config.max_tokens;
    answer_opts.seed = config.seed;

    // Stage 6 starts with the perception-level attempt; stages 4 and 5 only
    // run when it comes back insufficient, so its exchange is carried into
    // the stage-6 trace afterwards.
    AnswerOutcome attempt;
    const auto attempt_start = Clock::now();
    try {
        attempt = answer_perception_level(chat, services.prompts, image, graph, q_bar, answer_opts);
    } catch (...) {
        run.stage(6, [](StageTrace&) { throw; });
    }
    const double attempt_ms = std::chrono::duration<double, std::milli>(Clock::now() - attempt_start).count();

    std::vector<Claim> kept;
    if (!attempt.sufficient && flags.ci) {
        std::vector<Claim> induced;
        run.stage(4, [&](StageTrace& t) {
            InductionOptions opts;
            opts.max_tokens = config.max_tokens;
            opts.seed = config.seed;
            InductionResult ind = induce_claims(chat, services.prompts, image, graph, q_bar, opts);
            t.exchanges.push_back(std::move(ind.exchange));
            induced = std::move(ind.claims);
            t.decisions["claims"] = claims_json(induced);
            t.artifact = render_claims(induced);
        });
        if (flags.cv) {
            run.stage(5, [&](StageTrace& t) {
                ClaimVerifyOptions opts;
                opts.top_k = config.top_k;
                opts.max_concurrency = config.search_concurrency;
                opts.rewrite_queries = config.rewrite_queries;
                opts.max_tokens = config.max_tokens;
                opts.seed = config.seed;
                ClaimVerification cv = verify_claims(chat, *services.search, services.prompts, induced, opts);
                t.exchanges = std::move(cv.exchanges);
                ordered_json judgments = ordered_json::array();
                for (const auto& c : induced) {
                    const ClaimJudgment& j = cv.verified.judgments.at(c.index);
                    ordered_json evidence = ordered_json::array();
                    for (const auto& f : j.evidence) {
                        evidence.push_back({{"rank", f.rank}, {"title", f.title}, {"snippet", f.snippet},
                                            {"source_url", f.source_url}});
                    }
                    ordered_json jj{{"index", c.index}, {"text", c.text}, {"label", std::string(to_string(j.label))},
                                    {"query", j.query}, {"evidence", std::move(evidence)}};
                    if (!j.search_error.empty()) {
                        jj["search_error"] = j.search_error;
                        t.errors.push_back("claim " + std::to_string(c.index) + ": " + j.search_error);
                    }
                    judgments.push_back(std::move(jj));
                }
                t.decisions["top_k"] = config.top_k;
                t.decisions["judgments"] = std::move(judgments);
                kept = std::move(cv.verified.kept);
                t.decisions["kept"] = claims_json(kept);
                t.artifact = render_claims(kept);
            });
        } else {
            kept = induced;
        }
    }

    run.stage(6, [&](StageTrace& t) {
        t.exchanges.push_back(attempt.exchange);
        t.decisions["perception_level"] = attempt.sufficient ? "answered" : "insufficient";
        if (attempt.sufficient) {
            result.route = Route::PerceptionAnswered;
            result.final = make_final_answer(attempt.text, config.answer_kind);
        } else if (flags.ci) {
            KnowledgeAnswer k = answer_with_knowledge(chat, services.prompts, image, graph, kept, q_bar, answer_opts);
            t.exchanges.push_back(std::move(k.exchange));
            result.route = Route::KnowledgeAnswered;
            result.final = std::move(k.answer);
            t.decisions["claims_used"] = claims_json(kept);
        } else {
            result.route = Route::Degraded;
            result.final = make_final_answer(attempt.text, config.answer_kind);
        }
        t.decisions["route"] = std::string(to_string(result.route));
        t.decisions["normalized"] = result.final.normalized;
        t.artifact = result.final.text;
        t.elapsed_ms += attempt_ms;
    });
    result.traces = run.take();
    return result;
}

std::vector<CaseOutcome> run_batch(const Services& services, const std::vector<BatchCase>& cases,
                                   const PipelineConfig& config) {
    config.validate();
    auto outcomes = parallel_map(cases.size(), config.parallelism, [&](std::size_t i) {
        CaseOutcome o;
        o.id = cases[i].id;
        try {
            o.result = run_query(services, cases[i].image, cases[i].question, config, cases[i].id);
        } catch (const PipelineError& e) {
            o.error = e.what();
            o.failed_stage = e.stage();
            o.partial_trace = e.partial_trace();
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return o;
    });
    if (!config.continue_on_error) {
        for (const auto& o : outcomes) {
            if (!o.ok()) throw BatchError(std::move(outcomes));
        }
    }
    return outcomes;
}

ordered_json to_json(const StageTrace& t) {
    ordered_json ex = ordered_json::array();
    for (const auto& e : t.exchanges) ex.push_back({{"prompt", e.prompt}, {"reply", e.reply}});
    return {{"stage", t.stage},     {"name", t.name},       {"exchanges", std::move(ex)},
            {"artifact", t.artifact}, {"decisions", t.decisions}, {"retries", t.retries},
            {"errors", t.errors}};
}

StageTrace trace_from_json(const ordered_json& j) {
    StageTrace t;
    t.stage = j.at("stage").get<int>();
    t.name = j.at("name").get<std::string>();
    for (const auto& e : j.at("exchanges")) {
        t.exchanges.push_back({e.at("prompt").get<std::string>(), e.at("reply").get<std::string>()});
    }
    t.artifact = j.at("artifact").get<std::string>();
    t.decisions = j.at("decisions");
    t.retries = j.at("retries").get<int>();
    t.errors = j.at("errors").get<std::vector<std::string>>();
    return t;
}

ordered_json to_json(const PipelineResult& r) {
    ordered_json traces = ordered_json::array();
    for (const auto& t : r.traces) traces.push_back(to_json(t));
    ordered_json j{{"case_id", r.case_id},
                   {"question", r.question},
                   {"effective_question", r.effective_question},
                   {"route", std::string(to_string(r.route))},
                   {"final", {{"text", r.final.text},
                              {"normalized", r.final.normalized},
                              {"kind", std::string(to_string(r.final.kind))}}}};
    if (r.stats) j["hallucination_stats"] = stats_json(*r.stats);
    j["traces"] = std::move(traces);
    return j;
}

PipelineResult result_from_json(const ordered_json& j) {
    PipelineResult r;
    r.case_id = j.at("case_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.effective_question = j.at("effective_question").get<std::string>();
    r.route = route_from_string(j.at("route").get<std::string>());
    const auto& f = j.at("final");
    r.final.text = f.at("text").get<std::string>();
    r.final.normalized = f.at("normalized").get<std::string>();
    r.final.kind = answer_kind_from_string(f.at("kind").get<std::string>());
    if (j.contains("hallucination_stats")) r.stats = stats_from_json(j.at("hallucination_stats"));
    for (const auto& t : j.at("traces")) r.traces.push_back(trace_from_json(t));
    return r;
}

std::string serialize_result(const PipelineResult& result) {
    return to_json(result).dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n";
}

PipelineResult parse_result(std::string_view text) {
    try {
        return result_from_json(ordered_json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed trace: ") + e.what());
    }
}

}  // namespace bottomup
