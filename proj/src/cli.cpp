// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bottomup/config.hpp"
#include "bottomup/errors.hpp"
#include "bottomup/evalkit.hpp"
#include "bottomup/fixture_store.hpp"
#include "bottomup/pipeline.hpp"
#include "bottomup/report.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string image;
    std::string question;
    std::string dataset;
    std::string format = "binary_jsonl";
    std::string config;
    std::string replay;
    std::string record;
    std::string out_dir = "out";
    std::string trace;
    std::string ablate;
    std::string case_id = "ask";
    std::optional<std::size_t> parallelism;
    std::optional<std::size_t> k_examples;
    std::optional<std::size_t> top_k;
};

// Thrown for argument problems found after parsing.
struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_query_flags(CLI::App* sub, Options& o) {
    sub->add_option("--image", o.image, "Image file");
    sub->add_option("--question", o.question, "Question text");
    sub->add_option("--id", o.case_id, "Case id used for the trace file name");
}

void add_run_flags(CLI::App* sub, Options& o) {
    sub->add_option("--dataset", o.dataset, "Dataset file (JSON lines)");
    sub->add_option("--format", o.format, "binary_jsonl or freeform_jsonl");
    sub->add_option("--config", o.config, "INI config file");
    sub->add_option("--replay", o.replay, "Fixture file to replay backend responses from");
    sub->add_option("--record", o.record, "Fixture file to record backend responses to");
    sub->add_option("--out-dir", o.out_dir, "Directory for traces and reports");
    sub->add_option("--parallelism", o.parallelism, "Cases in flight")->check(CLI::PositiveNumber);
    sub->add_option("--ablate", o.ablate, "Stages to disable: tivp,vpv,qav,ci,cv");
    sub->add_option("--k-examples", o.k_examples, "In-context examples for question validation");
    sub->add_option("--top-k", o.top_k, "Search results per claim");
}

void write_file(const fs::path& p, const std::string& content) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.generic_string());
    out << content;
    if (!out) throw IoError("failed writing " + p.generic_string());
}

std::string safe_name(const std::string& id) {
    std::string s;
    for (char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        s += ok ? c : '_';
    }
    if (s.empty() || s == "." || s == "..") s = "case";
    return s;
}

fs::path trace_path(const Options& o, const std::string& id) {
    return fs::path(o.out_dir) / "traces" / (safe_name(id) + ".json");
}

nlohmann::ordered_json timing_json(const std::vector<StageTrace>& traces) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& t : traces) j[t.name] = t.elapsed_ms;
    return j;
}

struct Prepared {
    AppConfig config;
    std::shared_ptr<FixtureStore> store;
};

// Loads config, applies flag overrides and opens the fixture store. Every
// failure here is a usage error.
Prepared prepare(const Options& o, std::optional<FixtureMode> forced) {
    Prepared p;
    p.config = load_config(o.config.empty() ? std::nullopt : std::optional<fs::path>(o.config));
    PipelineConfig& pc = p.config.pipeline;
    if (!o.ablate.empty()) {
        std::vector<std::string> names;
        std::stringstream ss(o.ablate);
        for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
        pc.flags = AblationFlags::without(names);
    }
    if (o.parallelism) pc.parallelism = *o.parallelism;
    if (o.k_examples) pc.k_examples = *o.k_examples;
    if (o.top_k) pc.top_k = *o.top_k;
    pc.validate();

    if (!o.replay.empty() && !o.record.empty()) throw Usage("--replay and --record are mutually exclusive");
    if (forced == FixtureMode::Record && o.record.empty()) throw Usage("record needs --record <fixtures.jsonl>");
    if (forced == FixtureMode::Replay && o.replay.empty()) throw Usage("replay needs --replay <fixtures.jsonl>");
    if (forced == FixtureMode::Record && !o.replay.empty()) throw Usage("record does not take --replay");
    if (forced == FixtureMode::Replay && !o.record.empty()) throw Usage("replay does not take --record");
    if (!o.replay.empty()) {
        if (!fs::exists(o.replay)) throw Usage("fixture file " + o.replay + " does not exist");
        p.store = std::make_shared<FixtureStore>(o.replay, FixtureMode::Replay);
    } else if (!o.record.empty()) {
        p.store = std::make_shared<FixtureStore>(o.record, FixtureMode::Record);
    }
    return p;
}

int run_ask(const Options& o, std::optional<FixtureMode> forced, std::ostream& out, std::ostream& err) {
    if (o.image.empty() || text::is_blank(o.question)) throw Usage("ask needs --image and --question");
    if (!fs::exists(o.image)) throw Usage("image " + o.image + " does not exist");
    Prepared p = prepare(o, forced);
    const Services services = build_services(p.config, p.store);
    try {
        const PipelineResult r = run_query(services, ImageRef::from_file(o.image), o.question, p.config.pipeline, o.case_id);
        const fs::path tp = trace_path(o, o.case_id);
        write_file(tp, serialize_result(r));
        write_file(fs::path(o.out_dir) / "timing.json",
                   nlohmann::ordered_json{{o.case_id, timing_json(r.traces)}}.dump(2) + "\n");
        out << r.final.text << "\n";
        out << "route: " << to_string(r.route) << "\n";
        out << "trace: " << tp.generic_string() << "\n";
        return kExitOk;
    } catch (const PipelineError& e) {
        err << "error: " << e.what() << "\n";
        PipelineResult partial;
        partial.case_id = o.case_id;
        partial.question = o.question;
        partial.effective_question = o.question;
        partial.traces = e.partial_trace();
        const fs::path tp = fs::path(o.out_dir) / "traces" / (safe_name(o.case_id) + ".failed.json");
        write_file(tp, serialize_result(partial));
        err << "partial trace: " << tp.generic_string() << "\n";
        return kExitPipelineFailure;
    }
}

int run_eval(const Options& o, std::optional<FixtureMode> forced, std::ostream& out, std::ostream& err) {
    if (o.dataset.empty()) throw Usage("eval needs --dataset");
    const DatasetFormat format = dataset_format_from_string(o.format);
    const auto cases = load_dataset(o.dataset, format);
    for (const auto& c : cases) {
        if (!fs::exists(c.image)) throw DatasetError(c.line, "image " + c.image.generic_string() + " does not exist");
    }
    Prepared p = prepare(o, forced);
    const Services services = build_services(p.config, p.store);
    Evaluation ev;
    try {
        ev = evaluate(services, cases, format, p.config.pipeline, fs::path(o.dataset).filename().string());
    } catch (const BatchError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& c : e.outcomes()) {
            if (!c.ok()) err << "  " << c.id << ": " << c.error << "\n";
        }
        return kExitPipelineFailure;
    }
    nlohmann::ordered_json timing = nlohmann::ordered_json::object();
    for (const auto& c : ev.outcomes) {
        if (!c.ok()) {
            err << "case " << c.id << " failed: " << c.error << "\n";
            continue;
        }
        write_file(trace_path(o, c.id), serialize_result(*c.result));
        timing[c.id] = timing_json(c.result->traces);
    }
    const std::string text_report = report_text(ev.report);
    write_file(fs::path(o.out_dir) / "metrics.json", report_json(ev.report));
    write_file(fs::path(o.out_dir) / "metrics.txt", text_report);
    write_file(fs::path(o.out_dir) / "timing.json", timing.dump(2) + "\n");
    out << text_report;
    out << "report: " << (fs::path(o.out_dir) / "metrics.json").generic_string() << "\n";
    return ev.report.failed == 0 ? kExitOk : kExitPipelineFailure;
}

int run_report(const Options& o, std::ostream& out) {
    if (o.trace.empty()) throw Usage("report needs --trace <trace.json>");
    std::ifstream in(o.trace, std::ios::binary);
    if (!in) throw Usage("cannot read trace " + o.trace);
    std::ostringstream buf;
    buf << in.rdbuf();
    PipelineResult r;
    try {
        r = parse_result(buf.str());
    } catch (const Error& e) {
        throw Usage(o.trace + ": " + e.what());
    }
    const std::string name = safe_name(r.case_id.empty() ? fs::path(o.trace).stem().string() : r.case_id);
    const fs::path dest = fs::path(o.out_dir) / "reports" / (name + ".md");
    emit_trace_report(r, dest);
    out << "report: " << dest.generic_string() << "\n";
    return kExitOk;
}

}  // namespace

int dispatch_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Bottom-up multimodal question answering with staged hallucination checks", "bottomup"};
    app.require_subcommand(1);
    app.fallthrough(false);
    auto* ask = app.add_subcommand("ask", "Answer one question about one image");
    add_query_flags(ask, o);
    add_run_flags(ask, o);
    auto* eval = app.add_subcommand("eval", "Run a dataset and report metrics");
    add_run_flags(eval, o);
    auto* record = app.add_subcommand("record", "Run ask or eval and record every backend exchange");
    add_query_flags(record, o);
    add_run_flags(record, o);
    auto* replay = app.add_subcommand("replay", "Run ask or eval from recorded backend exchanges only");
    add_query_flags(replay, o);
    add_run_flags(replay, o);
    auto* report = app.add_subcommand("report", "Render a saved trace as a readable report");
    report->add_option("--trace", o.trace, "Trace file written by ask or eval")->required();
    report->add_option("--out-dir", o.out_dir, "Directory for the report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (ask->parsed()) {
            if (!o.dataset.empty()) throw Usage("ask takes --image and --question, not --dataset");
            return run_ask(o, std::nullopt, out, err);
        }
        if (eval->parsed()) {
            if (!o.image.empty() || !o.question.empty()) throw Usage("eval takes --dataset, not --image/--question");
            return run_eval(o, std::nullopt, out, err);
        }
        for (auto [sub, mode] : {std::pair{record, FixtureMode::Record}, std::pair{replay, FixtureMode::Replay}}) {
            if (!sub->parsed()) continue;
            const bool single = !o.image.empty() || !o.question.empty();
            if (single == !o.dataset.empty()) {
                throw Usage(std::string(sub->get_name()) + " needs either --dataset or --image with --question");
            }
            return single ? run_ask(o, mode, out, err) : run_eval(o, mode, out, err);
        }
        if (report->parsed()) return run_report(o, out);
    } catch (const Usage& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DatasetError& e) {
        err << "error: dataset " << e.what() << "\n";
        return kExitUsage;
    } catch (const StoreCorrupt& e) {
        err << "error: fixture file: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPipelineFailure;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace bottomup
