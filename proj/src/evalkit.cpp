// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bottomup/answerer.hpp"
#include "bottomup/errors.hpp"
#include "bottomup/question_guard.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(DatasetFormat f) {
    return f == DatasetFormat::BinaryJsonl ? "binary_jsonl" : "freeform_jsonl";
}

DatasetFormat dataset_format_from_string(std::string_view s) {
    if (s == "binary_jsonl") return DatasetFormat::BinaryJsonl;
    if (s == "freeform_jsonl") return DatasetFormat::FreeformJsonl;
    throw ConfigError("unknown dataset format \"" + std::string(s) + "\" (expected binary_jsonl or freeform_jsonl)");
}

namespace {

std::string required_string(const json& j, const char* key, std::size_t line) {
    const auto it = j.find(key);
    if (it == j.end()) throw DatasetError(line, std::string("missing \"") + key + "\"");
    if (!it->is_string()) throw DatasetError(line, std::string("\"") + key + "\" must be a string");
    std::string v = it->get<std::string>();
    if (text::is_blank(v)) throw DatasetError(line, std::string("\"") + key + "\" is empty");
    return v;
}

double pct(std::size_t num, std::size_t den) { return std::round(1000.0 * static_cast<double>(num) / static_cast<double>(den)) / 10.0; }

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt1(*v) : std::string("-"); }

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::vector<EvalCase> parse_dataset(std::string_view text_in, DatasetFormat format,
                                    const std::filesystem::path& base_dir) {
    std::vector<EvalCase> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text_in)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw DatasetError(line_no, "not a JSON object");
        EvalCase c;
        c.line = line_no;
        c.id = required_string(j, "id", line_no);
        const std::filesystem::path image(required_string(j, "image", line_no));
        c.image = image.is_absolute() || base_dir.empty() ? image : base_dir / image;
        c.question = required_string(j, "question", line_no);
        c.gold = required_string(j, "label", line_no);
        if (format == DatasetFormat::BinaryJsonl) {
            const std::string g = text::to_lower(text::trim(c.gold));
            if (g != "yes" && g != "no") throw DatasetError(line_no, "label \"" + c.gold + "\" is not yes or no");
            c.gold = g;
        }
        if (const auto it = j.find("category"); it != j.end() && !it->is_null()) {
            if (!it->is_string()) throw DatasetError(line_no, "\"category\" must be a string");
            c.category = it->get<std::string>();
        }
        for (const auto& prev : out) {
            if (prev.id == c.id) throw DatasetError(line_no, "duplicate id \"" + c.id + "\"");
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<EvalCase> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset " + path.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), format, path.parent_path());
}

std::vector<EditPair> parse_edit_pairs(std::string_view text) {
    std::vector<EditPair> pairs;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw DatasetError(line_no, "not a JSON object");
        EditPair p;
        try {
            p.original = j.at("original").get<std::string>();
            p.adjusted = j.at("adjusted").get<std::string>();
            const long long k = j.value("k", 0LL);
            if (k < 0) throw DatasetError(line_no, "k must be non-negative");
            p.k = static_cast<std::size_t>(k);
        } catch (const json::exception& e) {
            throw DatasetError(line_no, e.what());
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::vector<EditPair> load_edit_pairs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read edit pairs " + path.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_edit_pairs(buf.str());
}

double round1(double percent) { return std::round(percent * 10.0) / 10.0; }

Confusion& Confusion::operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    abstain_on_yes += o.abstain_on_yes;
    abstain_on_no += o.abstain_on_no;
    return *this;
}

double harmonic_f1(double precision, double recall) {
    if (precision + recall == 0) return 0;
    return 2 * precision * recall / (precision + recall);
}

BinaryMetrics metrics_from_confusion(const Confusion& c) {
    const std::size_t n = c.total();
    if (n == 0) throw EmptyInput("no predictions to score");
    BinaryMetrics m;
    m.confusion = c;
    const std::size_t gold_yes = c.tp + c.fn + c.abstain_on_yes;
    m.accuracy = pct(c.tp + c.tn, n);
    m.yes_rate = pct(c.tp + c.fp, n);
    if (c.tp + c.fp > 0) m.precision = pct(c.tp, c.tp + c.fp);
    if (gold_yes > 0) m.recall = pct(c.tp, gold_yes);
    // 2PR / (P + R) on exact fractions: 2tp / (2tp + fp + missed gold yes).
    if (m.precision && m.recall) m.f1 = pct(2 * c.tp, 2 * c.tp + c.fp + (gold_yes - c.tp));
    return m;
}

BinaryMetrics score_binary(const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
    if (preds.size() != golds.size()) throw LengthMismatch(preds.size(), golds.size());
    if (preds.empty()) throw EmptyInput("no predictions to score");
    Confusion c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool gold_yes = golds[i] == "yes";
        if (!gold_yes && golds[i] != "no") throw DatasetError(i + 1, "gold label \"" + golds[i] + "\" is not yes or no");
        if (preds[i] == "yes") {
            ++(gold_yes ? c.tp : c.fp);
        } else if (preds[i] == "no") {
            ++(gold_yes ? c.fn : c.tn);
        } else {
            ++(gold_yes ? c.abstain_on_yes : c.abstain_on_no);
        }
    }
    return metrics_from_confusion(c);
}

double score_freeform_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& golds) {
    if (preds.size() != golds.size()) throw LengthMismatch(preds.size(), golds.size());
    if (preds.empty()) throw EmptyInput("no predictions to score");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (normalize_answer(preds[i], AnswerKind::FreeForm) == normalize_answer(golds[i], AnswerKind::FreeForm)) ++hits;
    }
    return pct(hits, preds.size());
}

double question_similarity(SimilarityScorer& scorer, std::string_view original, std::string_view adjusted) {
    return score_similarity(scorer, ImageRef::from_bytes(std::string(original), "text/plain"), Box{0, 0, 1, 1}, adjusted);
}

EditStats edit_stats(const std::vector<EditPair>& pairs, SimilarityScorer* scorer) {
    struct Acc {
        std::size_t n = 0;
        double edits = 0;
        double sim = 0;
    };
    Acc all;
    std::map<std::size_t, Acc> by_k;
    for (const auto& p : pairs) {
        const double e = static_cast<double>(word_edit_count(p.original, p.adjusted));
        const double s = scorer ? question_similarity(*scorer, p.original, p.adjusted) : 0.0;
        for (Acc* a : {&all, &by_k[p.k]}) {
            ++a->n;
            a->edits += e;
            a->sim += s;
        }
    }
    EditStats out;
    out.count = all.n;
    if (all.n > 0) {
        out.mean_edits = all.edits / static_cast<double>(all.n);
        if (scorer) out.mean_similarity = all.sim / static_cast<double>(all.n);
    }
    for (const auto& [k, a] : by_k) {
        EditRow row{k, a.n, a.edits / static_cast<double>(a.n), std::nullopt};
        if (scorer) row.mean_similarity = a.sim / static_cast<double>(a.n);
        out.per_k.push_back(row);
    }
    return out;
}

HallucinationRates aggregate_hallucination_rates(const std::vector<HallucinationStats>& stats) {
    HallucinationStats sum;
    for (const auto& s : stats) sum += s;
    HallucinationRates r;
    if (sum.objects_total > 0) r.objects = pct(sum.objects_removed, sum.objects_total);
    if (sum.attributes_total > 0) r.attributes = pct(sum.attributes_removed, sum.attributes_total);
    if (sum.relations_total > 0) r.relations = pct(sum.relations_removed, sum.relations_total);
    return r;
}

Evaluation evaluate(const Services& services, const std::vector<EvalCase>& cases, DatasetFormat format,
                    const PipelineConfig& config, std::string dataset_name) {
    std::vector<BatchCase> batch;
    batch.reserve(cases.size());
    for (const auto& c : cases) batch.push_back({c.id, ImageRef::from_file(c.image), c.question});

    Evaluation ev;
    ev.outcomes = run_batch(services, batch, config);
    EvalReport& r = ev.report;
    r.dataset = std::move(dataset_name);
    r.format = format;
    r.ablation = config.flags.describe_disabled();
    r.cases = cases.size();

    std::vector<std::string> preds;
    std::vector<std::string> golds;
    std::vector<HallucinationStats> stats;
    std::vector<EditPair> pairs;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const CaseOutcome& o = ev.outcomes[i];
        golds.push_back(cases[i].gold);
        if (!o.ok()) {
            ++r.failed;
            ++r.routes["Failed"];
            preds.emplace_back(format == DatasetFormat::BinaryJsonl ? "abstain" : "");
            continue;
        }
        const PipelineResult& res = *o.result;
        ++r.routes[std::string(to_string(res.route))];
        preds.push_back(format == DatasetFormat::BinaryJsonl ? res.final.normalized : res.final.text);
        if (res.stats) stats.push_back(*res.stats);
        if (const StageTrace* t = res.trace(3)) {
            pairs.push_back({res.question, t->artifact, config.k_examples});
        }
    }
    if (!cases.empty()) {
        if (format == DatasetFormat::BinaryJsonl) {
            r.binary = score_binary(preds, golds);
        } else {
            r.freeform_accuracy = score_freeform_accuracy(preds, golds);
        }
    }
    r.rates = aggregate_hallucination_rates(stats);
    r.edits = edit_stats(pairs, services.scorer.get());
    return ev;
}

std::string report_json(const EvalReport& r) {
    ordered_json j{{"dataset", r.dataset},
                   {"format", std::string(to_string(r.format))},
                   {"ablation", r.ablation},
                   {"cases", r.cases},
                   {"failed", r.failed}};
    if (r.binary) {
        const auto& m = *r.binary;
        const auto& c = m.confusion;
        j["binary"] = {{"accuracy", m.accuracy},
                       {"precision", opt_json(m.precision)},
                       {"recall", opt_json(m.recall)},
                       {"f1", opt_json(m.f1)},
                       {"yes_rate", m.yes_rate},
                       {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn},
                                      {"abstain", c.abstain()}, {"abstain_on_yes", c.abstain_on_yes},
                                      {"abstain_on_no", c.abstain_on_no}}}};
    }
    if (r.freeform_accuracy) j["freeform_accuracy"] = *r.freeform_accuracy;
    j["hallucination_rates"] = {{"objects", opt_json(r.rates.objects)},
                                {"attributes", opt_json(r.rates.attributes)},
                                {"relations", opt_json(r.rates.relations)}};
    ordered_json per_k = ordered_json::array();
    for (const auto& row : r.edits.per_k) {
        per_k.push_back({{"k", row.k}, {"count", row.count}, {"mean_edits", row.mean_edits},
                         {"mean_similarity", opt_json(row.mean_similarity)}});
    }
    j["edits"] = {{"count", r.edits.count}, {"mean_edits", r.edits.mean_edits},
                  {"mean_similarity", opt_json(r.edits.mean_similarity)}, {"per_k", std::move(per_k)}};
    j["routes"] = r.routes;
    return j.dump(2) + "\n";
}

std::string report_text(const EvalReport& r) {
    std::ostringstream o;
    o << "dataset: " << (r.dataset.empty() ? "-" : r.dataset) << "\n";
    o << "ablation: " << (r.ablation.empty() ? "none" : "w/o " + r.ablation) << "\n";
    o << "cases: " << r.cases << " (failed " << r.failed << ")\n\n";
    char line[160];
    if (r.binary) {
        const auto& m = *r.binary;
        std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %-8s\n", "Acc.", "Prec.", "Rec.", "F1", "Yes");
        o << line;
        std::snprintf(line, sizeof line, "%-8s %-8s %-8s %-8s %-8s\n", fmt1(m.accuracy).c_str(),
                      fmt_opt(m.precision).c_str(), fmt_opt(m.recall).c_str(), fmt_opt(m.f1).c_str(),
                      fmt1(m.yes_rate).c_str());
        o << line;
        const auto& c = m.confusion;
        o << "\nconfusion: tp " << c.tp << ", fp " << c.fp << ", fn " << c.fn << ", tn " << c.tn << ", abstain "
          << c.abstain() << "\n";
    }
    if (r.freeform_accuracy) o << "Acc.\n" << fmt1(*r.freeform_accuracy) << "\n";
    o << "\nhallucination rate (%): objects " << fmt_opt(r.rates.objects) << ", attributes "
      << fmt_opt(r.rates.attributes) << ", relations " << fmt_opt(r.rates.relations) << "\n";
    o << "question edits: " << r.edits.count << " pair(s), mean " << fmt1(r.edits.mean_edits) << " word(s)";
    if (r.edits.mean_similarity) {
        char sim[32];
        std::snprintf(sim, sizeof sim, "%.3f", *r.edits.mean_similarity);
        o << ", mean similarity " << sim;
    }
    o << "\n";
    if (r.edits.per_k.size() > 1) {
        for (const auto& row : r.edits.per_k) {
            o << "  k=" << row.k << ": " << row.count << " pair(s), mean " << fmt1(row.mean_edits) << "\n";
        }
    }
    o << "routes:";
    for (const auto& [route, n] : r.routes) o << " " << route << "=" << n;
    o << "\n";
    return o.str();
}

}  // namespace bottomup
