// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

using nlohmann::ordered_json;

std::string mark_word_changes(std::string_view before, std::string_view after) {
    const auto a = text::split_whitespace(before);
    const auto b = text::split_whitespace(after);
    auto key = [](const std::string& w) { return text::to_lower(text::strip_punctuation(w)); };
    std::vector<std::string> ka;
    std::vector<std::string> kb;
    for (const auto& w : a) ka.push_back(key(w));
    for (const auto& w : b) kb.push_back(key(w));

    // lcs[i][j]: common subsequence length of a[i..] and b[j..].
    std::vector<std::vector<std::size_t>> lcs(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = a.size(); i-- > 0;) {
        for (std::size_t j = b.size(); j-- > 0;) {
            lcs[i][j] = ka[i] == kb[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    std::vector<std::string> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
        if (i < a.size() && j < b.size() && ka[i] == kb[j]) {
            out.push_back(b[j]);
            ++i;
            ++j;
        } else if (i < a.size() && (j == b.size() || lcs[i + 1][j] >= lcs[i][j + 1])) {
            out.push_back("[-" + a[i] + "-]");
            ++i;
        } else {
            out.push_back("{+" + b[j] + "+}");
            ++j;
        }
    }
    return text::join(out, " ");
}

namespace {

void indent(std::ostringstream& o, std::string_view body) {
    for (const auto& line : text::split_lines(body)) o << "    " << line << "\n";
}

std::string value_text(const ordered_json& j) {
    if (j.is_null()) return "-";
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", j.get<double>());
        return buf;
    }
    return j.dump();
}

void exchanges(std::ostringstream& o, const StageTrace& t) {
    for (std::size_t i = 0; i < t.exchanges.size(); ++i) {
        o << "reply " << i + 1 << " of " << t.exchanges.size() << " (prompt " << t.exchanges[i].prompt.size()
          << " bytes):\n";
        indent(o, t.exchanges[i].reply);
    }
}

void section_perception(std::ostringstream& o, const StageTrace& t) {
    o << "retries: " << t.retries << "\n";
    if (t.decisions.value("degraded", false)) o << "degraded: perception failed, continued with an empty graph\n";
    if (t.decisions.contains("pruned_relations") && !t.decisions["pruned_relations"].empty()) {
        o << "pruned relations (endpoint missing):\n";
        for (const auto& r : t.decisions["pruned_relations"]) {
            o << "  " << r.value("source", 0) << " -[" << r.value("relation", "") << "]-> " << r.value("target", 0)
              << "\n";
        }
    }
    o << "scene graph:\n";
    indent(o, t.artifact);
}

void section_verification(std::ostringstream& o, const StageTrace& t) {
    o << "| element | phrase | result | reason | score |\n";
    o << "|---|---|---|---|---|\n";
    for (const auto& c : t.decisions.value("provenance", ordered_json::array())) {
        std::string element = c.value("kind", "");
        if (c.contains("relation")) {
            const auto& r = c["relation"];
            element += " " + std::to_string(r.value("source", 0)) + "-" + r.value("relation", "") + "-" +
                       std::to_string(r.value("target", 0));
        } else {
            element += " " + std::to_string(c.value("object", 0));
            if (c.contains("attribute")) element += "." + c.value("attribute", "");
        }
        o << "| " << element << " | " << c.value("phrase", "") << " | " << (c.value("kept", false) ? "kept" : "removed")
          << " | " << (c.contains("reason") ? c["reason"].get<std::string>() : "") << " | "
          << (c.contains("score") ? value_text(c["score"]) : "") << " |\n";
    }
    if (t.decisions.contains("stats")) {
        const auto& s = t.decisions["stats"];
        o << "removed: objects " << s.value("objects_removed", 0) << "/" << s.value("objects_total", 0)
          << ", attributes " << s.value("attributes_removed", 0) << "/" << s.value("attributes_total", 0)
          << ", relations " << s.value("relations_removed", 0) << "/" << s.value("relations_total", 0) << "\n";
    }
    o << "verified scene graph:\n";
    indent(o, t.artifact);
}

void section_guard(std::ostringstream& o, const StageTrace& t) {
    const std::string before = t.decisions.value("original", "");
    const std::string after = t.decisions.value("adjusted", "");
    const auto& conflicts = t.decisions.value("conflicts", ordered_json::array());
    if (conflicts.empty()) {
        o << "conflicts: none\n";
    } else {
        o << "conflicts:\n";
        for (const auto& c : conflicts) o << "  " << c.value("kind", "") << ": " << c.value("description", "") << "\n";
    }
    if (t.decisions.value("guard_degraded", false)) o << "guard degraded: reply could not be parsed\n";
    o << "original: " << before << "\n";
    o << "adjusted: " << after << "\n";
    o << "changes:  " << mark_word_changes(before, after) << "\n";
}

void section_claims(std::ostringstream& o, const StageTrace& t) {
    o << "claims:\n";
    if (t.artifact.empty()) o << "  (none)\n";
    for (const auto& line : text::split_lines(t.artifact)) o << "  " << line << "\n";
}

void section_claim_verification(std::ostringstream& o, const StageTrace& t) {
    o << "| claim | label | evidence | search |\n";
    o << "|---|---|---|---|\n";
    for (const auto& j : t.decisions.value("judgments", ordered_json::array())) {
        o << "| " << j.value("index", 0) << ". " << j.value("text", "") << " | " << j.value("label", "") << " | "
          << j.value("evidence", ordered_json::array()).size() << " | "
          << (j.contains("search_error") ? "failed: " + j["search_error"].get<std::string>() : "ok") << " |\n";
    }
    o << "kept claims:\n";
    if (t.artifact.empty()) o << "  (none)\n";
    for (const auto& line : text::split_lines(t.artifact)) o << "  " << line << "\n";
}

void section_answer(std::ostringstream& o, const StageTrace& t) {
    if (t.decisions.value("mode", "") == "direct") o << "direct question to the chat model (all stages disabled)\n";
    if (t.decisions.contains("perception_level")) {
        o << "perception-level attempt: " << t.decisions["perception_level"].get<std::string>() << "\n";
    }
    o << "route: " << t.decisions.value("route", "") << "\n";
    o << "answer: " << t.artifact << "\n";
    o << "normalized: " << t.decisions.value("normalized", "") << "\n";
}

}  // namespace

std::string render_trace_report(const PipelineResult& r) {
    std::ostringstream o;
    o << "# Trace report" << (r.case_id.empty() ? "" : ": " + r.case_id) << "\n\n";
    o << "question: " << r.question << "\n";
    if (r.effective_question != r.question) o << "answered as: " << r.effective_question << "\n";
    o << "route: " << to_string(r.route) << "\n";
    o << "final answer: " << r.final.text << " (" << r.final.normalized << ")\n";
    for (const auto& t : r.traces) {
        o << "\n## Stage " << t.stage << ": " << t.name << "\n\n";
        switch (t.stage) {
            case 1: section_perception(o, t); break;
            case 2: section_verification(o, t); break;
            case 3: section_guard(o, t); break;
            case 4: section_claims(o, t); break;
            case 5: section_claim_verification(o, t); break;
            case 6: section_answer(o, t); break;
            default: break;
        }
        for (const auto& e : t.errors) o << "error: " << e << "\n";
        exchanges(o, t);
    }
    return o.str();
}

void emit_trace_report(const PipelineResult& result, const std::filesystem::path& destination) {
    if (destination.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(destination.parent_path(), ec);
    }
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report " + destination.generic_string());
    out << render_trace_report(result);
    if (!out) throw IoError("failed writing report " + destination.generic_string());
}

}  // namespace bottomup
