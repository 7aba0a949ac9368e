// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/question_guard.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

std::string_view to_string(ConflictKind kind) {
    switch (kind) {
        case ConflictKind::Object: return "Object";
        case ConflictKind::Attribute: return "Attribute";
        case ConflictKind::Relationship: return "Relationship";
    }
    return "?";
}

ConflictKind conflict_kind_from_string(std::string_view s) {
    if (s == "Object") return ConflictKind::Object;
    if (s == "Attribute") return ConflictKind::Attribute;
    if (s == "Relationship") return ConflictKind::Relationship;
    throw Error("unknown conflict kind \"" + std::string(s) + "\"");
}

namespace {

struct Keyword {
    std::string_view text;
    ConflictKind kind;
};

constexpr std::array<Keyword, 4> kKeywords{{
    {"object conflict", ConflictKind::Object},
    {"attribute conflict", ConflictKind::Attribute},
    {"relationship conflict", ConflictKind::Relationship},
    {"relation conflict", ConflictKind::Relationship},
}};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Drops markdown emphasis and leading bullets so "**Conclusion**:" and
// "- Output Question:" read like their plain forms.
std::string plain_line(std::string_view line) {
    std::string s;
    for (char c : line) {
        if (c != '*') s += c;
    }
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t' || s[b] == '#' || s[b] == '-' || s[b] == '>')) ++b;
    return text::trim(std::string_view(s).substr(b));
}

// "<label>:" at the start of a line; returns the remainder or nullopt.
std::optional<std::string> after_label(const std::string& line, std::string_view label) {
    if (!text::starts_with_icase(line, label)) return std::nullopt;
    std::size_t i = label.size();
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    return text::trim(std::string_view(line).substr(i + 1));
}

std::string strip_quotes(std::string s) {
    s = text::trim(s);
    static const std::array<std::string_view, 6> quotes{"\"", "'", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98",
                                                        "\xE2\x80\x99"};
    bool more = true;
    while (more && !s.empty()) {
        more = false;
        for (auto q : quotes) {
            if (s.size() >= q.size() && s.compare(0, q.size(), q) == 0) {
                s.erase(0, q.size());
                more = true;
            }
            if (s.size() >= q.size() && s.compare(s.size() - q.size(), q.size(), q) == 0) {
                s.erase(s.size() - q.size());
                more = true;
            }
        }
        s = text::trim(s);
    }
    return s;
}

// Removes "1. Object Conflict:" style headings so the aspect names in an
// analysis are not read as findings.
std::string strip_heading(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size() || (line[i] != '.' && line[i] != ')')) return line;
    const auto colon = line.find(':', i);
    if (colon == std::string::npos || colon - i > 48) return line;
    return text::trim(std::string_view(line).substr(colon + 1));
}

bool negated(std::string_view before) {
    static const std::set<std::string> filler{"object", "attribute", "relation", "relationship", "conflict",
                                              "conflicts", "or", "nor", "and", "any", "an", "a"};
    static const std::set<std::string> negators{"no", "not", "without", "none", "never"};
    const auto tokens = text::split_whitespace(before);
    int counted = 0;
    for (auto it = tokens.rbegin(); it != tokens.rend() && counted < 3; ++it) {
        const std::string t = text::to_lower(text::strip_punctuation(*it));
        if (negators.contains(t) || (t.size() > 3 && t.ends_with("nt") && it->find('\'') != std::string::npos)) {
            return true;
        }
        if (filler.contains(t)) continue;
        ++counted;
    }
    return false;
}

std::vector<std::string> sentences(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        cur += c;
        if (c == '.' || c == '!' || c == '?' || c == '\n' || c == ';') {
            if (!text::is_blank(cur)) out.push_back(text::trim(cur));
            cur.clear();
        }
    }
    if (!text::is_blank(cur)) out.push_back(text::trim(cur));
    return out;
}

std::vector<ConflictFinding> scan_conflicts(std::string_view body) {
    std::vector<ConflictFinding> found;
    for (const auto& sentence : sentences(body)) {
        for (const auto& kw : kKeywords) {
            std::size_t pos = 0;
            while ((pos = text::find_icase(sentence, kw.text, pos)) != std::string::npos) {
                const bool boundary = (pos == 0 || !is_alpha(sentence[pos - 1]));
                if (boundary && !negated(std::string_view(sentence).substr(0, pos))) {
                    const bool seen = std::any_of(found.begin(), found.end(),
                                                  [&](const ConflictFinding& f) { return f.kind == kw.kind; });
                    if (!seen) found.push_back({kw.kind, sentence});
                    break;
                }
                pos += kw.text.size();
            }
        }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const ConflictFinding& a, const ConflictFinding& b) { return a.kind < b.kind; });
    return found;
}

}  // namespace

GuardOutput parse_guard_output(std::string_view reply) {
    const auto raw = text::split_lines(reply);
    std::vector<std::string> lines;
    lines.reserve(raw.size());
    for (const auto& l : raw) lines.push_back(plain_line(l));

    std::optional<std::size_t> oq_line;
    std::string question;
    for (std::size_t i = lines.size(); i-- > 0;) {
        const auto rest = after_label(lines[i], "Output Question");
        if (!rest) continue;
        question = strip_quotes(*rest);
        for (std::size_t j = i + 1; question.empty() && j < lines.size(); ++j) question = strip_quotes(lines[j]);
        oq_line = i;
        break;
    }
    if (!oq_line || question.empty()) throw GuardParseError("reply has no \"Output Question:\" line");

    std::optional<std::size_t> conclusion;
    for (std::size_t i = *oq_line; i-- > 0;) {
        if (after_label(lines[i], "Conclusion")) {
            conclusion = i;
            break;
        }
    }
    std::string body;
    if (conclusion) {
        body = *after_label(lines[*conclusion], "Conclusion");
        for (std::size_t i = *conclusion + 1; i < *oq_line; ++i) body += "\n" + lines[i];
    } else {
        for (std::size_t i = 0; i < *oq_line; ++i) body += strip_heading(lines[i]) + "\n";
    }
    return {scan_conflicts(body), question};
}

GuardResult validate_and_adjust(ChatModel& chat, const PromptSet& prompts, const GuardExamples& examples,
                                const ImageRef& image, const SceneGraph& verified, std::string_view question,
                                const GuardOptions& options) {
    if (text::is_blank(question)) throw InvalidRequest("question validation needs a non-empty question");
    const std::string graph_text = verified.empty() ? std::string(kEmptyGraphNote) : canonicalize(verified);
    const std::string prompt = render_prompt(prompts.get(Stage::P3), {{"examples", examples.render(options.k_examples)},
                                                                      {"scene_graph", graph_text},
                                                                      {"question", std::string(question)}});
    ChatRequest req;
    req.image = image;
    req.segments = {prompt};
    req.max_tokens = options.max_tokens;
    req.seed = options.seed;

    GuardResult result;
    result.exchange.prompt = req.joined();
    result.exchange.reply = chat_complete(chat, req);

    AdjustedQuestion& q = result.question;
    q.original = std::string(question);
    q.adjusted = q.original;
    try {
        GuardOutput parsed = parse_guard_output(result.exchange.reply);
        q.conflicts = std::move(parsed.conflicts);
        if (!q.conflicts.empty()) q.adjusted = std::move(parsed.question);
    } catch (const GuardParseError& e) {
        q.guard_degraded = true;
        q.degraded_reason = e.what();
    }
    q.changed = text::collapse_whitespace(q.original) != text::collapse_whitespace(q.adjusted);
    return result;
}

std::vector<std::string> edit_tokens(std::string_view s) {
    return text::split_whitespace(text::to_lower(text::strip_punctuation(s)));
}

std::size_t word_edit_count(std::string_view a, std::string_view b) {
    const auto x = edit_tokens(a);
    const auto y = edit_tokens(b);
    std::vector<std::size_t> prev(y.size() + 1);
    std::vector<std::size_t> cur(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

}  // namespace bottomup
