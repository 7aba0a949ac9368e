// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/commonsense.hpp"

#include <cctype>
#include <set>

#include "bottomup/errors.hpp"
#include "bottomup/parallel.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

std::string_view to_string(ClaimLabel label) {
    switch (label) {
        case ClaimLabel::Hallucination: return "Hallucination";
        case ClaimLabel::NonHallucination: return "NonHallucination";
        case ClaimLabel::Unverifiable: return "Unverifiable";
    }
    return "?";
}

ClaimLabel claim_label_from_string(std::string_view s) {
    if (s == "Hallucination") return ClaimLabel::Hallucination;
    if (s == "NonHallucination") return ClaimLabel::NonHallucination;
    if (s == "Unverifiable") return ClaimLabel::Unverifiable;
    throw Error("unknown claim label \"" + std::string(s) + "\"");
}

namespace {

std::string unmarked(std::string_view line) {
    std::string s;
    for (char c : line) {
        if (c != '*' && c != '`') s += c;
    }
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t' || s[b] == '-' || s[b] == '>')) ++b;
    return text::trim(std::string_view(s).substr(b));
}

// "[Tag n]: rest" or "Tag n: rest"; n may be absent unless `numbered`.
std::optional<std::string> tagged(const std::string& line, std::string_view tag, bool numbered) {
    std::size_t i = 0;
    const bool bracket = !line.empty() && line[0] == '[';
    if (bracket) i = 1;
    if (!text::starts_with_icase(std::string_view(line).substr(i), tag)) return std::nullopt;
    i += tag.size();
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (numbered && i == digits) return std::nullopt;
    if (bracket) {
        if (i >= line.size() || line[i] != ']') return std::nullopt;
        ++i;
    }
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    return text::trim(std::string_view(line).substr(i + 1));
}

bool elided(std::string_view s) {
    std::string rest(s);
    for (std::string_view mark : {"\xE2\x8B\xAF", "\xE2\x80\xA6", "."}) {
        std::size_t p;
        while ((p = rest.find(mark)) != std::string::npos) rest.erase(p, mark.size());
    }
    return text::is_blank(rest);
}

ClaimLabel label_token(std::string_view s) {
    std::string letters;
    for (char c : s) {
        if (std::isalpha(static_cast<unsigned char>(c))) letters += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (letters == "nonhallucination" || letters == "nothallucination" || letters == "nonhallucinated") {
        return ClaimLabel::NonHallucination;
    }
    if (letters == "hallucination" || letters == "hallucinated") return ClaimLabel::Hallucination;
    return ClaimLabel::Unverifiable;
}

std::string render_facts(const std::vector<Claim>& claims, const std::map<int, ClaimJudgment>& judgments) {
    std::string out;
    for (const auto& c : claims) {
        if (!out.empty()) out += "\n";
        out += "[Facts for Claim " + std::to_string(c.index) + "]:";
        const auto& ev = judgments.at(c.index).evidence;
        if (ev.empty()) out += "\n(no results)";
        for (const auto& f : ev) {
            out += "\n(" + std::to_string(f.rank) + ") " + f.title + ": " + f.snippet;
            if (!f.source_url.empty()) out += " <" + f.source_url + ">";
        }
    }
    return out;
}

}  // namespace

std::vector<Claim> parse_claim_list(std::string_view reply) {
    std::vector<Claim> out;
    std::set<std::string> seen;
    for (const auto& raw : text::split_lines(reply)) {
        const auto body = tagged(unmarked(raw), "Claim", true);
        if (!body || elided(*body)) continue;
        const std::string key = text::to_lower(text::collapse_whitespace(*body));
        if (!seen.insert(key).second) continue;
        out.push_back({static_cast<int>(out.size()) + 1, text::collapse_whitespace(*body)});
    }
    return out;
}

std::map<int, ClaimLabel> parse_label_list(std::string_view reply, const std::vector<Claim>& claims) {
    std::vector<ClaimLabel> labels;
    for (const auto& raw : text::split_lines(reply)) {
        if (const auto body = tagged(unmarked(raw), "Label", false)) labels.push_back(label_token(*body));
    }
    std::map<int, ClaimLabel> out;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        out[claims[i].index] = i < labels.size() ? labels[i] : ClaimLabel::Unverifiable;
    }
    return out;
}

std::string render_claims(const std::vector<Claim>& claims) {
    std::vector<std::string> lines;
    for (const auto& c : claims) lines.push_back("[Claim " + std::to_string(c.index) + "]: " + c.text);
    return text::join(lines, "\n");
}

InductionResult induce_claims(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                              const SceneGraph& verified, std::string_view question, const InductionOptions& options) {
    if (text::is_blank(question)) throw InvalidRequest("claim induction needs a non-empty question");
    ChatRequest req;
    req.image = image;
    req.segments = {render_prompt(prompts.get(Stage::P4),
                                  {{"scene_graph", canonicalize(verified)}, {"question", std::string(question)}})};
    req.max_tokens = options.max_tokens;
    req.seed = options.seed;
    InductionResult result;
    result.exchange.prompt = req.joined();
    result.exchange.reply = chat_complete(chat, req);
    result.claims = parse_claim_list(result.exchange.reply);
    return result;
}

ClaimVerification verify_claims(ChatModel& chat, SearchProvider& search, const PromptSet& prompts,
                                const std::vector<Claim>& claims, const ClaimVerifyOptions& options) {
    ClaimVerification out;
    if (claims.empty()) return out;

    std::vector<std::string> queries;
    if (options.rewrite_queries) {
        const auto rewrites = parallel_map(claims.size(), options.max_concurrency, [&](std::size_t i) {
            ChatRequest req;
            req.segments = {std::string(kQueryRewritePrompt) + claims[i].text};
            req.max_tokens = 64;
            req.seed = options.seed;
            return Exchange{req.joined(), chat_complete(chat, req)};
        });
        for (std::size_t i = 0; i < claims.size(); ++i) {
            std::string q;
            for (const auto& line : text::split_lines(rewrites[i].reply)) {
                q = text::trim(line);
                if (!q.empty()) break;
            }
            queries.push_back(q.empty() ? claims[i].text : q);
            out.exchanges.push_back(rewrites[i]);
        }
    } else {
        for (const auto& c : claims) queries.push_back(c.text);
    }

    struct Found {
        std::vector<FactSnippet> snippets;
        std::string error;
    };
    const auto found = parallel_map(claims.size(), options.max_concurrency, [&](std::size_t i) {
        try {
            return Found{web_search(search, queries[i], options.top_k), {}};
        } catch (const SearchUnavailable& e) {
            return Found{{}, e.what()};
        } catch (const TransportError& e) {
            return Found{{}, e.what()};
        } catch (const BackendError& e) {
            return Found{{}, e.what()};
        }
    });

    std::vector<Claim> searchable;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        ClaimJudgment j;
        j.query = queries[i];
        j.evidence = found[i].snippets;
        j.search_error = found[i].error;
        if (j.search_error.empty()) searchable.push_back(claims[i]);
        out.verified.judgments.emplace(claims[i].index, std::move(j));
    }
    if (searchable.empty()) return out;

    ChatRequest req;
    req.segments = {render_prompt(prompts.get(Stage::P5), {{"claims", render_claims(searchable)},
                                                          {"facts", render_facts(searchable, out.verified.judgments)}})};
    req.max_tokens = options.max_tokens;
    req.seed = options.seed;
    Exchange ex{req.joined(), chat_complete(chat, req)};
    for (const auto& [index, label] : parse_label_list(ex.reply, searchable)) {
        out.verified.judgments.at(index).label = label;
    }
    out.exchanges.push_back(std::move(ex));
    for (const auto& c : claims) {
        if (out.verified.judgments.at(c.index).label == ClaimLabel::NonHallucination) out.verified.kept.push_back(c);
    }
    return out;
}

}  // namespace bottomup
