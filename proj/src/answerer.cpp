// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/answerer.hpp"

#include <cctype>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

std::string_view to_string(AnswerKind kind) { return kind == AnswerKind::Binary ? "binary" : "freeform"; }

AnswerKind answer_kind_from_string(std::string_view s) {
    if (s == "binary") return AnswerKind::Binary;
    if (s == "freeform") return AnswerKind::FreeForm;
    throw Error("unknown answer kind \"" + std::string(s) + "\"");
}

bool is_insufficient(std::string_view reply, const std::vector<std::string>& markers) {
    for (const auto& m : markers) {
        if (!m.empty() && text::contains_icase(reply, m)) return true;
    }
    return false;
}

AnswerOutcome answer_perception_level(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                      const SceneGraph& verified, std::string_view question,
                                      const AnswerOptions& options) {
    if (text::is_blank(question)) throw InvalidRequest("answering needs a non-empty question");
    ChatRequest req;
    req.image = image;
    req.segments = {render_prompt(prompts.get(Stage::P6Perception),
                                  {{"scene_graph", canonicalize(verified)}, {"question", std::string(question)}})};
    req.max_tokens = options.max_tokens;
    req.seed = options.seed;
    AnswerOutcome out;
    out.exchange.prompt = req.joined();
    out.exchange.reply = chat_complete(chat, req);
    out.text = text::trim(out.exchange.reply);
    out.sufficient = !is_insufficient(out.exchange.reply, options.insufficiency_markers);
    return out;
}

KnowledgeAnswer answer_with_knowledge(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                      const SceneGraph& verified, const std::vector<Claim>& kept_claims,
                                      std::string_view question, const AnswerOptions& options) {
    if (text::is_blank(question)) throw InvalidRequest("answering needs a non-empty question");
    std::string claims;
    if (!kept_claims.empty()) claims = std::string(kClaimsHeader) + "\n" + render_claims(kept_claims);
    ChatRequest req;
    req.image = image;
    req.segments = {render_prompt(prompts.get(Stage::P6Knowledge), {{"scene_graph", canonicalize(verified)},
                                                                    {"claims", claims},
                                                                    {"question", std::string(question)}})};
    req.max_tokens = options.max_tokens;
    req.seed = options.seed;
    KnowledgeAnswer out;
    out.exchange.prompt = req.joined();
    out.exchange.reply = chat_complete(chat, req);
    out.answer = make_final_answer(text::trim(out.exchange.reply), options.kind);
    return out;
}

std::string normalize_answer(std::string_view s, AnswerKind kind) {
    if (kind == AnswerKind::FreeForm) return text::collapse_whitespace(text::to_lower(text::strip_punctuation(s)));
    std::size_t i = 0;
    while (i < s.size() && !std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
    const std::string token = text::to_lower(s.substr(i, j - i));
    if (token == "yes") return "yes";
    if (token == "no") return "no";
    return "abstain";
}

FinalAnswer make_final_answer(std::string text, AnswerKind kind) {
    FinalAnswer a;
    a.normalized = normalize_answer(text, kind);
    a.text = std::move(text);
    a.kind = kind;
    return a;
}

}  // namespace bottomup
