// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/commonsense.hpp"
#include "bottomup/exchange.hpp"
#include "bottomup/prompts.hpp"
#include "bottomup/scene_graph.hpp"

namespace bottomup {

enum class AnswerKind { Binary, FreeForm };

std::string_view to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(std::string_view s);

struct AnswerOutcome {
    bool sufficient = false;
    /// The answer when sufficient, otherwise the model's rationale.
    std::string text;
    Exchange exchange;
};

struct FinalAnswer {
    std::string text;
    /// yes / no / abstain for Binary; normalized text for FreeForm.
    std::string normalized;
    AnswerKind kind = AnswerKind::FreeForm;

    bool operator==(const FinalAnswer&) const = default;
};

struct AnswerOptions {
    AnswerKind kind = AnswerKind::Binary;
    /// Case-insensitive phrases that mark a perception-level reply as insufficient.
    std::vector<std::string> insufficiency_markers{"unanswerable", "cannot be answered", "not possible to determine"};
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

/// Header placed above kept claims in the knowledge prompt.
inline constexpr std::string_view kClaimsHeader = "[Verified Commonsense Claims]";

/// True when `reply` contains any marker.
bool is_insufficient(std::string_view reply, const std::vector<std::string>& markers);

/// Renders P6_perception and classifies the reply.
AnswerOutcome answer_perception_level(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                      const SceneGraph& verified, std::string_view question,
                                      const AnswerOptions& options = {});

struct KnowledgeAnswer {
    FinalAnswer answer;
    Exchange exchange;
};

/// Renders P6_knowledge: graph, then kept claims (the block is dropped when
/// there are none), then the question.
KnowledgeAnswer answer_with_knowledge(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                      const SceneGraph& verified, const std::vector<Claim>& kept_claims,
                                      std::string_view question, const AnswerOptions& options = {});

/// Binary: the first alphabetic token decides yes / no, anything else is
/// abstain. FreeForm: lowercase, ASCII punctuation removed, whitespace
/// collapsed.
std::string normalize_answer(std::string_view text, AnswerKind kind);

FinalAnswer make_final_answer(std::string text, AnswerKind kind);

}  // namespace bottomup
