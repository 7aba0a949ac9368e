// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/exchange.hpp"
#include "bottomup/prompts.hpp"
#include "bottomup/scene_graph.hpp"

namespace bottomup {

struct PerceptionOptions {
    /// Corrective re-asks after a malformed reply.
    int retries = 2;
    /// false asks for the whole scene instead of the question-relevant part.
    bool partial = true;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

struct PerceptionResult {
    SceneGraph scene_graph;
    std::string raw_reply;
    int retries_used = 0;
    /// Every attempt in order; the last one produced scene_graph.
    std::vector<Exchange> exchanges;
    /// Why each rejected attempt was rejected.
    std::vector<std::string> attempt_errors;
    /// Relations dropped because an endpoint object was never listed.
    std::vector<SgRelation> pruned_relations;
};

/// Instruction that replaces the question when `partial` is off.
inline constexpr std::string_view kWholeSceneInstruction =
    "Describe every object in the image together with its attributes and the relationships between objects.";

/// Asks the chat model for the question's scene graph, re-asking with the
/// parse or validation failure appended when a reply is unusable. Relations
/// whose endpoints are absent are pruned instead of re-asked: such replies
/// are partial by intent. Backend errors propagate.
/// Throws PerceptionFailed after retries + 1 unusable replies.
PerceptionResult extract_partial_scene_graph(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                                             std::string_view question, const PerceptionOptions& options = {});

}  // namespace bottomup
