// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
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

enum class ConflictKind { Object, Attribute, Relationship };

std::string_view to_string(ConflictKind kind);
/// Accepts the names produced by to_string. Throws Error otherwise.
ConflictKind conflict_kind_from_string(std::string_view s);

struct ConflictFinding {
    ConflictKind kind = ConflictKind::Object;
    /// The sentence of the model's conclusion that names the conflict.
    std::string description;

    bool operator==(const ConflictFinding&) const = default;
};

struct GuardOutput {
    std::vector<ConflictFinding> conflicts;
    std::string question;
};

/// Reads the last "Output Question:" line (quotes stripped) and scans the
/// conclusion for "object conflict", "attribute conflict" and
/// "relation(ship) conflict". A label preceded within three words by
/// "no", "not", "without" or "none" does not count. Without a "Conclusion:"
/// line, everything above the output question is scanned except the
/// "1. Object Conflict:" style headings.
/// Throws GuardParseError when there is no non-empty output question.
GuardOutput parse_guard_output(std::string_view reply);

struct AdjustedQuestion {
    std::string original;
    std::string adjusted;
    std::vector<ConflictFinding> conflicts;
    bool changed = false;
    /// The reply could not be parsed; adjusted == original.
    bool guard_degraded = false;
    std::string degraded_reason;
};

struct GuardOptions {
    std::size_t k_examples = 2;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

/// Shown in place of an empty verified scene graph.
inline constexpr std::string_view kEmptyGraphNote =
    "(No objects in the image could be verified for this question. The scene graph is empty.)";

struct GuardResult {
    AdjustedQuestion question;
    Exchange exchange;
};

/// Renders P3 with k worked examples, the verified graph and the question.
/// A reply that names no conflict keeps the original question even if the
/// model rephrased it. Throws InvalidRequest for an empty question,
/// std::out_of_range when k exceeds the available examples, and whatever
/// the chat backend throws.
GuardResult validate_and_adjust(ChatModel& chat, const PromptSet& prompts, const GuardExamples& examples,
                                const ImageRef& image, const SceneGraph& verified, std::string_view question,
                                const GuardOptions& options = {});

/// Lowercase, ASCII-punctuation-free whitespace tokens.
std::vector<std::string> edit_tokens(std::string_view s);

/// Word-level Levenshtein distance between edit_tokens(a) and edit_tokens(b).
std::size_t word_edit_count(std::string_view a, std::string_view b);

}  // namespace bottomup
