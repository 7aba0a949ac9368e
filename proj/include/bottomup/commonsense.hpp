// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/exchange.hpp"
#include "bottomup/prompts.hpp"
#include "bottomup/scene_graph.hpp"

namespace bottomup {

struct Claim {
    /// 1-based position in the list.
    int index = 0;
    std::string text;

    bool operator==(const Claim&) const = default;
};

enum class ClaimLabel { Hallucination, NonHallucination, Unverifiable };

std::string_view to_string(ClaimLabel label);
/// Accepts the names produced by to_string. Throws Error otherwise.
ClaimLabel claim_label_from_string(std::string_view s);

struct ClaimJudgment {
    ClaimLabel label = ClaimLabel::Unverifiable;
    std::vector<FactSnippet> evidence;
    /// Search failure message; empty when the search succeeded.
    std::string search_error;
    /// Query actually sent to the search provider.
    std::string query;

    bool operator==(const ClaimJudgment&) const = default;
};

struct VerifiedClaims {
    /// Claims labeled NonHallucination, in claim order.
    std::vector<Claim> kept;
    /// Keyed by claim index.
    std::map<int, ClaimJudgment> judgments;
};

/// One claim per "[Claim n]:" line in order of appearance, renumbered from 1.
/// Case-insensitive duplicates and elided placeholders ("...") are dropped.
std::vector<Claim> parse_claim_list(std::string_view text);

/// Maps the i-th "[Label]:" line to claims[i]. Missing or unrecognized
/// labels are Unverifiable.
std::map<int, ClaimLabel> parse_label_list(std::string_view text, const std::vector<Claim>& claims);

struct InductionOptions {
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

struct InductionResult {
    std::vector<Claim> claims;
    Exchange exchange;
};

/// Renders P4 with the verified graph and question, then parses the claims.
InductionResult induce_claims(ChatModel& chat, const PromptSet& prompts, const ImageRef& image,
                              const SceneGraph& verified, std::string_view question,
                              const InductionOptions& options = {});

struct ClaimVerifyOptions {
    std::size_t top_k = 5;
    /// Searches in flight at once.
    std::size_t max_concurrency = 4;
    /// Ask the chat model to turn each claim into a search query first.
    bool rewrite_queries = false;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;
};

struct ClaimVerification {
    VerifiedClaims verified;
    /// Query rewrites (if enabled) followed by the labeling call, if made.
    std::vector<Exchange> exchanges;
};

/// Prompt used for the optional query rewrite.
inline constexpr std::string_view kQueryRewritePrompt =
    "Rewrite the following statement as a short web search query that would find evidence for or against it. "
    "Reply with the query only.\n[Statement]: ";

/// Searches once per claim, then labels every claim that has evidence in a
/// single P5 call. Claims whose search failed are Unverifiable and are left
/// out of the P5 prompt; when none has evidence the call is skipped.
/// Labeling chat errors propagate.
ClaimVerification verify_claims(ChatModel& chat, SearchProvider& search, const PromptSet& prompts,
                                const std::vector<Claim>& claims, const ClaimVerifyOptions& options = {});

/// "[Claim 1]: text" lines, the form P5 and P6 expect.
std::string render_claims(const std::vector<Claim>& claims);

}  // namespace bottomup
