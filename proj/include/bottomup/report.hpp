// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bottomup/pipeline.hpp"

namespace bottomup {

/// Word diff of `before` against `after`: removed words as [-word-], added
/// words as {+word+}. Words compare case- and punctuation-insensitively.
std::string mark_word_changes(std::string_view before, std::string_view after);

/// Human-readable report, one section per stage present in the trace.
std::string render_trace_report(const PipelineResult& result);

/// Writes render_trace_report(result) to `destination`. Throws IoError.
void emit_trace_report(const PipelineResult& result, const std::filesystem::path& destination);

}  // namespace bottomup
