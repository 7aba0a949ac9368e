// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small ASCII string helpers shared by the parsers and normalizers.
namespace bottomup::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool is_blank(std::string_view s);

/// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

/// Trims and replaces every internal whitespace run with a single space.
std::string collapse_whitespace(std::string_view s);

/// Removes every ASCII punctuation character.
std::string strip_punctuation(std::string_view s);

bool contains_icase(std::string_view haystack, std::string_view needle);
std::size_t find_icase(std::string_view haystack, std::string_view needle, std::size_t from = 0);
bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace bottomup::text
