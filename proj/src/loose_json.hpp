// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bottomup::detail {

// Forgiving JSON reader for model-written text. Scalars keep their source
// spelling so numeric-looking values can be carried as strings.
struct LooseValue {
    enum class Kind { String, Number, Bare, Array, Object };

    Kind kind = Kind::Bare;
    std::string text;
    std::vector<LooseValue> items;
    std::vector<std::pair<std::string, LooseValue>> members;

    bool is_scalar() const { return kind != Kind::Array && kind != Kind::Object; }
    const LooseValue* member(std::string_view key) const;
    const LooseValue* member_icase(std::string_view key) const;
};

/// Parses one value from the start of `text` (leading whitespace skipped).
/// Throws SchemaMismatch on unrecoverable syntax.
LooseValue parse_loose(std::string_view text);

}  // namespace bottomup::detail
