// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace bottomup {

/// One prompt sent to the chat model and the reply it produced.
struct Exchange {
    std::string prompt;
    std::string reply;

    bool operator==(const Exchange&) const = default;
};

}  // namespace bottomup
