// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bottomup {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipelineFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name):
///
///   ask     --image I --question Q      one query, prints the answer
///   eval    --dataset D                 batch run with a metrics report
///   record  --record F (--dataset D | --image I --question Q)
///   replay  --replay F (--dataset D | --image I --question Q)
///   report  --trace T                   renders a saved trace
///
/// Common flags: --config --out-dir --parallelism --ablate --k-examples
/// --top-k --format. Arguments are fully validated before any backend is
/// built. Returns 0 on success, 1 on pipeline failure, 2 on usage error.
int dispatch_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bottomup
