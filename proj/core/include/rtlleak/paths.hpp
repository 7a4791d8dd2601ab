// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rtlleak/dfg.hpp"

namespace rtlleak {

struct PathHop {
    std::string source;
    uint64_t source_bits = 0; // bitmask over the source signal
    int assignment = 0;       // assignment id
    std::string target;
    uint64_t target_bits = 0;
    bool implicit = false;    // influence enters only through the guard
};

struct LeakagePath {
    std::string id; // deterministic hash over the hop chain
    int secret_bit = 0;
    std::vector<PathHop> hops;
    std::string terminal; // output signal the path ends at
    std::vector<GuardAtom> guards_on_path;
};

struct PathConfig {
    int max_path_len = 64;
    size_t max_paths = 1000000;
};

/// All simple hop chains from any secret bit to any output, following exact
/// bit-level dependencies plus implicit guard flows. A (assignment, target
/// bit) pair never repeats within one path; loops appear once and get their
/// metadata later, during timing refinement. Deterministic order by id.
///
/// Errors: more than cfg.max_paths paths (explosion guard, names the bound).
std::vector<LeakagePath> enumerate_paths(const DataflowGraph& graph,
                                         const PathConfig& cfg = {});

} // namespace rtlleak
