// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rtlleak/fsm.hpp"

namespace rtlleak {

/// Cycle-stamped taint: for each signal influenced by the secret within the
/// horizon, the cycle its tainting assignment first fires (registers become
/// readable one cycle later).
struct SequentialDependencyList {
    std::map<std::string, int> first_tainted_cycle;
    int horizon = 0;
    bool truncated = false; // taint still spreading when the horizon ended
};

struct TimingChannelFinding {
    SourceLoc location;
    std::string condition_signal;
    int condition_tainted_cycle = 0;
    std::string assignment_target;
    std::set<uint64_t> assignment_states; // FSM states enabling the write
    int earliest_fire_cycle = 0;
    bool exempted = false;
    std::string exempt_reason; // "if-else-identical" or "case-identical"
};

/// Propagate taint cycle by cycle from reset, enabling assignments only in
/// FSM states reachable at that cycle (pass fsm = nullptr for designs
/// without one). Guard conditions taint their targets like data does.
SequentialDependencyList build_dependency_list(const DataflowGraph& graph, const Fsm* fsm,
                                               int horizon);

/// Conditional assignments whose condition is tainted before the assignment
/// can first fire. An assignment writing the same target with an identical
/// normalized right-hand side in every branch of its conditional (else arms,
/// all case arms and the default) is exempted: listed, excluded from the
/// count.
std::vector<TimingChannelFinding> detect_timing_channels(const DataflowGraph& graph,
                                                         const Fsm* fsm,
                                                         const SequentialDependencyList& deps);

int non_exempt_count(const std::vector<TimingChannelFinding>& findings);

/// Default analysis horizon: twice the state count times the structural loop
/// bound (conservatively the state count when no loop data exists).
int default_horizon(const Fsm* fsm);

} // namespace rtlleak
