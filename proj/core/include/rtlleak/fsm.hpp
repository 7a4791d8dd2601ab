// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "rtlleak/dfg.hpp"

namespace rtlleak {

struct StateRegister {
    std::string signal;
    int width = 1;
    // Score components, ordered lexicographically (guard uses first).
    int guard_uses = 0;
    int const_assignments = 0;
};

struct Transition {
    uint64_t from = 0;
    uint64_t to = 0;
    std::vector<GuardAtom> guard; // conjunction; empty = unconditional
    std::string guard_str;        // canonical rendering, "" = unconditional
    std::set<std::string> guard_support;
    bool synthetic_hold = false;  // implicit "no assignment fires" self-loop
};

struct Fsm {
    StateRegister reg;
    std::set<uint64_t> states;
    std::vector<Transition> transitions; // sorted by (from, to, guard_str)
    std::optional<uint64_t> reset_state;
    bool reset_heuristic_used = false;   // sync reset found via signal name
    bool reset_unidentifiable = false;   // no reset: all states initial
};

struct StateGraph {
    std::set<uint64_t> states;
    std::map<uint64_t, std::set<uint64_t>> successors;
    std::set<uint64_t> reachable;         // from reset (all states if unknown)
    std::vector<uint64_t> unreachable;    // declared but not reachable
};

/// Sequential signals that (a) are assigned only constant values and (b) are
/// compared against constants in at least one guard. Ordered by descending
/// (guard uses, constant assignments), name as the tiebreak. Counters with
/// non-constant updates are excluded. Empty when the design has no FSM.
std::vector<StateRegister> find_state_registers(const DataflowGraph& graph);

/// Recover states, guarded transitions and the reset state for one register.
/// Reset-branch assignments become the reset state instead of transitions;
/// implicit "hold" self-loops are synthesized for states that can retain
/// their value. Per-state guard residuals substitute the register's value,
/// so transition guards never mention the register itself.
///
/// Errors: non-constant assignment to the register (internal error),
/// ambiguous reset (two different reset constants).
Fsm extract_fsm(const DataflowGraph& graph, const StateRegister& reg);

/// The constant assigned under reset. Errors on ambiguity; returns nullopt
/// (and sets *unidentifiable) when no reset assignment exists.
std::optional<uint64_t> find_reset_state(const DataflowGraph& graph, const std::string& reg_name,
                                         bool* heuristic_used, bool* unidentifiable);

StateGraph state_graph(const Fsm& fsm);

/// BFS distance (in transitions) from `from` to `to`; -1 if unreachable.
/// A zero-length walk does not count: distance(s, s) needs a cycle.
int transition_distance(const StateGraph& sg, uint64_t from, uint64_t to);

/// DOT rendering for documentation and golden tests.
std::string fsm_to_dot(const Fsm& fsm);

} // namespace rtlleak
