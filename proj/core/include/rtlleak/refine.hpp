// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rtlleak/fsm.hpp"
#include "rtlleak/paths.hpp"
#include "rtlleak/quantify.hpp"

namespace rtlleak {

struct StateSequenceEntry {
    uint64_t state = 0;
    int clock_cycle = 0;
    int hop_index = 0;
};

/// A path's hops mapped onto FSM states and minimal clock cycles. Hops are
/// grouped per cycle: combinational hops feeding a register write share its
/// cycle; combinational hops after the last write read one cycle later.
struct StateSequence {
    std::vector<StateSequenceEntry> entries;
    int leaking_cycle = 0;         // cycle of the last data transfer
    bool empty_state_hop = false;  // some hop enabled in no state
    bool start_unreachable = false;

    // One group per cycle: the hop indices and the enabled state set.
    struct Group {
        std::vector<int> hops;
        std::set<uint64_t> states;
        int cycle = 0;
        std::string carrier; // register carrying the value out of this group
        uint64_t carrier_bits = 0;
    };
    std::vector<Group> groups;
};

enum class Verdict { Valid, InvalidOrder, InvalidOverwrite };

struct LoopInfo {
    std::vector<int> hop_indices;      // recurring subsequence within the path
    std::vector<std::string> signals;  // loop signal set, sorted
    int min_iterations = 1;
    bool structural_lower_bound = false; // guard data-dependent, count structural
};

struct PathVerdict {
    std::string path_id;
    Verdict verdict = Verdict::Valid;
    std::optional<LoopInfo> loop; // valid paths only
};

struct UnrollPlan {
    std::vector<std::string> signals; // sorted loop signal set
    int iterations = 1;
};

/// Map each hop to the FSM states that enable its assignment and stamp
/// minimal clock cycles from reset.
StateSequence compute_state_sequence(const LeakagePath& path, const Fsm& fsm,
                                     const StateGraph& sgraph, const DataflowGraph& graph);

/// Order check: consecutive cycle groups need a realizable FSM walk during
/// which the carrying register is not necessarily rewritten. No walk at all
/// is an order mismatch; walks that always cross a rewriting state mean the
/// carried value is overwritten en route.
PathVerdict validate_path(const LeakagePath& path, const StateSequence& seq, const Fsm& fsm,
                          const StateGraph& sgraph, const DataflowGraph& graph);

/// A hop subsequence whose source recurs later in the path. min_iterations =
/// shortest transition walk from the loop-entry state to the leaking state,
/// divided by the sequential hops consumed per iteration.
std::optional<LoopInfo> detect_loops(const LeakagePath& path, const StateSequence& seq,
                                     const Fsm& fsm, const StateGraph& sgraph,
                                     const DataflowGraph& graph);

/// Cut the loop's back-edges and lay the loop body out as a chain of fresh
/// `s__u<k>` signals; iteration 1 reads the original sources, consumers read
/// `s__u<iterations>`. The result is synthetic (static analysis only).
DataflowGraph unroll(const DataflowGraph& graph, const UnrollPlan& plan);

/// Evaluate an unrolled chain signal as a pure function: follow defining
/// assignments, ignoring guards. `env` supplies base signal values. All
/// assignments to a chain signal must share one normalized right-hand side.
uint64_t eval_chain_value(const DataflowGraph& graph, const std::string& name,
                          const std::map<std::string, uint64_t>& env);

struct RefineConfig {
    PathConfig paths;
    int max_rounds = 4;
    int max_unroll = 64;
};

struct RoundStats {
    int round = 0;
    int paths_enumerated = 0;
    int invalid_order = 0;
    int invalid_overwrite = 0;
    std::vector<UnrollPlan> loops;
    std::vector<std::string> signals_introduced;
};

struct RefinementResult {
    DataflowGraph final_graph;
    std::vector<LeakagePath> paths;      // final round, all
    std::vector<PathVerdict> verdicts;   // final round, aligned with paths
    std::vector<BitLeakage> bits;        // quantified over valid paths only
    std::vector<RoundStats> rounds;
    bool fixpoint_reached = true;
    bool no_fsm = false; // no extractable FSM: results equal the time-agnostic run
};

/// Steps 2 and 3 as a fixpoint: enumerate, validate against every governing
/// FSM (any invalidation wins), detect loops, unroll at min_iterations,
/// re-enumerate; stops when a round produces no unroll plans, bounded by
/// max_rounds. Designs without an extractable FSM return the time-agnostic
/// result unchanged, flagged no_fsm.
RefinementResult refine_and_rerun(const DataflowGraph& graph, const RefineConfig& cfg = {});

} // namespace rtlleak
