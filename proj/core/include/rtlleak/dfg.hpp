// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtlleak/ast.hpp"

namespace rtlleak {

enum class Observability { Secret, PublicInput, Output, Internal };

struct Signal {
    std::string name;
    int width = 1;
    NetKind kind = NetKind::Wire;
    bool is_input = false;
    bool is_output = false;
    Observability obs = Observability::Internal;
    bool is_clock = false;
    bool is_reset = false;
    // Undriven non-input: behaves as an unobservable uniform unknown.
    bool free_internal = false;
};

enum class GuardPolarity { Then, Else, CaseArm };

/// Where a guard atom came from; exemption analysis needs the branch shape.
struct GuardOrigin {
    int stmt_id = -1;   // the If/Case statement, or the assign for ternaries
    int arm_index = -1; // 0 = then / first case arm, 1 = else / second arm, ...
    int arm_count = 0;
    bool has_default = false;
    bool full_coverage = false; // case labels cover every selector value
    bool is_case = false;
    bool is_ternary = false;
};

struct GuardAtom {
    ExprPtr cond;
    GuardPolarity polarity = GuardPolarity::Then;
    uint64_t case_value = 0;
    bool is_reset = false; // condition tests the reset signal
    GuardOrigin origin;
};

/// True iff the atom holds under `env`.
bool guard_satisfied(const GuardAtom& atom,
                     const std::function<uint64_t(const std::string&)>& env);

/// Canonical one-line rendering, e.g. `start`, `!(rst_n)`, `(state == 3'd2)`.
std::string to_string(const GuardAtom& atom);

enum class AssignKind { Sequential, Combinational };

struct Assignment {
    int id = 0;
    int stmt_id = -1;
    std::string target;
    int hi = 0, lo = 0; // assigned bit range (absolute, hi >= lo)
    ExprPtr rhs;
    std::vector<GuardAtom> guards; // full path condition, outermost first
    AssignKind kind = AssignKind::Combinational;
    int item_index = -1; // defining item in the flattened module
    bool in_reset_branch = false;
    SourceLoc loc;

    int target_width() const { return hi - lo + 1; }
};

struct DepEdge {
    std::string source;
    int assignment = 0;
    std::string target;
};

struct DataflowGraph {
    ModuleDecl module; // flattened design the graph was built from
    std::vector<Signal> signals;
    std::map<std::string, int> signal_index;
    std::vector<Assignment> assignments;
    std::vector<DepEdge> dep_edges;
    // Combinational items (cont assigns + comb always blocks) in evaluation
    // order; indices into module.items.
    std::vector<int> comb_item_order;
    std::string clock;            // single clock domain; empty for pure comb designs
    std::string reset;            // identified reset signal, empty if none
    bool reset_active_low = true;
    std::string secret;           // set by label_secret
    bool synthetic = false;       // unrolled graphs carry no executable AST

    const Signal* find_signal(const std::string& name) const;
    const Signal& signal_at(const std::string& name) const;
    std::vector<int> assignments_to(const std::string& name) const;
    bool is_sequential(const std::string& name) const;

    int secret_width() const { return secret.empty() ? 0 : signal_at(secret).width; }
};

/// Build the guarded dataflow graph from a flattened module. Ternaries at the
/// top of an assignment right-hand side lower into then/else guarded
/// assignments. dep_edges carry implicit flows: guard-condition signals are
/// sources of the guarded target.
///
/// Errors: combinational loops (with the cycle's signal list), latch
/// inference in combinational blocks, conflicting drivers, unassigned
/// outputs, mixed clock domains.
DataflowGraph build_graph(const ModuleDecl& flat);

/// Mark `signal_name` as the analysis secret. Errors: unknown signal, signal
/// is an observable output (contradicts the threat model), signal is neither
/// an input nor a register.
DataflowGraph label_secret(const DataflowGraph& graph, const std::string& signal_name);

/// Exact bit-level dependency map of one assignment's right-hand side:
/// absolute target bit -> {(source signal, source bit)}. Copies, part
/// selects, concatenations and constant shifts map exactly; arithmetic,
/// comparisons, variable shifts and reductions fall back to all-bits.
/// Guard dependencies are not included (see guard_bit_sources).
std::map<int, std::set<std::pair<std::string, int>>> bit_slice_deps(const DataflowGraph& graph,
                                                                    const Assignment& a);

/// All (signal, bit) pairs read by the assignment's guard conditions.
std::set<std::pair<std::string, int>> guard_bit_sources(const DataflowGraph& graph,
                                                        const Assignment& a);

/// Signals transitively influenced by the secret (via dep_edges, implicit
/// flows included). The secret itself is in the set.
std::set<std::string> tainted_signals(const DataflowGraph& graph);

/// Deterministic text dump, one assignment per line:
/// `target <= rhs [guards] @line:col`.
std::string dump_graph(const DataflowGraph& graph);

} // namespace rtlleak
