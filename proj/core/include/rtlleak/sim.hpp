// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlleak/dfg.hpp"

namespace rtlleak {

/// Which public inputs are sampled once at cycle 0 and held stable; all
/// other public inputs are resampled uniformly every cycle. Undriven
/// internal signals are always held (an unknown constant).
struct InputPolicy {
    std::set<std::string> held;
};

struct LeakageBudget {
    int max_free_bits = 20;
};

/// Everything the attacker sees, cycle by cycle: output values and public
/// input values (reset included, clock excluded).
struct ObservationTrace {
    std::vector<std::string> observed; // fixed order: outputs then public inputs
    std::vector<std::vector<uint64_t>> cycles;

    bool operator==(const ObservationTrace& o) const { return cycles == o.cycles; }
};

struct SimInputs {
    uint64_t secret_value = 0;
    std::map<std::string, uint64_t> held; // held publics + free internals
    std::map<std::string, std::vector<uint64_t>> streams; // resampled publics
};

/// Two-phase cycle-accurate simulation: sample inputs, settle combinational
/// logic, record observations, clock the registers. Reset is driven asserted
/// at cycle 0 and deasserted afterwards; asynchronous resets apply before the
/// first observation. Registers power up at 0.
///
/// Also reports every signal's settled per-cycle value through `probe` when
/// non-null (signal name -> per-cycle values), for tests and timing checks.
ObservationTrace simulate(const DataflowGraph& graph, const SimInputs& inputs, int cycles,
                          std::map<std::string, std::vector<uint64_t>>* probe = nullptr);

/// Exact leakage of one secret bit in [0, 1]: enumerate every assignment of
/// (secret, held inputs, free internals, resampled input streams) uniformly,
/// group identical observation traces, and compute the posterior Bayes
/// vulnerability V of the bit. Returns 2V - 1.
///
/// Errors: total free bits beyond the budget; unlabeled secret.
double exact_bit_leakage(const DataflowGraph& graph, int bit, int horizon,
                         const InputPolicy& policy = {}, const LeakageBudget& budget = {});

enum class TimingResult { Varies, Constant, Indeterminate };

struct TimingWitness {
    uint64_t secret_a = 0, secret_b = 0;
    int cycle_a = -1, cycle_b = -1; // first-assert cycles; -1 = never
};

struct TimingVariability {
    TimingResult result = TimingResult::Indeterminate;
    std::optional<TimingWitness> witness;
};

/// True variability iff two secret values yield different first-assert cycles
/// of `completion` with all public inputs held equal. Indeterminate when the
/// completion signal never asserts within the horizon.
TimingVariability exact_timing_variability(const DataflowGraph& graph,
                                           const std::string& completion, int horizon,
                                           const InputPolicy& policy = {},
                                           const LeakageBudget& budget = {});

/// Number of free bits the oracle would enumerate at this horizon.
int count_free_bits(const DataflowGraph& graph, int horizon, const InputPolicy& policy);

} // namespace rtlleak
