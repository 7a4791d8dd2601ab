// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rtlleak/paths.hpp"

namespace rtlleak {

struct Thresholds {
    double detect = 0.02026;
    double warn = 0.001;

    void validate() const {
        if (!(0.0 < warn && warn < detect && detect < 1.0))
            throw DiagError("thresholds must satisfy 0 < warn < detect < 1");
    }
};

enum class LeakClass { Detected, Warned, Negligible };

struct BitLeakage {
    int secret_bit = 0;
    double value = 0.0;
    std::string witness_path; // id of the strongest path, "" when none
    LeakClass classification = LeakClass::Negligible;
};

struct ClassSummary {
    int count = 0;
    double avg = 0.0; // meaningless when count == 0 (rendered "0/-")
};

struct LeakageSummary {
    ClassSummary detected;
    ClassSummary warned;
};

/// Static estimate of how much of the secret one path can carry, in [0, 1].
/// 1.0 means the chain transmits the bit outright (structural copies,
/// attacker-invertible mixing). Guards attenuate by their exact firing
/// probability when their support consists of public inputs (enumerated
/// jointly across correlated conditions); guards on secret-tainted or
/// internal signals do not attenuate. Mixing with a provably unobservable
/// undriven signal (a one-time-pad shape) zeroes the path.
double path_estimate(const DataflowGraph& graph, const LeakagePath& path);

/// Max over the bit's paths. Empty path list gives leakage 0.
BitLeakage quantify_bit(const DataflowGraph& graph, int bit,
                        const std::vector<LeakagePath>& paths_for_bit);

/// Quantify every secret bit from a full path set (paths carry their bit).
std::vector<BitLeakage> quantify_all(const DataflowGraph& graph,
                                     const std::vector<LeakagePath>& paths);

/// Apply thresholds: detected iff value >= detect (closed bound), warned iff
/// warn <= value < detect. Returns per-class counts and averages over the
/// classified subset.
LeakageSummary classify(std::vector<BitLeakage>& bits, const Thresholds& thresholds);

} // namespace rtlleak
