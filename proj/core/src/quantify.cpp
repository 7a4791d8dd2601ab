// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/quantify.hpp"

#include <algorithm>
#include <deque>

namespace rtlleak {

namespace {

constexpr int kGuardEnumBudget = 20; // bits per correlated guard group

// Can `m` reach any output through dep edges when `skip_assignment` is
// removed from the graph?
bool reaches_output_without(const DataflowGraph& g, const std::string& m, int skip_assignment) {
    std::set<std::string> seen{m};
    std::deque<std::string> queue{m};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        if (g.signal_at(cur).is_output) return true;
        for (const auto& e : g.dep_edges) {
            if (e.source != cur || e.assignment == skip_assignment) continue;
            if (seen.insert(e.target).second) queue.push_back(e.target);
        }
    }
    return false;
}

// One-time-pad shape: rhs is `carried OP other` with OP in {^, +, -} and
// `other` a bare reference to an undriven, untainted signal that reaches no
// observable except through this very assignment.
bool hop_masked(const DataflowGraph& g, const Assignment& a, const PathHop& hop,
                const std::set<std::string>& tainted) {
    if (hop.implicit) return false;
    const ExprPtr& rhs = a.rhs;
    if (rhs->kind != ExprKind::Binary) return false;
    if (rhs->bin_op != BinOp::Xor && rhs->bin_op != BinOp::Add && rhs->bin_op != BinOp::Sub)
        return false;

    auto lsup = support(rhs->args[0]);
    auto rsup = support(rhs->args[1]);
    const ExprPtr* other = nullptr;
    const std::set<std::string>* carried_sup = nullptr;
    if (lsup.count(hop.source) && !rsup.count(hop.source)) {
        other = &rhs->args[1];
        carried_sup = &lsup;
    } else if (rsup.count(hop.source) && !lsup.count(hop.source)) {
        other = &rhs->args[0];
        carried_sup = &rsup;
    } else {
        return false;
    }

    const ExprPtr& o = *other;
    if (o->kind != ExprKind::Ident && o->kind != ExprKind::PartSel && o->kind != ExprKind::BitSel)
        return false;
    // A pad occurring on the carried side too could cancel itself out.
    if (carried_sup->count(o->name)) return false;
    const Signal& pad = g.signal_at(o->name);
    if (!pad.free_internal || tainted.count(pad.name)) return false;
    if (reaches_output_without(g, pad.name, a.id)) return false;

    if (rhs->bin_op == BinOp::Xor) {
        // Pad covers only its own width; higher target bits leak through.
        uint64_t covered = 0;
        for (int b = 0; b < o->width && a.lo + b <= a.hi; ++b)
            covered |= uint64_t(1) << (a.lo + b);
        return (hop.target_bits & ~covered) == 0;
    }
    // Add/sub: carries move information upward, demand full-width pads.
    return o->width >= a.target_width();
}

struct AtomKey {
    std::string rendered;
    bool operator<(const AtomKey& o) const { return rendered < o.rendered; }
};

// Enumerate a correlated group of guard atoms over the bits of their public
// input support, all uniform: exact joint firing probability.
double group_probability(const DataflowGraph& g, const std::vector<const GuardAtom*>& atoms,
                         const std::set<std::string>& sup) {
    std::vector<std::pair<std::string, int>> bits; // (signal, bit)
    for (const auto& name : sup) {
        const Signal& s = g.signal_at(name);
        for (int b = 0; b < s.width; ++b) bits.emplace_back(name, b);
    }
    if (static_cast<int>(bits.size()) > kGuardEnumBudget) return 1.0; // conservatively no attenuation

    uint64_t total = uint64_t(1) << bits.size();
    uint64_t sat = 0;
    std::map<std::string, uint64_t> env;
    for (uint64_t idx = 0; idx < total; ++idx) {
        for (auto& [_, v] : env) v = 0;
        for (size_t i = 0; i < bits.size(); ++i)
            if ((idx >> i) & 1) env[bits[i].first] |= uint64_t(1) << bits[i].second;
        bool all = true;
        for (const GuardAtom* atom : atoms) {
            if (!guard_satisfied(*atom, [&](const std::string& n) {
                    auto it = env.find(n);
                    return it == env.end() ? 0 : it->second;
                })) {
                all = false;
                break;
            }
        }
        if (all) sat++;
    }
    return static_cast<double>(sat) / static_cast<double>(total);
}

} // namespace

double path_estimate(const DataflowGraph& graph, const LeakagePath& path) {
    auto tainted = tainted_signals(graph);

    // Masking hop zeroes the whole path.
    for (const auto& hop : path.hops) {
        const Assignment& a = graph.assignments[static_cast<size_t>(hop.assignment)];
        if (hop_masked(graph, a, hop, tainted)) return 0.0;
    }

    // Distinct guard atoms along the path, keyed by canonical rendering.
    std::map<AtomKey, const GuardAtom*> atoms;
    for (const auto& hop : path.hops) {
        const Assignment& a = graph.assignments[static_cast<size_t>(hop.assignment)];
        for (const auto& atom : a.guards) {
            if (atom.is_reset) continue;
            atoms.insert({AtomKey{to_string(atom)}, &atom});
        }
    }

    // Keep only atoms whose entire support is public inputs; everything else
    // (secret-tainted or internal conditions) contributes no attenuation.
    std::vector<const GuardAtom*> enumerable;
    std::vector<std::set<std::string>> supports;
    for (const auto& [_, atom] : atoms) {
        auto sup = support(atom->cond);
        bool public_only = true;
        for (const auto& n : sup) {
            const Signal& s = graph.signal_at(n);
            if (!(s.is_input && s.obs == Observability::PublicInput) || tainted.count(n) ||
                s.is_clock || s.is_reset) {
                public_only = false;
                break;
            }
        }
        if (public_only && !sup.empty()) {
            enumerable.push_back(atom);
            supports.push_back(std::move(sup));
        } else if (sup.empty()) {
            // Constant-folded guard: fires always or never.
            if (!guard_satisfied(*atom, [](const std::string&) { return 0; })) return 0.0;
        }
    }

    // Union-find over shared support: correlated atoms enumerate jointly.
    std::vector<int> parent(enumerable.size());
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)];
        return x;
    };
    for (size_t i = 0; i < enumerable.size(); ++i) {
        for (size_t j = i + 1; j < enumerable.size(); ++j) {
            bool overlap = false;
            for (const auto& n : supports[i])
                if (supports[j].count(n)) { overlap = true; break; }
            if (overlap) parent[static_cast<size_t>(find(static_cast<int>(j)))] =
                find(static_cast<int>(i));
        }
    }
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < enumerable.size(); ++i)
        groups[find(static_cast<int>(i))].push_back(i);

    double estimate = 1.0;
    for (const auto& [_, members] : groups) {
        std::vector<const GuardAtom*> group_atoms;
        std::set<std::string> sup;
        for (size_t i : members) {
            group_atoms.push_back(enumerable[i]);
            sup.insert(supports[i].begin(), supports[i].end());
        }
        estimate *= group_probability(graph, group_atoms, sup);
    }
    return estimate;
}

BitLeakage quantify_bit(const DataflowGraph& graph, int bit,
                        const std::vector<LeakagePath>& paths_for_bit) {
    BitLeakage out;
    out.secret_bit = bit;
    for (const auto& p : paths_for_bit) {
        if (p.secret_bit != bit) continue;
        double v = path_estimate(graph, p);
        if (v > out.value) {
            out.value = v;
            out.witness_path = p.id;
        } else if (v == out.value && v > 0.0 &&
                   (out.witness_path.empty() || p.id < out.witness_path)) {
            out.witness_path = p.id;
        }
    }
    return out;
}

std::vector<BitLeakage> quantify_all(const DataflowGraph& graph,
                                     const std::vector<LeakagePath>& paths) {
    std::vector<BitLeakage> out;
    int width = graph.secret_width();
    for (int b = 0; b < width; ++b) {
        std::vector<LeakagePath> mine;
        for (const auto& p : paths)
            if (p.secret_bit == b) mine.push_back(p);
        out.push_back(quantify_bit(graph, b, mine));
    }
    return out;
}

LeakageSummary classify(std::vector<BitLeakage>& bits, const Thresholds& thresholds) {
    thresholds.validate();
    LeakageSummary summary;
    double sum_detected = 0.0, sum_warned = 0.0;
    for (auto& b : bits) {
        if (b.value >= thresholds.detect) {
            b.classification = LeakClass::Detected;
            summary.detected.count++;
            sum_detected += b.value;
        } else if (b.value >= thresholds.warn) {
            b.classification = LeakClass::Warned;
            summary.warned.count++;
            sum_warned += b.value;
        } else {
            b.classification = LeakClass::Negligible;
        }
    }
    if (summary.detected.count > 0) summary.detected.avg = sum_detected / summary.detected.count;
    if (summary.warned.count > 0) summary.warned.avg = sum_warned / summary.warned.count;
    return summary;
}

} // namespace rtlleak
