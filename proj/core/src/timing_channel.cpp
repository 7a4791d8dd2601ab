// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/timing_channel.hpp"

#include <algorithm>
#include <sstream>

namespace rtlleak {

namespace {

// Per-cycle reachable state sets from reset; index = cycle.
std::vector<std::set<uint64_t>> reachable_by_cycle(const Fsm* fsm, const StateGraph* sg,
                                                   int horizon) {
    std::vector<std::set<uint64_t>> r(static_cast<size_t>(horizon));
    if (!fsm) return r;
    std::set<uint64_t> frontier;
    if (fsm->reset_state) frontier.insert(*fsm->reset_state);
    else frontier = sg->states;
    for (int t = 0; t < horizon; ++t) {
        r[static_cast<size_t>(t)] = frontier;
        std::set<uint64_t> next;
        for (uint64_t s : frontier) {
            auto it = sg->successors.find(s);
            if (it != sg->successors.end()) next.insert(it->second.begin(), it->second.end());
        }
        frontier = std::move(next);
    }
    return r;
}

std::set<uint64_t> assignment_states(const Assignment& a, const Fsm* fsm) {
    if (!fsm) return {};
    std::set<uint64_t> states = fsm->states;
    for (const auto& atom : a.guards) {
        if (atom.is_reset) continue;
        auto sup = support(atom.cond);
        if (!sup.count(fsm->reg.signal)) continue;
        std::set<uint64_t> keep;
        for (uint64_t s : states) {
            std::map<std::string, ExprPtr> sub;
            sub[fsm->reg.signal] = Expr::constant(s, fsm->reg.width, atom.cond->loc);
            ExprPtr folded = const_fold(substitute(atom.cond, sub));
            if (folded->kind == ExprKind::Const) {
                GuardAtom spec = atom;
                spec.cond = folded;
                if (guard_satisfied(spec, [](const std::string&) { return 0; })) keep.insert(s);
            } else {
                keep.insert(s);
            }
        }
        states = std::move(keep);
        if (states.empty()) break;
    }
    return states;
}

bool enabled_at(const Assignment& a, const Fsm* fsm,
                const std::vector<std::set<uint64_t>>& reach, int t) {
    if (!fsm) return true;
    auto states = assignment_states(a, fsm);
    for (uint64_t s : states)
        if (reach[static_cast<size_t>(t)].count(s)) return true;
    return false;
}

std::string normalized_rhs(const Assignment& a) {
    return to_string(const_fold(a.rhs));
}

} // namespace

int default_horizon(const Fsm* fsm) {
    if (!fsm || fsm->states.empty()) return 16;
    int n = static_cast<int>(fsm->states.size());
    return std::max(16, 2 * n * n);
}

SequentialDependencyList build_dependency_list(const DataflowGraph& graph, const Fsm* fsm,
                                               int horizon) {
    if (horizon < 1) throw DiagError("dependency horizon must be at least 1");
    if (graph.secret.empty()) throw DiagError("secret not labeled");

    SequentialDependencyList out;
    out.horizon = horizon;

    StateGraph sg;
    if (fsm) sg = state_graph(*fsm);
    // One extra cycle probes whether the horizon cut the propagation short.
    auto reach = reachable_by_cycle(fsm, fsm ? &sg : nullptr, horizon + 1);

    std::map<std::string, int> fire;      // reported stamp
    std::map<std::string, int> readable;  // cycle readers first see the taint
    fire[graph.secret] = 0;
    readable[graph.secret] = 0;

    for (int t = 0; t <= horizon; ++t) {
        bool changed = true;
        while (changed) { // combinational cascade settles within the cycle
            changed = false;
            for (const auto& a : graph.assignments) {
                if (a.in_reset_branch) continue;
                if (fire.count(a.target)) continue;
                if (!enabled_at(a, fsm, reach, t)) continue;
                std::set<std::string> sources = support(a.rhs);
                for (const auto& atom : a.guards) {
                    if (atom.is_reset) continue;
                    auto s = support(atom.cond);
                    sources.insert(s.begin(), s.end());
                }
                bool tainted_source = false;
                for (const auto& src : sources) {
                    auto it = readable.find(src);
                    if (it != readable.end() && it->second <= t) {
                        tainted_source = true;
                        break;
                    }
                }
                if (!tainted_source) continue;
                fire[a.target] = t;
                readable[a.target] = a.kind == AssignKind::Sequential ? t + 1 : t;
                changed = true;
                if (t >= horizon) out.truncated = true;
            }
        }
    }
    // The probe cycle's discoveries are beyond the horizon and stay out.
    for (auto it = fire.begin(); it != fire.end();) {
        if (it->second >= horizon) it = fire.erase(it);
        else ++it;
    }
    out.first_tainted_cycle = std::move(fire);
    return out;
}

std::vector<TimingChannelFinding> detect_timing_channels(const DataflowGraph& graph,
                                                         const Fsm* fsm,
                                                         const SequentialDependencyList& deps) {
    StateGraph sg;
    if (fsm) sg = state_graph(*fsm);
    auto reach = reachable_by_cycle(fsm, fsm ? &sg : nullptr, deps.horizon);

    // Exemption pre-pass: group assignments by everything except the branch
    // arm of one conditional; a group covering every arm with an identical
    // normalized right-hand side neutralizes that conditional.
    // key: (origin stmt, target, range, norm rhs, guards minus that stmt)
    std::map<std::string, std::set<int>> arms_seen;
    auto exemption_key = [&](const Assignment& a, int origin_stmt) {
        std::ostringstream key;
        key << origin_stmt << "|" << a.target << "[" << a.hi << ":" << a.lo
            << "]=" << normalized_rhs(a) << "|";
        for (const auto& atom : a.guards) {
            if (atom.origin.stmt_id == origin_stmt) continue;
            key << to_string(atom) << "&";
        }
        return key.str();
    };
    for (const auto& a : graph.assignments) {
        std::set<int> origin_stmts;
        for (const auto& atom : a.guards)
            if (atom.origin.stmt_id >= 0) origin_stmts.insert(atom.origin.stmt_id);
        for (int os : origin_stmts) {
            for (const auto& atom : a.guards) {
                if (atom.origin.stmt_id != os) continue;
                arms_seen[exemption_key(a, os)].insert(atom.origin.arm_index);
                break;
            }
        }
    }

    auto atom_neutralized = [&](const Assignment& a, const GuardAtom& atom) {
        const GuardOrigin& o = atom.origin;
        if (o.stmt_id < 0 || o.arm_count < 2) return false;
        if (o.is_case && !(o.has_default || o.full_coverage)) return false;
        if (!o.is_case && !o.is_ternary && !o.has_default) return false; // if without else
        const auto& seen = arms_seen[exemption_key(a, o.stmt_id)];
        for (int arm = 0; arm < o.arm_count; ++arm)
            if (!seen.count(arm)) return false;
        return true;
    };

    std::vector<TimingChannelFinding> findings;
    std::set<std::string> dedupe; // collapse exempt arm twins
    for (const auto& a : graph.assignments) {
        if (a.in_reset_branch || a.guards.empty()) continue;

        // Earliest cycle the assignment can fire.
        int earliest = -1;
        for (int t = 0; t < deps.horizon; ++t) {
            if (enabled_at(a, fsm, reach, t)) {
                earliest = t;
                break;
            }
        }
        if (earliest < 0) continue; // unreachable within the horizon

        // Tainted-before conditions.
        bool any_tainted = false;
        bool all_neutralized = true;
        std::string best_signal;
        int best_cycle = 0;
        std::string reason;
        for (const auto& atom : a.guards) {
            if (atom.is_reset) continue;
            std::string sig;
            int cyc = 0;
            bool tainted = false;
            for (const auto& n : support(atom.cond)) {
                auto it = deps.first_tainted_cycle.find(n);
                if (it == deps.first_tainted_cycle.end()) continue;
                if (it->second < earliest) {
                    if (!tainted || it->second < cyc || (it->second == cyc && n < sig)) {
                        sig = n;
                        cyc = it->second;
                    }
                    tainted = true;
                }
            }
            if (!tainted) continue;
            any_tainted = true;
            if (atom_neutralized(a, atom)) {
                if (reason.empty())
                    reason = atom.origin.is_case ? "case-identical" : "if-else-identical";
            } else {
                all_neutralized = false;
            }
            if (best_signal.empty() || cyc < best_cycle ||
                (cyc == best_cycle && sig < best_signal)) {
                best_signal = sig;
                best_cycle = cyc;
            }
        }
        if (!any_tainted) continue;

        TimingChannelFinding f;
        f.location = a.loc;
        f.condition_signal = best_signal;
        f.condition_tainted_cycle = best_cycle;
        f.assignment_target = a.target;
        f.assignment_states = assignment_states(a, fsm);
        f.earliest_fire_cycle = earliest;
        f.exempted = all_neutralized;
        if (f.exempted) f.exempt_reason = reason;

        if (f.exempted) {
            std::ostringstream k;
            k << a.target << "[" << a.hi << ":" << a.lo << "]=" << normalized_rhs(a);
            if (!dedupe.insert(k.str()).second) continue; // one finding per exempt twin set
        }
        findings.push_back(std::move(f));
    }

    std::sort(findings.begin(), findings.end(),
              [](const TimingChannelFinding& a, const TimingChannelFinding& b) {
                  if (a.location.line != b.location.line) return a.location.line < b.location.line;
                  if (a.location.col != b.location.col) return a.location.col < b.location.col;
                  return a.assignment_target < b.assignment_target;
              });
    return findings;
}

int non_exempt_count(const std::vector<TimingChannelFinding>& findings) {
    int n = 0;
    for (const auto& f : findings)
        if (!f.exempted) n++;
    return n;
}

} // namespace rtlleak
