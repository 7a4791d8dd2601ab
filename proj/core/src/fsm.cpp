// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/fsm.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace rtlleak {

namespace {

// Does this guard atom compare `reg` against a constant?
bool atom_compares_reg(const GuardAtom& atom, const std::string& reg) {
    const ExprPtr& c = atom.cond;
    if (atom.polarity == GuardPolarity::CaseArm)
        return c->kind == ExprKind::Ident && c->name == reg;
    if (c->kind == ExprKind::Binary && (c->bin_op == BinOp::Eq || c->bin_op == BinOp::Ne)) {
        const auto& l = c->args[0];
        const auto& r = c->args[1];
        if (l->kind == ExprKind::Ident && l->name == reg && r->kind == ExprKind::Const) return true;
        if (r->kind == ExprKind::Ident && r->name == reg && l->kind == ExprKind::Const) return true;
    }
    return false;
}

// True when the assignment fires under an asserted reset (async branch or a
// reset-testing guard satisfied at the asserted level).
bool fires_under_reset(const DataflowGraph& g, const Assignment& a) {
    if (a.in_reset_branch) return true;
    if (g.reset.empty()) return false;
    uint64_t asserted = g.reset_active_low ? 0 : 1;
    uint64_t deasserted = g.reset_active_low ? 1 : 0;
    for (const auto& atom : a.guards) {
        if (!atom.is_reset) continue;
        bool at_reset =
            guard_satisfied(atom, [&](const std::string&) { return asserted; });
        bool at_normal =
            guard_satisfied(atom, [&](const std::string&) { return deasserted; });
        if (at_reset && !at_normal) return true;
    }
    return false;
}

ExprPtr atom_to_expr(const GuardAtom& atom) {
    switch (atom.polarity) {
        case GuardPolarity::Then:
            return atom.cond;
        case GuardPolarity::Else:
            return Expr::unary(UnOp::LogNot, atom.cond, atom.cond->loc);
        case GuardPolarity::CaseArm:
            return Expr::binary(BinOp::Eq, atom.cond,
                                Expr::constant(atom.case_value, atom.cond->width, atom.cond->loc),
                                atom.cond->loc);
    }
    return atom.cond;
}

ExprPtr conjunction(const std::vector<GuardAtom>& atoms) {
    ExprPtr acc;
    for (const auto& a : atoms) {
        ExprPtr e = atom_to_expr(a);
        if (e->width > 1) e = Expr::unary(UnOp::RedOr, e, e->loc);
        acc = acc ? Expr::binary(BinOp::And, acc, e, e->loc) : e;
    }
    return acc;
}

std::string render_guard(const std::vector<GuardAtom>& atoms) {
    std::string out;
    for (const auto& a : atoms) {
        if (!out.empty()) out += " && ";
        out += to_string(a);
    }
    return out;
}

// Substitute reg := value in an atom's condition and fold. Returns one of:
// keep (residual atom), drop (always true), dead (always false).
enum class AtomFate { Keep, Drop, Dead };

AtomFate specialize_atom(const GuardAtom& atom, const std::string& reg, uint64_t value, int width,
                         GuardAtom& out) {
    std::map<std::string, ExprPtr> sub;
    sub[reg] = Expr::constant(value, width, atom.cond->loc);
    ExprPtr folded = const_fold(substitute(atom.cond, sub));
    GuardAtom res = atom;
    res.cond = folded;
    if (folded->kind == ExprKind::Const) {
        bool sat = guard_satisfied(res, [](const std::string&) { return 0; });
        return sat ? AtomFate::Drop : AtomFate::Dead;
    }
    out = std::move(res);
    return AtomFate::Keep;
}

} // namespace

std::vector<StateRegister> find_state_registers(const DataflowGraph& graph) {
    std::vector<StateRegister> out;
    std::set<std::string> sequential;
    for (const auto& a : graph.assignments)
        if (a.kind == AssignKind::Sequential) sequential.insert(a.target);

    for (const auto& name : sequential) {
        const Signal& sig = graph.signal_at(name);
        if (sig.is_clock || sig.is_reset) continue;

        bool all_const = true;
        int const_assignments = 0;
        for (const auto& a : graph.assignments) {
            if (a.target != name) continue;
            if (const_fold(a.rhs)->kind != ExprKind::Const) {
                all_const = false;
                break;
            }
            const_assignments++;
        }
        if (!all_const || const_assignments == 0) continue;

        int guard_uses = 0;
        for (const auto& a : graph.assignments)
            for (const auto& atom : a.guards)
                if (atom_compares_reg(atom, name)) guard_uses++;
        if (guard_uses == 0) continue;

        StateRegister r;
        r.signal = name;
        r.width = sig.width;
        r.guard_uses = guard_uses;
        r.const_assignments = const_assignments;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const StateRegister& a, const StateRegister& b) {
        if (a.guard_uses != b.guard_uses) return a.guard_uses > b.guard_uses;
        if (a.const_assignments != b.const_assignments)
            return a.const_assignments > b.const_assignments;
        return a.signal < b.signal;
    });
    return out;
}

std::optional<uint64_t> find_reset_state(const DataflowGraph& graph, const std::string& reg_name,
                                         bool* heuristic_used, bool* unidentifiable) {
    const Signal& sig = graph.signal_at(reg_name);
    std::set<uint64_t> values;
    bool via_async = false;
    for (const auto& a : graph.assignments) {
        if (a.target != reg_name || a.kind != AssignKind::Sequential) continue;
        if (!fires_under_reset(graph, a)) continue;
        ExprPtr folded = const_fold(a.rhs);
        if (folded->kind != ExprKind::Const)
            throw DiagError("reset assignment to '" + reg_name + "' is not constant", a.loc);
        values.insert(mask_width(folded->value, sig.width));
        if (a.in_reset_branch) via_async = true;
    }
    if (values.empty()) {
        if (unidentifiable) *unidentifiable = true;
        return std::nullopt;
    }
    if (values.size() > 1)
        throw DiagError("ambiguous reset: '" + reg_name + "' takes " +
                        std::to_string(values.size()) + " different constants under reset");
    if (heuristic_used) *heuristic_used = !via_async;
    return *values.begin();
}

Fsm extract_fsm(const DataflowGraph& graph, const StateRegister& reg) {
    Fsm fsm;
    fsm.reg = reg;
    const Signal& sig = graph.signal_at(reg.signal);

    // States: every constant assigned to the register plus every constant it
    // is compared against anywhere in the design.
    for (const auto& a : graph.assignments) {
        if (a.target == reg.signal && a.kind == AssignKind::Sequential) {
            ExprPtr folded = const_fold(a.rhs);
            if (folded->kind != ExprKind::Const)
                throw DiagError("internal error: non-constant assignment to state register '" +
                                    reg.signal + "'",
                                a.loc);
            fsm.states.insert(mask_width(folded->value, sig.width));
        }
        for (const auto& atom : a.guards) {
            if (!atom_compares_reg(atom, reg.signal)) continue;
            if (atom.polarity == GuardPolarity::CaseArm) {
                fsm.states.insert(mask_width(atom.case_value, sig.width));
            } else {
                const auto& l = atom.cond->args[0];
                const auto& r = atom.cond->args[1];
                uint64_t v = l->kind == ExprKind::Const ? l->value : r->value;
                fsm.states.insert(mask_width(v, sig.width));
            }
        }
    }

    bool heuristic = false, unident = false;
    fsm.reset_state = find_reset_state(graph, reg.signal, &heuristic, &unident);
    fsm.reset_heuristic_used = heuristic;
    fsm.reset_unidentifiable = unident;
    if (fsm.reset_state) fsm.states.insert(*fsm.reset_state);

    // Candidate transitions per source state, in assignment (source) order so
    // later same-state writes can override earlier ones.
    struct Candidate {
        int order;
        uint64_t to;
        std::vector<GuardAtom> atoms; // residual, register substituted out
    };
    std::map<uint64_t, std::vector<Candidate>> per_state;

    for (const auto& a : graph.assignments) {
        if (a.target != reg.signal || a.kind != AssignKind::Sequential) continue;
        if (fires_under_reset(graph, a)) continue;
        uint64_t to = mask_width(const_fold(a.rhs)->value, sig.width);
        for (uint64_t s : fsm.states) {
            std::vector<GuardAtom> residual;
            bool dead = false;
            for (const auto& atom : a.guards) {
                if (atom.is_reset) continue; // post-reset operation assumed
                GuardAtom spec;
                switch (specialize_atom(atom, reg.signal, s, sig.width, spec)) {
                    case AtomFate::Drop: break;
                    case AtomFate::Dead: dead = true; break;
                    case AtomFate::Keep: residual.push_back(std::move(spec)); break;
                }
                if (dead) break;
            }
            if (dead) continue;
            per_state[s].push_back({a.id, to, std::move(residual)});
        }
    }

    for (uint64_t s : fsm.states) {
        auto& cands = per_state[s];
        std::sort(cands.begin(), cands.end(),
                  [](const Candidate& a, const Candidate& b) { return a.order < b.order; });

        bool can_hold = true;
        for (size_t i = 0; i < cands.size(); ++i) {
            Transition t;
            t.from = s;
            t.to = cands[i].to;
            t.guard = cands[i].atoms;
            // Later writes in the same cycle win: guard the earlier candidate
            // with the negation of each later candidate's condition.
            for (size_t j = i + 1; j < cands.size(); ++j) {
                if (cands[j].atoms.empty()) {
                    t.guard.clear();
                    t.to = t.from; // shadowed entirely; drop below
                    break;
                }
                GuardAtom neg;
                neg.cond = conjunction(cands[j].atoms);
                neg.polarity = GuardPolarity::Else;
                t.guard.push_back(std::move(neg));
            }
            bool shadowed = false;
            for (size_t j = i + 1; j < cands.size(); ++j)
                if (cands[j].atoms.empty()) shadowed = true;
            if (shadowed) continue;

            if (cands[i].atoms.empty()) can_hold = false;
            t.guard_str = render_guard(t.guard);
            for (const auto& atom : t.guard) {
                auto sup = support(atom.cond);
                t.guard_support.insert(sup.begin(), sup.end());
            }
            fsm.transitions.push_back(std::move(t));
        }

        if (can_hold) {
            Transition hold;
            hold.from = s;
            hold.to = s;
            hold.synthetic_hold = true;
            if (!cands.empty()) {
                std::vector<ExprPtr> fires;
                for (const auto& c : cands) fires.push_back(conjunction(c.atoms));
                ExprPtr any = fires[0];
                for (size_t i = 1; i < fires.size(); ++i)
                    any = Expr::binary(BinOp::Or, any, fires[i], any->loc);
                GuardAtom atom;
                atom.cond = any;
                atom.polarity = GuardPolarity::Else;
                hold.guard.push_back(atom);
                hold.guard_str = render_guard(hold.guard);
                auto sup = support(any);
                hold.guard_support.insert(sup.begin(), sup.end());
            }
            fsm.transitions.push_back(std::move(hold));
        }
    }

    std::sort(fsm.transitions.begin(), fsm.transitions.end(),
              [](const Transition& a, const Transition& b) {
                  if (a.from != b.from) return a.from < b.from;
                  if (a.to != b.to) return a.to < b.to;
                  return a.guard_str < b.guard_str;
              });
    fsm.transitions.erase(std::unique(fsm.transitions.begin(), fsm.transitions.end(),
                                      [](const Transition& a, const Transition& b) {
                                          return a.from == b.from && a.to == b.to &&
                                                 a.guard_str == b.guard_str;
                                      }),
                          fsm.transitions.end());
    return fsm;
}

StateGraph state_graph(const Fsm& fsm) {
    StateGraph sg;
    sg.states = fsm.states;
    for (const auto& t : fsm.transitions) sg.successors[t.from].insert(t.to);

    std::deque<uint64_t> queue;
    if (fsm.reset_state) {
        sg.reachable.insert(*fsm.reset_state);
        queue.push_back(*fsm.reset_state);
    } else {
        for (uint64_t s : fsm.states) {
            sg.reachable.insert(s);
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        uint64_t s = queue.front();
        queue.pop_front();
        auto it = sg.successors.find(s);
        if (it == sg.successors.end()) continue;
        for (uint64_t n : it->second) {
            if (sg.reachable.insert(n).second) queue.push_back(n);
        }
    }
    for (uint64_t s : sg.states)
        if (!sg.reachable.count(s)) sg.unreachable.push_back(s);
    return sg;
}

int transition_distance(const StateGraph& sg, uint64_t from, uint64_t to) {
    // Shortest nonzero walk: start from successors so distance(s, s) needs a
    // cycle through the graph.
    std::map<uint64_t, int> dist;
    std::deque<uint64_t> queue;
    auto it = sg.successors.find(from);
    if (it != sg.successors.end()) {
        for (uint64_t n : it->second) {
            if (!dist.count(n)) {
                dist[n] = 1;
                queue.push_back(n);
            }
        }
    }
    while (!queue.empty()) {
        uint64_t s = queue.front();
        queue.pop_front();
        if (s == to) return dist[s];
        auto sit = sg.successors.find(s);
        if (sit == sg.successors.end()) continue;
        for (uint64_t n : sit->second) {
            if (!dist.count(n)) {
                dist[n] = dist[s] + 1;
                queue.push_back(n);
            }
        }
    }
    auto dit = dist.find(to);
    return dit == dist.end() ? -1 : dit->second;
}

std::string fsm_to_dot(const Fsm& fsm) {
    std::ostringstream os;
    os << "digraph fsm {\n";
    os << "  // register: " << fsm.reg.signal << "\n";
    for (uint64_t s : fsm.states) {
        os << "  s" << s << " [label=\"" << s << "\"";
        if (fsm.reset_state && *fsm.reset_state == s) os << ", shape=doublecircle";
        os << "];\n";
    }
    for (const auto& t : fsm.transitions) {
        os << "  s" << t.from << " -> s" << t.to;
        std::string label = t.guard_str;
        if (t.synthetic_hold) label = label.empty() ? "(hold)" : label + " (hold)";
        if (!label.empty()) {
            std::string escaped;
            for (char c : label) {
                if (c == '"') escaped += "\\\"";
                else escaped += c;
            }
            os << " [label=\"" << escaped << "\"]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace rtlleak
