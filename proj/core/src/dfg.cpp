// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/dfg.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <sstream>

namespace rtlleak {

bool guard_satisfied(const GuardAtom& atom,
                     const std::function<uint64_t(const std::string&)>& env) {
    uint64_t v = eval_expr(atom.cond, env);
    switch (atom.polarity) {
        case GuardPolarity::Then: return v != 0;
        case GuardPolarity::Else: return v == 0;
        case GuardPolarity::CaseArm: return v == mask_width(atom.case_value, atom.cond->width);
    }
    return false;
}

std::string to_string(const GuardAtom& atom) {
    switch (atom.polarity) {
        case GuardPolarity::Then: return to_string(atom.cond);
        case GuardPolarity::Else: return "!(" + to_string(atom.cond) + ")";
        case GuardPolarity::CaseArm:
            return "(" + to_string(atom.cond) + " == " + std::to_string(atom.cond->width) + "'d" +
                   std::to_string(mask_width(atom.case_value, atom.cond->width)) + ")";
    }
    return "?";
}

const Signal* DataflowGraph::find_signal(const std::string& name) const {
    auto it = signal_index.find(name);
    return it == signal_index.end() ? nullptr : &signals[it->second];
}

const Signal& DataflowGraph::signal_at(const std::string& name) const {
    const Signal* s = find_signal(name);
    if (!s) throw DiagError("unknown signal '" + name + "'");
    return *s;
}

std::vector<int> DataflowGraph::assignments_to(const std::string& name) const {
    std::vector<int> out;
    for (const auto& a : assignments)
        if (a.target == name) out.push_back(a.id);
    return out;
}

bool DataflowGraph::is_sequential(const std::string& name) const {
    for (const auto& a : assignments)
        if (a.target == name && a.kind == AssignKind::Sequential) return true;
    return false;
}

namespace {

struct Builder {
    DataflowGraph g;
    int next_assign_id = 0;

    void add_signal_table(const ModuleDecl& m) {
        auto add = [&](const std::string& name, int width, NetKind kind, bool in, bool out) {
            Signal s;
            s.name = name;
            s.width = width;
            s.kind = kind;
            s.is_input = in;
            s.is_output = out;
            s.obs = out ? Observability::Output
                        : (in ? Observability::PublicInput : Observability::Internal);
            g.signal_index[name] = static_cast<int>(g.signals.size());
            g.signals.push_back(std::move(s));
        };
        for (const auto& p : m.ports)
            add(p.name, p.width, p.is_reg ? NetKind::Reg : NetKind::Wire,
                p.dir == PortDir::Input, p.dir == PortDir::Output);
        for (const auto& d : m.nets) add(d.name, d.width, d.kind, false, false);
    }

    void detect_clock_and_reset(const ModuleDecl& m) {
        for (const auto& item : m.items) {
            if (item.kind != ItemKind::Always || !item.always.clocked) continue;
            const auto& blk = item.always;
            if (g.clock.empty()) {
                g.clock = blk.clock;
            } else if (g.clock != blk.clock) {
                throw DiagError("multiple clock domains ('" + g.clock + "' vs '" + blk.clock +
                                    "') are outside the supported subset",
                                blk.loc);
            }
            if (blk.async_reset) {
                if (g.reset.empty()) {
                    g.reset = blk.async_reset->signal;
                    g.reset_active_low = blk.async_reset->negedge;
                } else if (g.reset != blk.async_reset->signal) {
                    throw DiagError("conflicting asynchronous reset signals ('" + g.reset +
                                        "' vs '" + blk.async_reset->signal + "')",
                                    blk.loc);
                }
            }
        }
        if (g.reset.empty()) {
            // Name heuristic, only used to drive the simulator and skip the
            // guard in quantification; FSM reset detection re-derives polarity
            // from the guard structure.
            for (const auto& s : g.signals) {
                if (!s.is_input) continue;
                std::string low;
                for (char c : s.name) low.push_back(static_cast<char>(std::tolower(c)));
                if (low.rfind("rst", 0) == 0 || low.rfind("reset", 0) == 0 ||
                    (low.size() >= 3 && low.substr(low.size() - 3) == "rst") ||
                    (low.size() >= 5 && low.substr(low.size() - 5) == "reset") ||
                    (low.size() >= 5 && low.substr(low.size() - 5) == "rst_n") ||
                    (low.size() >= 6 && low.substr(low.size() - 6) == "resetn")) {
                    g.reset = s.name;
                    g.reset_active_low = low.back() == 'n';
                    break;
                }
            }
        }
        if (!g.clock.empty()) {
            if (!g.signal_index.count(g.clock))
                throw DiagError("clock '" + g.clock + "' is not declared");
            g.signals[g.signal_index.at(g.clock)].is_clock = true;
        }
        if (!g.reset.empty() && g.signal_index.count(g.reset))
            g.signals[g.signal_index.at(g.reset)].is_reset = true;
    }

    bool cond_tests_reset(const ExprPtr& cond) const {
        if (g.reset.empty()) return false;
        auto s = support(cond);
        return s.size() == 1 && *s.begin() == g.reset;
    }

    // Emit one assignment, lowering top-level ternaries into guard atoms.
    void emit(const std::string& target, int hi, int lo, ExprPtr rhs,
              std::vector<GuardAtom> guards, AssignKind kind, int item_index, int stmt_id,
              bool in_reset, SourceLoc loc) {
        if (rhs->kind == ExprKind::Ternary) {
            GuardAtom then_atom, else_atom;
            then_atom.cond = else_atom.cond = rhs->args[0];
            then_atom.polarity = GuardPolarity::Then;
            else_atom.polarity = GuardPolarity::Else;
            then_atom.is_reset = else_atom.is_reset = cond_tests_reset(rhs->args[0]);
            GuardOrigin origin;
            origin.stmt_id = stmt_id;
            origin.arm_count = 2;
            origin.is_ternary = true;
            then_atom.origin = origin;
            then_atom.origin.arm_index = 0;
            else_atom.origin = origin;
            else_atom.origin.arm_index = 1;

            auto then_guards = guards;
            then_guards.push_back(then_atom);
            emit(target, hi, lo, rhs->args[1], std::move(then_guards), kind, item_index, stmt_id,
                 in_reset, loc);
            guards.push_back(else_atom);
            emit(target, hi, lo, rhs->args[2], std::move(guards), kind, item_index, stmt_id,
                 in_reset, loc);
            return;
        }
        Assignment a;
        a.id = next_assign_id++;
        a.stmt_id = stmt_id;
        a.target = target;
        a.hi = hi;
        a.lo = lo;
        a.rhs = std::move(rhs);
        a.guards = std::move(guards);
        a.kind = kind;
        a.item_index = item_index;
        a.in_reset_branch = in_reset;
        a.loc = loc;
        g.assignments.push_back(std::move(a));
    }

    void walk_stmt(const StmtPtr& s, std::vector<GuardAtom>& guards, AssignKind kind,
                   int item_index, bool in_reset) {
        if (!s) return;
        switch (s->kind) {
            case StmtKind::Block:
                for (const auto& c : s->stmts) walk_stmt(c, guards, kind, item_index, in_reset);
                break;
            case StmtKind::If: {
                bool reset_cond = cond_tests_reset(s->cond);
                GuardOrigin origin;
                origin.stmt_id = s->id;
                origin.arm_count = 2;
                origin.has_default = s->else_branch != nullptr;

                GuardAtom then_atom;
                then_atom.cond = s->cond;
                then_atom.polarity = GuardPolarity::Then;
                then_atom.is_reset = reset_cond;
                then_atom.origin = origin;
                then_atom.origin.arm_index = 0;

                bool then_is_reset_branch = false, else_is_reset_branch = false;
                if (reset_cond && !g.reset.empty()) {
                    uint64_t asserted = g.reset_active_low ? 0 : 1;
                    uint64_t cond_at_reset =
                        eval_expr(s->cond, [&](const std::string&) { return asserted; });
                    then_is_reset_branch = cond_at_reset != 0;
                    else_is_reset_branch = !then_is_reset_branch;
                }

                guards.push_back(then_atom);
                walk_stmt(s->then_branch, guards, kind, item_index,
                          in_reset || then_is_reset_branch);
                guards.pop_back();

                if (s->else_branch) {
                    GuardAtom else_atom = then_atom;
                    else_atom.polarity = GuardPolarity::Else;
                    else_atom.origin.arm_index = 1;
                    guards.push_back(else_atom);
                    walk_stmt(s->else_branch, guards, kind, item_index,
                              in_reset || else_is_reset_branch);
                    guards.pop_back();
                }
                break;
            }
            case StmtKind::Case: {
                GuardOrigin origin;
                origin.stmt_id = s->id;
                origin.arm_count = static_cast<int>(s->arms.size());
                origin.is_case = true;
                for (const auto& arm : s->arms)
                    if (arm.labels.empty()) origin.has_default = true;

                std::vector<uint64_t> listed;
                for (const auto& arm : s->arms)
                    for (const auto& l : arm.labels)
                        listed.push_back(mask_width(l->value, s->case_expr->width));
                std::set<uint64_t> distinct(listed.begin(), listed.end());
                origin.full_coverage =
                    s->case_expr->width < 20 &&
                    distinct.size() == (uint64_t(1) << s->case_expr->width);

                int arm_index = 0;
                for (const auto& arm : s->arms) {
                    if (arm.labels.empty()) {
                        // Default arm: conjunction of negated equalities over
                        // the listed values.
                        size_t before = guards.size();
                        for (uint64_t v : listed) {
                            GuardAtom atom;
                            atom.cond = Expr::binary(
                                BinOp::Eq, s->case_expr,
                                Expr::constant(v, s->case_expr->width, s->loc), s->loc);
                            atom.polarity = GuardPolarity::Else;
                            atom.is_reset = cond_tests_reset(s->case_expr);
                            atom.origin = origin;
                            atom.origin.arm_index = arm_index;
                            guards.push_back(atom);
                        }
                        walk_stmt(arm.body, guards, kind, item_index, in_reset);
                        guards.resize(before);
                    } else {
                        for (const auto& label : arm.labels) {
                            GuardAtom atom;
                            atom.cond = s->case_expr;
                            atom.polarity = GuardPolarity::CaseArm;
                            atom.case_value = mask_width(label->value, s->case_expr->width);
                            atom.is_reset = cond_tests_reset(s->case_expr);
                            atom.origin = origin;
                            atom.origin.arm_index = arm_index;
                            guards.push_back(atom);
                            walk_stmt(arm.body, guards, kind, item_index, in_reset);
                            guards.pop_back();
                        }
                    }
                    arm_index++;
                }
                break;
            }
            case StmtKind::Assign: {
                const Signal& sig = g.signal_at(s->target.name);
                int hi = s->target.hi >= 0 ? s->target.hi : sig.width - 1;
                int lo = s->target.lo >= 0 ? s->target.lo : 0;
                emit(s->target.name, hi, lo, s->rhs, guards, kind, item_index, s->id, in_reset,
                     s->loc);
                break;
            }
        }
    }

    // --- combinational completeness (latch rejection) ----------------------

    // Set of signals assigned on every path through `s` (whole-signal writes).
    std::set<std::string> must_write(const StmtPtr& s) {
        if (!s) return {};
        switch (s->kind) {
            case StmtKind::Block: {
                std::set<std::string> acc;
                for (const auto& c : s->stmts) {
                    auto w = must_write(c);
                    acc.insert(w.begin(), w.end());
                }
                return acc;
            }
            case StmtKind::If: {
                if (!s->else_branch) return {};
                auto a = must_write(s->then_branch);
                auto b = must_write(s->else_branch);
                std::set<std::string> join;
                for (const auto& n : a)
                    if (b.count(n)) join.insert(n);
                return join;
            }
            case StmtKind::Case: {
                bool has_default = false;
                for (const auto& arm : s->arms)
                    if (arm.labels.empty()) has_default = true;
                uint64_t labels = 0;
                for (const auto& arm : s->arms) labels += arm.labels.size();
                bool full = has_default ||
                            (s->case_expr->width < 20 &&
                             labels == (uint64_t(1) << s->case_expr->width));
                if (!full || s->arms.empty()) return {};
                std::set<std::string> join = must_write(s->arms[0].body);
                for (size_t i = 1; i < s->arms.size(); ++i) {
                    auto w = must_write(s->arms[i].body);
                    std::set<std::string> next;
                    for (const auto& n : join)
                        if (w.count(n)) next.insert(n);
                    join = std::move(next);
                }
                return join;
            }
            case StmtKind::Assign:
                if (s->target.hi < 0) return {s->target.name};
                return {};
        }
        return {};
    }

    void collect_written(const StmtPtr& s, std::set<std::string>& whole,
                         std::set<std::string>& partial, bool conditional) {
        if (!s) return;
        switch (s->kind) {
            case StmtKind::Block:
                for (const auto& c : s->stmts) collect_written(c, whole, partial, conditional);
                break;
            case StmtKind::If:
                collect_written(s->then_branch, whole, partial, true);
                collect_written(s->else_branch, whole, partial, true);
                break;
            case StmtKind::Case:
                for (const auto& arm : s->arms) collect_written(arm.body, whole, partial, true);
                break;
            case StmtKind::Assign:
                if (s->target.hi < 0) {
                    whole.insert(s->target.name);
                } else {
                    partial.insert(s->target.name);
                    if (conditional)
                        throw DiagError("latch inferred: conditional part-select write to '" +
                                            s->target.name + "' in a combinational block",
                                        s->loc);
                }
                break;
        }
    }

    void check_comb_completeness(const AlwaysBlock& blk) {
        std::set<std::string> whole, partial;
        collect_written(blk.body, whole, partial, false);
        auto complete = must_write(blk.body);
        for (const auto& n : whole) {
            if (!complete.count(n))
                throw DiagError("latch inferred: '" + n +
                                    "' is not assigned on every path of a combinational block",
                                blk.loc);
        }
    }

    // Reads of signals whose value comes from outside the block (upward
    // exposed). `written` tracks must-written signals so far.
    void exposed_reads(const StmtPtr& s, std::set<std::string>& written,
                       std::set<std::string>& out) {
        if (!s) return;
        switch (s->kind) {
            case StmtKind::Block:
                for (const auto& c : s->stmts) exposed_reads(c, written, out);
                break;
            case StmtKind::If: {
                for (const auto& n : support(s->cond))
                    if (!written.count(n)) out.insert(n);
                auto w_then = written, w_else = written;
                exposed_reads(s->then_branch, w_then, out);
                exposed_reads(s->else_branch, w_else, out);
                if (s->else_branch) {
                    for (const auto& n : w_then)
                        if (w_else.count(n)) written.insert(n);
                }
                break;
            }
            case StmtKind::Case: {
                for (const auto& n : support(s->case_expr))
                    if (!written.count(n)) out.insert(n);
                std::vector<std::set<std::string>> arm_written;
                for (const auto& arm : s->arms) {
                    auto w = written;
                    exposed_reads(arm.body, w, out);
                    arm_written.push_back(std::move(w));
                }
                // Joins only matter for completeness, handled elsewhere.
                break;
            }
            case StmtKind::Assign: {
                for (const auto& n : support(s->rhs))
                    if (!written.count(n)) out.insert(n);
                if (s->target.hi < 0) written.insert(s->target.name);
                break;
            }
        }
    }

    // --- driver conflicts & comb ordering ----------------------------------

    void check_drivers() {
        // target bit -> (item, kind) ownership; sequential regs may be driven
        // from several clocked blocks, combinational bits get one driver.
        std::map<std::pair<std::string, int>, int> comb_owner;
        std::map<std::string, AssignKind> kind_of;
        for (const auto& a : g.assignments) {
            auto it = kind_of.find(a.target);
            if (it == kind_of.end()) {
                kind_of[a.target] = a.kind;
            } else if (it->second != a.kind) {
                throw DiagError("'" + a.target + "' is driven both sequentially and combinationally",
                                a.loc);
            }
            if (a.kind == AssignKind::Combinational) {
                for (int b = a.lo; b <= a.hi; ++b) {
                    auto key = std::make_pair(a.target, b);
                    auto oit = comb_owner.find(key);
                    if (oit == comb_owner.end()) {
                        comb_owner[key] = a.item_index;
                    } else if (oit->second != a.item_index) {
                        throw DiagError("multiple combinational drivers for '" + a.target + "[" +
                                            std::to_string(b) + "]'",
                                        a.loc);
                    }
                }
            }
        }
    }

    void order_comb_items(const ModuleDecl& m) {
        // Unit = one combinational item. Edges: unit reading a signal another
        // unit writes.
        std::vector<int> comb_items;
        std::map<int, std::set<std::string>> writes, reads;
        for (size_t i = 0; i < m.items.size(); ++i) {
            const auto& item = m.items[i];
            if (item.kind == ItemKind::ContAssign) {
                comb_items.push_back(static_cast<int>(i));
                writes[static_cast<int>(i)].insert(item.cont.target.name);
                auto s = support(item.cont.rhs);
                reads[static_cast<int>(i)].insert(s.begin(), s.end());
            } else if (item.kind == ItemKind::Always && !item.always.clocked) {
                comb_items.push_back(static_cast<int>(i));
                std::set<std::string> whole, partial;
                collect_written(item.always.body, whole, partial, false);
                writes[static_cast<int>(i)].insert(whole.begin(), whole.end());
                writes[static_cast<int>(i)].insert(partial.begin(), partial.end());
                std::set<std::string> written, exposed;
                exposed_reads(item.always.body, written, exposed);
                reads[static_cast<int>(i)] = std::move(exposed);
            }
        }
        std::map<std::string, int> writer;
        for (int i : comb_items)
            for (const auto& w : writes[i]) writer[w] = i;

        std::map<int, int> state; // 0 unvisited, 1 in stack, 2 done
        std::vector<int> order;
        std::vector<int> stack;
        std::function<void(int)> visit = [&](int i) {
            state[i] = 1;
            stack.push_back(i);
            for (const auto& r : reads[i]) {
                auto it = writer.find(r);
                if (it == writer.end()) continue;
                int dep = it->second;
                if (state[dep] == 1) {
                    // Cycle: report the signals written by units on the cycle.
                    std::set<std::string> cycle_signals;
                    bool in_cycle = false;
                    for (int u : stack) {
                        if (u == dep) in_cycle = true;
                        if (in_cycle)
                            cycle_signals.insert(writes[u].begin(), writes[u].end());
                    }
                    std::string list;
                    for (const auto& n : cycle_signals) {
                        if (!list.empty()) list += ", ";
                        list += n;
                    }
                    throw DiagError("combinational loop through {" + list + "}");
                }
                if (state[dep] == 0) visit(dep);
            }
            stack.pop_back();
            state[i] = 2;
            order.push_back(i);
        };
        for (int i : comb_items)
            if (state[i] == 0) visit(i);
        g.comb_item_order = std::move(order);
    }

    void finalize_signals() {
        std::set<std::string> assigned;
        for (const auto& a : g.assignments) assigned.insert(a.target);
        for (auto& s : g.signals) {
            if (s.is_input || s.is_clock) continue;
            if (!assigned.count(s.name)) {
                if (s.is_output)
                    throw DiagError("output '" + s.name + "' is never assigned");
                s.free_internal = true;
            }
        }
    }

    void build_dep_edges() {
        for (const auto& a : g.assignments) {
            std::set<std::string> sources = support(a.rhs);
            for (const auto& atom : a.guards) {
                auto s = support(atom.cond);
                sources.insert(s.begin(), s.end());
            }
            for (const auto& src : sources) g.dep_edges.push_back({src, a.id, a.target});
        }
    }
};

} // namespace

DataflowGraph build_graph(const ModuleDecl& flat) {
    Builder b;
    b.g.module = flat;
    b.add_signal_table(flat);
    b.detect_clock_and_reset(flat);

    for (size_t i = 0; i < flat.items.size(); ++i) {
        const auto& item = flat.items[i];
        if (item.kind == ItemKind::ContAssign) {
            const Signal& sig = b.g.signal_at(item.cont.target.name);
            int hi = item.cont.target.hi >= 0 ? item.cont.target.hi : sig.width - 1;
            int lo = item.cont.target.lo >= 0 ? item.cont.target.lo : 0;
            std::vector<GuardAtom> none;
            b.emit(item.cont.target.name, hi, lo, item.cont.rhs, none,
                   AssignKind::Combinational, static_cast<int>(i), item.cont.stmt_id, false,
                   item.cont.loc);
        } else if (item.kind == ItemKind::Always) {
            const auto& blk = item.always;
            if (!blk.clocked) b.check_comb_completeness(blk);
            std::vector<GuardAtom> guards;
            b.walk_stmt(blk.body, guards,
                        blk.clocked ? AssignKind::Sequential : AssignKind::Combinational,
                        static_cast<int>(i), false);
        } else {
            throw DiagError("build_graph requires an elaborated (instance-free) module");
        }
    }

    // A clocked reg written under the async reset branch: mark those
    // assignments via the reset-atom structure walked above. walk_stmt set
    // in_reset through cond_tests_reset + polarity evaluation.
    b.check_drivers();
    b.finalize_signals();
    b.order_comb_items(flat);
    b.build_dep_edges();
    return std::move(b.g);
}

DataflowGraph label_secret(const DataflowGraph& graph, const std::string& signal_name) {
    DataflowGraph g = graph;
    auto it = g.signal_index.find(signal_name);
    if (it == g.signal_index.end())
        throw DiagError("unknown signal '" + signal_name + "' cannot be labeled secret");
    Signal& s = g.signals[it->second];
    if (s.is_output)
        throw DiagError("'" + signal_name +
                        "' is an observable output; labeling it secret contradicts the "
                        "threat model");
    bool is_register = g.is_sequential(signal_name) && s.kind == NetKind::Reg;
    if (!s.is_input && !is_register)
        throw DiagError("secret '" + signal_name + "' must be an input or a register");
    if (s.is_clock || s.is_reset)
        throw DiagError("clock/reset '" + signal_name + "' cannot be the secret");
    for (auto& other : g.signals)
        if (other.obs == Observability::Secret) other.obs =
            other.is_input ? Observability::PublicInput : Observability::Internal;
    s.obs = Observability::Secret;
    g.secret = signal_name;
    return g;
}

namespace {

using BitSet = std::set<std::pair<std::string, int>>;

std::vector<BitSet> expr_bit_deps(const DataflowGraph& g, const ExprPtr& e);

// Union of every bit-level dependency of `e`: the conservative cross-operator
// fallback still respects structural slicing inside the operands.
void all_bits_of(const DataflowGraph& g, const ExprPtr& e, BitSet& out) {
    for (const auto& per_bit : expr_bit_deps(g, e)) out.insert(per_bit.begin(), per_bit.end());
}

// Per-bit dependency vector for `e` (index = bit position, LSB first).
std::vector<BitSet> expr_bit_deps(const DataflowGraph& g, const ExprPtr& e) {
    std::vector<BitSet> out(static_cast<size_t>(std::max(e->width, 1)));
    switch (e->kind) {
        case ExprKind::Const:
            break;
        case ExprKind::Ident:
            for (int i = 0; i < e->width; ++i) out[i].insert({e->name, i});
            break;
        case ExprKind::BitSel: {
            if (e->args[1]->kind == ExprKind::Const) {
                out[0].insert({e->name, static_cast<int>(e->args[1]->value)});
            } else {
                all_bits_of(g, e->args[0], out[0]);
                all_bits_of(g, e->args[1], out[0]);
            }
            break;
        }
        case ExprKind::PartSel:
            for (int i = 0; i < e->width; ++i) out[i].insert({e->name, e->lo + i});
            break;
        case ExprKind::Concat: {
            int offset = 0;
            for (auto it = e->args.rbegin(); it != e->args.rend(); ++it) {
                auto part = expr_bit_deps(g, *it);
                for (int i = 0; i < (*it)->width; ++i)
                    if (offset + i < e->width) out[offset + i] = std::move(part[i]);
                offset += (*it)->width;
            }
            break;
        }
        case ExprKind::Unary: {
            auto arg = expr_bit_deps(g, e->args[0]);
            if (e->un_op == UnOp::BitNot) {
                for (int i = 0; i < e->width && i < e->args[0]->width; ++i)
                    out[i] = std::move(arg[i]);
            } else {
                // reductions / logical not: one bit from all argument bits
                BitSet all;
                for (auto& s : arg) all.insert(s.begin(), s.end());
                out[0] = std::move(all);
            }
            break;
        }
        case ExprKind::Binary: {
            switch (e->bin_op) {
                case BinOp::And:
                case BinOp::Or:
                case BinOp::Xor: {
                    auto a = expr_bit_deps(g, e->args[0]);
                    auto b = expr_bit_deps(g, e->args[1]);
                    for (int i = 0; i < e->width; ++i) {
                        if (i < e->args[0]->width) out[i].insert(a[i].begin(), a[i].end());
                        if (i < e->args[1]->width) out[i].insert(b[i].begin(), b[i].end());
                    }
                    break;
                }
                case BinOp::Shl:
                case BinOp::Shr: {
                    if (e->args[1]->kind == ExprKind::Const) {
                        int k = static_cast<int>(e->args[1]->value);
                        auto a = expr_bit_deps(g, e->args[0]);
                        for (int i = 0; i < e->width; ++i) {
                            int src = e->bin_op == BinOp::Shl ? i - k : i + k;
                            if (src >= 0 && src < e->args[0]->width) out[i] = a[src];
                        }
                    } else {
                        BitSet all;
                        all_bits_of(g, e->args[0], all);
                        all_bits_of(g, e->args[1], all);
                        for (auto& o : out) o = all;
                    }
                    break;
                }
                default: {
                    // arithmetic / comparisons: conservative all-bits
                    BitSet all;
                    all_bits_of(g, e->args[0], all);
                    all_bits_of(g, e->args[1], all);
                    for (auto& o : out) o = all;
                    break;
                }
            }
            break;
        }
        case ExprKind::Ternary: {
            auto t = expr_bit_deps(g, e->args[1]);
            auto f = expr_bit_deps(g, e->args[2]);
            BitSet cond;
            all_bits_of(g, e->args[0], cond);
            for (int i = 0; i < e->width; ++i) {
                if (i < e->args[1]->width) out[i].insert(t[i].begin(), t[i].end());
                if (i < e->args[2]->width) out[i].insert(f[i].begin(), f[i].end());
                out[i].insert(cond.begin(), cond.end());
            }
            break;
        }
    }
    return out;
}

} // namespace

std::map<int, std::set<std::pair<std::string, int>>> bit_slice_deps(const DataflowGraph& graph,
                                                                    const Assignment& a) {
    std::map<int, BitSet> out;
    auto rhs = expr_bit_deps(graph, a.rhs);
    int target_bits = a.target_width();
    for (int i = 0; i < target_bits; ++i) {
        BitSet deps;
        if (i < a.rhs->width) deps = rhs[i];
        out[a.lo + i] = std::move(deps);
    }
    return out;
}

std::set<std::pair<std::string, int>> guard_bit_sources(const DataflowGraph& graph,
                                                        const Assignment& a) {
    BitSet out;
    for (const auto& atom : a.guards) all_bits_of(graph, atom.cond, out);
    return out;
}

std::set<std::string> tainted_signals(const DataflowGraph& graph) {
    std::set<std::string> tainted;
    if (graph.secret.empty()) return tainted;
    tainted.insert(graph.secret);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : graph.dep_edges) {
            if (tainted.count(e.source) && !tainted.count(e.target)) {
                tainted.insert(e.target);
                changed = true;
            }
        }
    }
    return tainted;
}

std::string dump_graph(const DataflowGraph& graph) {
    std::ostringstream os;
    for (const auto& a : graph.assignments) {
        const Signal& sig = graph.signal_at(a.target);
        os << a.target;
        if (a.lo != 0 || a.hi != sig.width - 1) os << "[" << a.hi << ":" << a.lo << "]";
        os << (a.kind == AssignKind::Sequential ? " <= " : " = ");
        os << to_string(a.rhs);
        if (!a.guards.empty()) {
            os << " [";
            for (size_t i = 0; i < a.guards.size(); ++i) {
                if (i) os << " && ";
                os << to_string(a.guards[i]);
            }
            os << "]";
        }
        os << " @" << a.loc.line << ":" << a.loc.col << "\n";
    }
    return os.str();
}

} // namespace rtlleak
