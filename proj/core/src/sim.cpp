// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/sim.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <functional>

namespace rtlleak {

namespace {

struct Machine {
    const DataflowGraph& g;
    std::map<std::string, uint64_t> values;

    explicit Machine(const DataflowGraph& graph) : g(graph) {
        if (graph.synthetic)
            throw DiagError("cannot simulate a synthetic (unrolled) graph");
        for (const auto& s : graph.signals) values[s.name] = 0;
    }

    uint64_t read(const std::string& name) const {
        auto it = values.find(name);
        return it == values.end() ? 0 : it->second;
    }

    void write(std::map<std::string, uint64_t>& dst, const LValue& lv, uint64_t v) {
        const Signal& sig = g.signal_at(lv.name);
        if (lv.hi < 0) {
            dst[lv.name] = mask_width(v, sig.width);
            return;
        }
        int w = lv.hi - lv.lo + 1;
        uint64_t mask = (w >= 64 ? ~uint64_t(0) : ((uint64_t(1) << w) - 1)) << lv.lo;
        uint64_t old = dst.count(lv.name) ? dst[lv.name] : read(lv.name);
        dst[lv.name] = mask_width((old & ~mask) | ((mask_width(v, w) << lv.lo) & mask), sig.width);
    }

    uint64_t eval(const ExprPtr& e) const {
        return eval_expr(e, [this](const std::string& n) { return read(n); });
    }

    // Execute a statement tree. Reads go through `read` (current values);
    // writes land in `dst` (same map for blocking, next-state for clocked).
    void exec(const StmtPtr& s, std::map<std::string, uint64_t>& dst) {
        if (!s) return;
        switch (s->kind) {
            case StmtKind::Block:
                for (const auto& c : s->stmts) exec(c, dst);
                break;
            case StmtKind::If:
                if (eval_in(dst, s->cond) != 0) {
                    exec(s->then_branch, dst);
                } else {
                    exec(s->else_branch, dst);
                }
                break;
            case StmtKind::Case: {
                uint64_t v = eval_in(dst, s->case_expr);
                const CaseArm* hit = nullptr;
                const CaseArm* def = nullptr;
                for (const auto& arm : s->arms) {
                    if (arm.labels.empty()) {
                        def = &arm;
                        continue;
                    }
                    for (const auto& l : arm.labels) {
                        if (mask_width(l->value, s->case_expr->width) == v) {
                            hit = &arm;
                            break;
                        }
                    }
                    if (hit) break;
                }
                if (!hit) hit = def;
                if (hit) exec(hit->body, dst);
                break;
            }
            case StmtKind::Assign:
                write(dst, s->target, eval_in(dst, s->rhs));
                break;
        }
    }

    // Blocking semantics need reads to see earlier writes from the same
    // block: prefer `dst` when it already holds the signal.
    uint64_t eval_in(const std::map<std::string, uint64_t>& dst, const ExprPtr& e) const {
        return eval_expr(e, [&](const std::string& n) {
            auto it = dst.find(n);
            return it != dst.end() ? it->second : read(n);
        });
    }

    void settle_comb() {
        for (int idx : g.comb_item_order) {
            const auto& item = g.module.items[static_cast<size_t>(idx)];
            if (item.kind == ItemKind::ContAssign) {
                write(values, item.cont.target, eval(item.cont.rhs));
            } else {
                exec(item.always.body, values);
            }
        }
    }

    bool reset_asserted() const {
        if (g.reset.empty()) return false;
        uint64_t v = read(g.reset);
        return g.reset_active_low ? v == 0 : v != 0;
    }

    // Asynchronous resets take effect level-sensitively: apply the reset
    // branch immediately while the reset is asserted.
    void apply_async_resets() {
        if (!reset_asserted()) return;
        for (const auto& item : g.module.items) {
            if (item.kind != ItemKind::Always || !item.always.clocked) continue;
            if (!item.always.async_reset) continue;
            const StmtPtr& body = item.always.body;
            // The body is `if (<reset cond>) ... else ...`; executing it with
            // the reset asserted runs exactly the reset branch, but we must
            // not run normal logic for blocks shaped differently.
            if (body && body->kind == StmtKind::If) {
                exec(body, values);
            } else if (body && body->kind == StmtKind::Block && body->stmts.size() == 1 &&
                       body->stmts[0]->kind == StmtKind::If) {
                exec(body->stmts[0], values);
            }
        }
    }

    void clock_edge() {
        std::map<std::string, uint64_t> next = values;
        for (const auto& item : g.module.items) {
            if (item.kind != ItemKind::Always || !item.always.clocked) continue;
            std::map<std::string, uint64_t> block_next;
            exec(item.always.body, block_next);
            for (const auto& [k, v] : block_next) next[k] = v;
        }
        values = std::move(next);
    }
};

} // namespace

ObservationTrace simulate(const DataflowGraph& graph, const SimInputs& inputs, int cycles,
                          std::map<std::string, std::vector<uint64_t>>* probe) {
    if (graph.secret.empty())
        throw DiagError("simulate requires a labeled secret");
    Machine m(graph);

    ObservationTrace trace;
    for (const auto& s : graph.signals)
        if (s.is_output) trace.observed.push_back(s.name);
    for (const auto& s : graph.signals)
        if (s.is_input && !s.is_clock && s.obs != Observability::Secret)
            trace.observed.push_back(s.name);

    for (int t = 0; t < cycles; ++t) {
        // 1. sample inputs
        for (const auto& s : graph.signals) {
            if (s.obs == Observability::Secret) {
                // Input secrets stay constant; register secrets only get
                // their initial value forced (the design evolves them).
                if (s.is_input || t == 0)
                    m.values[s.name] = mask_width(inputs.secret_value, s.width);
                continue;
            }
            if (s.is_clock) continue;
            if (s.is_reset) {
                uint64_t asserted = graph.reset_active_low ? 0 : 1;
                uint64_t deasserted = graph.reset_active_low ? 1 : 0;
                m.values[s.name] = t == 0 ? asserted : deasserted;
                continue;
            }
            if (s.is_input || s.free_internal) {
                auto held_it = inputs.held.find(s.name);
                if (held_it != inputs.held.end()) {
                    m.values[s.name] = mask_width(held_it->second, s.width);
                    continue;
                }
                auto st = inputs.streams.find(s.name);
                if (st != inputs.streams.end() && !st->second.empty()) {
                    m.values[s.name] =
                        mask_width(st->second[std::min<size_t>(t, st->second.size() - 1)],
                                   s.width);
                }
                // otherwise keep previous value (0 initially)
            }
        }

        // 2. level-sensitive async resets, 3. settle, 4. observe
        m.apply_async_resets();
        m.settle_comb();

        std::vector<uint64_t> row;
        row.reserve(trace.observed.size());
        for (const auto& name : trace.observed) row.push_back(m.read(name));
        trace.cycles.push_back(std::move(row));

        if (probe) {
            for (const auto& s : graph.signals) (*probe)[s.name].push_back(m.read(s.name));
        }

        // 5. clock edge
        m.clock_edge();
    }
    return trace;
}

namespace {

// One enumerable degree of freedom.
struct FreeBit {
    enum Kind { SecretBit, HeldBit, StreamBit } kind;
    std::string signal;
    int bit = 0;
    int cycle = 0; // StreamBit only
};

std::vector<FreeBit> free_bit_inventory(const DataflowGraph& g, int horizon,
                                        const InputPolicy& policy) {
    std::vector<FreeBit> bits;
    const Signal& sec = g.signal_at(g.secret);
    for (int b = 0; b < sec.width; ++b) bits.push_back({FreeBit::SecretBit, g.secret, b, 0});
    for (const auto& s : g.signals) {
        if (s.obs == Observability::Secret || s.is_clock || s.is_reset) continue;
        if (s.free_internal) {
            for (int b = 0; b < s.width; ++b) bits.push_back({FreeBit::HeldBit, s.name, b, 0});
            continue;
        }
        if (!s.is_input) continue;
        if (policy.held.count(s.name)) {
            for (int b = 0; b < s.width; ++b) bits.push_back({FreeBit::HeldBit, s.name, b, 0});
        } else {
            for (int t = 0; t < horizon; ++t)
                for (int b = 0; b < s.width; ++b)
                    bits.push_back({FreeBit::StreamBit, s.name, b, t});
        }
    }
    return bits;
}

SimInputs decode_inputs(const DataflowGraph& g, const std::vector<FreeBit>& bits, uint64_t index,
                        int horizon) {
    SimInputs in;
    for (const auto& s : g.signals) {
        if (s.obs == Observability::Secret || s.is_clock || s.is_reset) continue;
        if (s.is_input && !s.free_internal) in.streams[s.name].assign(static_cast<size_t>(horizon), 0);
    }
    for (size_t i = 0; i < bits.size(); ++i) {
        uint64_t v = (index >> i) & 1;
        const FreeBit& fb = bits[i];
        switch (fb.kind) {
            case FreeBit::SecretBit:
                in.secret_value |= v << fb.bit;
                break;
            case FreeBit::HeldBit:
                in.held[fb.signal] |= v << fb.bit;
                break;
            case FreeBit::StreamBit:
                in.streams[fb.signal][static_cast<size_t>(fb.cycle)] |= v << fb.bit;
                break;
        }
    }
    // Held publics must not also stream.
    for (const auto& [name, value] : in.held) in.streams.erase(name);
    return in;
}

} // namespace

int count_free_bits(const DataflowGraph& graph, int horizon, const InputPolicy& policy) {
    if (graph.secret.empty()) throw DiagError("secret not labeled");
    return static_cast<int>(free_bit_inventory(graph, horizon, policy).size());
}

double exact_bit_leakage(const DataflowGraph& graph, int bit, int horizon,
                         const InputPolicy& policy, const LeakageBudget& budget) {
    if (graph.secret.empty()) throw DiagError("secret not labeled");
    const Signal& sec = graph.signal_at(graph.secret);
    if (bit < 0 || bit >= sec.width)
        throw DiagError("secret bit index " + std::to_string(bit) + " out of range");

    auto bits = free_bit_inventory(graph, horizon, policy);
    if (static_cast<int>(bits.size()) > budget.max_free_bits)
        throw DiagError("oracle budget exceeded: " + std::to_string(bits.size()) +
                        " free bits > " + std::to_string(budget.max_free_bits));

    uint64_t total = uint64_t(1) << bits.size();
    // trace -> per-bit-value counts
    std::map<std::vector<std::vector<uint64_t>>, std::array<uint64_t, 2>> table;
    for (uint64_t idx = 0; idx < total; ++idx) {
        SimInputs in = decode_inputs(graph, bits, idx, horizon);
        ObservationTrace tr = simulate(graph, in, horizon);
        int b = static_cast<int>((in.secret_value >> bit) & 1);
        table[tr.cycles][static_cast<size_t>(b)]++;
    }

    uint64_t best_sum = 0;
    uint64_t grand = 0;
    for (const auto& [_, counts] : table) {
        best_sum += std::max(counts[0], counts[1]);
        grand += counts[0] + counts[1];
    }
    assert(grand == total);
    double v = static_cast<double>(best_sum) / static_cast<double>(total);
    return 2.0 * v - 1.0;
}

TimingVariability exact_timing_variability(const DataflowGraph& graph,
                                           const std::string& completion, int horizon,
                                           const InputPolicy& policy,
                                           const LeakageBudget& budget) {
    if (graph.secret.empty()) throw DiagError("secret not labeled");
    if (!graph.find_signal(completion))
        throw DiagError("unknown completion signal '" + completion + "'");

    auto bits = free_bit_inventory(graph, horizon, policy);
    if (static_cast<int>(bits.size()) > budget.max_free_bits)
        throw DiagError("oracle budget exceeded: " + std::to_string(bits.size()) +
                        " free bits > " + std::to_string(budget.max_free_bits));

    // Split enumeration into (secret bits) x (environment bits).
    std::vector<FreeBit> secret_bits, env_bits;
    for (const auto& fb : bits)
        (fb.kind == FreeBit::SecretBit ? secret_bits : env_bits).push_back(fb);

    uint64_t env_total = uint64_t(1) << env_bits.size();
    uint64_t sec_total = uint64_t(1) << secret_bits.size();
    bool any_asserted = false;

    TimingVariability out;
    for (uint64_t env = 0; env < env_total; ++env) {
        std::optional<std::pair<uint64_t, int>> first;
        for (uint64_t sec = 0; sec < sec_total; ++sec) {
            // Recombine the two indices into the full inventory order.
            uint64_t idx = 0;
            size_t ei = 0, si = 0;
            for (size_t i = 0; i < bits.size(); ++i) {
                uint64_t v = bits[i].kind == FreeBit::SecretBit ? ((sec >> si++) & 1)
                                                                : ((env >> ei++) & 1);
                idx |= v << i;
            }
            SimInputs in = decode_inputs(graph, bits, idx, horizon);
            std::map<std::string, std::vector<uint64_t>> probe;
            simulate(graph, in, horizon, &probe);
            int assert_cycle = -1;
            const auto& series = probe[completion];
            for (int t = 0; t < static_cast<int>(series.size()); ++t) {
                if (series[static_cast<size_t>(t)] != 0) {
                    assert_cycle = t;
                    break;
                }
            }
            if (assert_cycle >= 0) any_asserted = true;
            if (!first) {
                first = {in.secret_value, assert_cycle};
            } else if (first->second != assert_cycle) {
                out.result = TimingResult::Varies;
                TimingWitness w;
                w.secret_a = first->first;
                w.cycle_a = first->second;
                w.secret_b = in.secret_value;
                w.cycle_b = assert_cycle;
                out.witness = w;
                return out;
            }
        }
    }
    out.result = any_asserted ? TimingResult::Constant : TimingResult::Indeterminate;
    return out;
}

} // namespace rtlleak
