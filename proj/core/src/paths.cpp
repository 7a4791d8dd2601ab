// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/paths.hpp"

#include <algorithm>
#include <sstream>

namespace rtlleak {

namespace {

// Forward bit-level influence of one assignment, split into the structural
// part (source bit -> target bit mask) and the implicit guard part.
struct AssignFlow {
    const Assignment* a = nullptr;
    // per source signal: bit -> mask of target bits it reaches structurally
    std::map<std::string, std::map<int, uint64_t>> forward;
    std::set<std::string> guard_sources;
    uint64_t assigned_mask = 0;
};

uint64_t bits_to_mask(int hi, int lo) {
    uint64_t m = 0;
    for (int b = lo; b <= hi; ++b) m |= uint64_t(1) << b;
    return m;
}

std::vector<AssignFlow> build_flows(const DataflowGraph& g) {
    std::vector<AssignFlow> flows;
    flows.reserve(g.assignments.size());
    for (const auto& a : g.assignments) {
        AssignFlow f;
        f.a = &a;
        f.assigned_mask = bits_to_mask(a.hi, a.lo);
        auto deps = bit_slice_deps(g, a);
        for (const auto& [tbit, sources] : deps) {
            for (const auto& [sig, sbit] : sources)
                f.forward[sig][sbit] |= uint64_t(1) << tbit;
        }
        for (const auto& atom : a.guards) {
            auto sup = support(atom.cond);
            f.guard_sources.insert(sup.begin(), sup.end());
        }
        flows.push_back(std::move(f));
    }
    return flows;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Enumerator {
    const DataflowGraph& g;
    const PathConfig& cfg;
    std::vector<AssignFlow> flows;
    // assignment id -> flows index (ids are dense but be safe)
    std::map<int, size_t> flow_of;
    // reading signal -> flow indices that read it (structurally or via guard)
    std::map<std::string, std::vector<size_t>> readers;

    std::vector<LeakagePath> out;
    std::vector<PathHop> stack;
    std::set<std::pair<int, int>> used; // (assignment, target bit)
    int secret_bit = 0;

    explicit Enumerator(const DataflowGraph& graph, const PathConfig& config)
        : g(graph), cfg(config), flows(build_flows(graph)) {
        for (size_t i = 0; i < flows.size(); ++i) {
            flow_of[flows[i].a->id] = i;
            std::set<std::string> reads;
            for (const auto& [sig, _] : flows[i].forward) reads.insert(sig);
            reads.insert(flows[i].guard_sources.begin(), flows[i].guard_sources.end());
            for (const auto& r : reads) readers[r].push_back(i);
        }
        for (auto& [_, v] : readers)
            std::sort(v.begin(), v.end(),
                      [this](size_t x, size_t y) { return flows[x].a->id < flows[y].a->id; });
    }

    void record_path(const std::string& terminal) {
        LeakagePath p;
        p.secret_bit = secret_bit;
        p.hops = stack;
        p.terminal = terminal;
        std::ostringstream key;
        key << "b" << secret_bit;
        for (const auto& h : stack) {
            key << "|" << h.source << ":" << h.source_bits << ">" << h.assignment << ">"
                << h.target << ":" << h.target_bits << (h.implicit ? "!" : "");
            const Assignment& a = g.assignments[static_cast<size_t>(h.assignment)];
            for (const auto& atom : a.guards) p.guards_on_path.push_back(atom);
        }
        std::ostringstream id;
        id << std::hex << fnv1a(key.str());
        p.id = id.str();
        out.push_back(std::move(p));
        if (out.size() > cfg.max_paths)
            throw DiagError("path explosion: more than " + std::to_string(cfg.max_paths) +
                            " leakage paths (max_paths bound); results unusable");
    }

    void dfs(const std::string& signal, uint64_t bits) {
        if (static_cast<int>(stack.size()) >= cfg.max_path_len) return;
        auto it = readers.find(signal);
        if (it == readers.end()) return;
        for (size_t fi : it->second) {
            const AssignFlow& f = flows[fi];
            const Assignment& a = *f.a;

            uint64_t explicit_bits = 0;
            auto fit = f.forward.find(signal);
            if (fit != f.forward.end()) {
                for (const auto& [sbit, tmask] : fit->second)
                    if (bits & (uint64_t(1) << sbit)) explicit_bits |= tmask;
            }
            bool via_guard = f.guard_sources.count(signal) != 0;
            uint64_t target_bits = explicit_bits | (via_guard ? f.assigned_mask : 0);

            // Trim bits this path already produced through this assignment.
            uint64_t fresh = 0;
            for (int b = 0; b < 64; ++b) {
                if (!(target_bits & (uint64_t(1) << b))) continue;
                if (!used.count({a.id, b})) fresh |= uint64_t(1) << b;
            }
            if (fresh == 0) continue;

            PathHop hop;
            hop.source = signal;
            hop.source_bits = bits;
            hop.assignment = a.id;
            hop.target = a.target;
            hop.target_bits = fresh;
            hop.implicit = explicit_bits == 0;

            std::vector<std::pair<int, int>> added;
            for (int b = 0; b < 64; ++b) {
                if (fresh & (uint64_t(1) << b)) {
                    used.insert({a.id, b});
                    added.emplace_back(a.id, b);
                }
            }
            stack.push_back(hop);

            const Signal& tsig = g.signal_at(a.target);
            if (tsig.is_output) record_path(a.target);
            dfs(a.target, fresh);

            stack.pop_back();
            for (const auto& k : added) used.erase(k);
        }
    }
};

} // namespace

std::vector<LeakagePath> enumerate_paths(const DataflowGraph& graph, const PathConfig& cfg) {
    if (graph.secret.empty()) throw DiagError("enumerate_paths requires a labeled secret");
    Enumerator e(graph, cfg);
    const Signal& sec = graph.signal_at(graph.secret);
    for (int b = 0; b < sec.width; ++b) {
        e.secret_bit = b;
        e.dfs(graph.secret, uint64_t(1) << b);
    }
    std::sort(e.out.begin(), e.out.end(),
              [](const LeakagePath& a, const LeakagePath& b) {
                  if (a.secret_bit != b.secret_bit) return a.secret_bit < b.secret_bit;
                  return a.id < b.id;
              });
    return std::move(e.out);
}

} // namespace rtlleak
