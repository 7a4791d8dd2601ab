// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: three analysis scenarios (time-agnostic
// quantification, timing-refined quantification, timing-channel detection)
// plus a hidden `oracle` subcommand for exhaustive ground-truth runs on
// small designs.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rtlleak/elaborate.hpp"
#include "rtlleak/parser.hpp"
#include "rtlleak/report.hpp"
#include "rtlleak/sim.hpp"
#include "rtlleak/version.hpp"

using namespace rtlleak;

namespace {

int run_analysis(AnalysisConfig& cfg, const std::string& mode_str) {
    cfg.mode = parse_mode(mode_str);
    LeakageReport report = run(cfg);
    std::string rendered = emit_report(report, cfg.format);
    if (cfg.report_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(cfg.report_path, std::ios::binary);
        if (!out) throw DiagError("cannot write report to '" + cfg.report_path + "'");
        out << rendered;
    }
    return report.exit_code;
}

struct OracleOptions {
    std::vector<std::string> files;
    std::string top;
    std::string secret;
    int bit = -1;
    int horizon = 8;
    int budget = 20;
    std::vector<std::string> held;
    std::string completion;
};

int run_oracle(const OracleOptions& opt) {
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& path : opt.files) {
        std::ifstream in(path);
        if (!in) throw DiagError("cannot read input file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        sources.emplace_back(path, buf.str());
    }
    SourceUnit unit = parse_unit(sources, opt.top);
    DataflowGraph graph = label_secret(build_graph(elaborate(unit)), opt.secret);

    InputPolicy policy;
    for (const auto& h : opt.held) policy.held.insert(h);
    LeakageBudget budget{opt.budget};

    if (!opt.completion.empty()) {
        auto tv = exact_timing_variability(graph, opt.completion, opt.horizon, policy, budget);
        switch (tv.result) {
            case TimingResult::Varies:
                std::cout << "timing: varies (secret " << tv.witness->secret_a << " asserts@"
                          << tv.witness->cycle_a << ", secret " << tv.witness->secret_b
                          << " asserts@" << tv.witness->cycle_b << ")\n";
                return 2;
            case TimingResult::Constant:
                std::cout << "timing: constant\n";
                return 0;
            case TimingResult::Indeterminate:
                std::cout << "timing: indeterminate (completion never asserts)\n";
                return 1;
        }
    }

    int width = graph.secret_width();
    int lo = opt.bit >= 0 ? opt.bit : 0;
    int hi = opt.bit >= 0 ? opt.bit : width - 1;
    for (int b = lo; b <= hi; ++b) {
        double leak = exact_bit_leakage(graph, b, opt.horizon, policy, budget);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", leak);
        std::cout << "bit " << b << ": " << buf << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rtlleak — timing-sensitive information-leakage analysis for RTL designs"};
    app.set_version_flag("--version", std::string("rtlleak ") + kVersion);
    app.set_config("--config")->description("key=value file; command-line flags win");

    AnalysisConfig cfg;
    std::string mode_str = "all";
    app.add_option("files", cfg.files, "Verilog source files (supported subset)")
        ->check(CLI::ExistingFile);
    app.add_option("--top", cfg.top, "top module (default: first parsed)");
    app.add_option("--secret", cfg.secret, "signal carrying the secret");
    app.add_option("--mode", mode_str, "agnostic | timing | channels | all")
        ->default_val("all");
    app.add_option("--detect-threshold", cfg.thresholds.detect,
                   "leakage at or above this is detected")
        ->default_val(0.02026);
    app.add_option("--warn-threshold", cfg.thresholds.warn,
                   "leakage at or above this (below detect) is warned")
        ->default_val(0.001);
    app.add_option("--horizon", cfg.horizon, "timing-channel cycle horizon (0 = auto)");
    app.add_option("--max-rounds", cfg.max_rounds, "refinement fixpoint bound")->default_val(4);
    app.add_option("--max-path-len", cfg.max_path_len, "path exploration depth bound")
        ->default_val(64);
    app.add_option("--report", cfg.report_path, "write the report here instead of stdout");
    app.add_option("--format", cfg.format, "text | json")->default_val("text");
    app.add_flag("--emit-timings", cfg.emit_timings,
                 "include wall-clock phase times in the JSON report (breaks byte determinism)");
    app.add_option("--dump-graph", cfg.dump_graph_path, "write the dataflow graph dump here");
    app.add_option("--dump-fsm", cfg.dump_fsm_path, "write the extracted FSM as DOT here");

    OracleOptions oracle;
    CLI::App* osub = app.add_subcommand("oracle", "exhaustive ground-truth simulation");
    osub->group(""); // hidden: corpus development aid
    osub->add_option("files", oracle.files, "Verilog source files")->check(CLI::ExistingFile);
    osub->add_option("--top", oracle.top, "top module");
    osub->add_option("--secret", oracle.secret, "secret signal")->required();
    osub->add_option("--bit", oracle.bit, "single bit (default: all)");
    osub->add_option("--horizon", oracle.horizon, "cycles to simulate")->default_val(8);
    osub->add_option("--budget", oracle.budget, "max enumerable free bits")->default_val(20);
    osub->add_option("--held", oracle.held, "public input sampled once and held");
    osub->add_option("--completion", oracle.completion,
                     "check timing variability of this completion signal");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*osub) return run_oracle(oracle);
        if (cfg.files.empty()) throw DiagError("no input files");
        if (cfg.secret.empty()) throw DiagError("--secret is required");
        return run_analysis(cfg, mode_str);
    } catch (const DiagError& e) {
        std::cerr << e.formatted() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
