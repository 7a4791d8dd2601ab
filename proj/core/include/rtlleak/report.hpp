// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "rtlleak/refine.hpp"
#include "rtlleak/timing_channel.hpp"

namespace rtlleak {

enum class AnalysisMode { Agnostic, Timing, Channels, All };

AnalysisMode parse_mode(const std::string& name);
const char* mode_name(AnalysisMode m);

struct AnalysisConfig {
    std::vector<std::string> files; // .v paths, or (path, text) via run_on_sources
    std::string top;                // empty = first module
    std::string secret;
    AnalysisMode mode = AnalysisMode::All;
    Thresholds thresholds;
    int horizon = 0; // 0 = derive from the FSM
    int max_path_len = 64;
    size_t max_paths = 1000000;
    int max_rounds = 4;
    std::string report_path; // empty = stdout
    std::string format = "text";
    bool emit_timings = false; // include wall-clock in the JSON report
    std::string dump_graph_path;
    std::string dump_fsm_path;
};

struct FsmReport {
    bool found = false;
    std::string reg;
    std::vector<uint64_t> states;
    std::vector<Transition> transitions;
    std::optional<uint64_t> reset_state;
    bool reset_heuristic_used = false;
    bool reset_unidentifiable = false;
    std::vector<uint64_t> unreachable;
};

struct ScenarioReport {
    std::vector<BitLeakage> bits;
    LeakageSummary summary;
    int paths_total = 0;
    int invalid_order = 0;
    int invalid_overwrite = 0;
    // Timing scenario only:
    std::vector<RoundStats> rounds;
    bool fixpoint_reached = true;
    bool no_fsm = false;
};

struct ChannelsReport {
    std::vector<TimingChannelFinding> findings;
    int count = 0;    // non-exempt
    int exempted = 0;
    int horizon = 0;
    bool truncated = false;
};

struct LeakageReport {
    std::string tool_version;
    std::string schema_version;
    AnalysisConfig config;
    std::string source_file; // diagnostics origin for findings
    FsmReport fsm;
    std::optional<ScenarioReport> agnostic;
    std::optional<ScenarioReport> timing;
    std::optional<ChannelsReport> channels;
    std::vector<std::pair<std::string, double>> phase_seconds;
    int exit_code = 0;
};

/// Run the configured pipeline on files read from disk. Exit code 0 = clean,
/// 2 = findings (judged on the most refined scenario computed), analysis
/// errors propagate as DiagError (CLI maps them to exit 1).
LeakageReport run(const AnalysisConfig& config);

/// Same pipeline over in-memory sources (tests, tooling).
LeakageReport run_on_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                             const AnalysisConfig& config);

/// Render the report. JSON is schema-versioned and byte-deterministic
/// (wall-clock phases only appear with config.emit_timings); text mirrors
/// the "N/avg" summary cells, "0/-" when a class is empty.
std::string emit_report(const LeakageReport& report, const std::string& format);

} // namespace rtlleak
