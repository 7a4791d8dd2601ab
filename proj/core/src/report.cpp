// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rtlleak/elaborate.hpp"
#include "rtlleak/parser.hpp"
#include "rtlleak/version.hpp"

#include <json.hpp>

namespace rtlleak {

using ordered_json = nlohmann::ordered_json;

AnalysisMode parse_mode(const std::string& name) {
    if (name == "agnostic") return AnalysisMode::Agnostic;
    if (name == "timing") return AnalysisMode::Timing;
    if (name == "channels") return AnalysisMode::Channels;
    if (name == "all") return AnalysisMode::All;
    throw DiagError("unknown mode '" + name + "' (expected agnostic|timing|channels|all)");
}

const char* mode_name(AnalysisMode m) {
    switch (m) {
        case AnalysisMode::Agnostic: return "agnostic";
        case AnalysisMode::Timing: return "timing";
        case AnalysisMode::Channels: return "channels";
        case AnalysisMode::All: return "all";
    }
    return "?";
}

namespace {

struct PhaseClock {
    std::vector<std::pair<std::string, double>>& out;
    std::string name;
    std::chrono::steady_clock::time_point start;
    PhaseClock(std::vector<std::pair<std::string, double>>& sink, std::string phase)
        : out(sink), name(std::move(phase)), start(std::chrono::steady_clock::now()) {}
    ~PhaseClock() {
        auto end = std::chrono::steady_clock::now();
        out.emplace_back(name, std::chrono::duration<double>(end - start).count());
    }
};

std::string format_avg_cell(const ClassSummary& c) {
    if (c.count == 0) return "0/-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d/%.6g", c.count, c.avg);
    return buf;
}

ScenarioReport make_agnostic_scenario(const DataflowGraph& graph, const AnalysisConfig& cfg) {
    ScenarioReport sc;
    PathConfig pc;
    pc.max_path_len = cfg.max_path_len;
    pc.max_paths = cfg.max_paths;
    auto paths = enumerate_paths(graph, pc);
    sc.paths_total = static_cast<int>(paths.size());
    sc.bits = quantify_all(graph, paths);
    sc.summary = classify(sc.bits, cfg.thresholds);
    return sc;
}

ScenarioReport make_timing_scenario(const DataflowGraph& graph, const AnalysisConfig& cfg) {
    ScenarioReport sc;
    RefineConfig rc;
    rc.paths.max_path_len = cfg.max_path_len;
    rc.paths.max_paths = cfg.max_paths;
    rc.max_rounds = cfg.max_rounds;
    RefinementResult res = refine_and_rerun(graph, rc);
    sc.paths_total = static_cast<int>(res.paths.size());
    for (const auto& v : res.verdicts) {
        if (v.verdict == Verdict::InvalidOrder) sc.invalid_order++;
        if (v.verdict == Verdict::InvalidOverwrite) sc.invalid_overwrite++;
    }
    sc.bits = std::move(res.bits);
    sc.summary = classify(sc.bits, cfg.thresholds);
    sc.rounds = std::move(res.rounds);
    sc.fixpoint_reached = res.fixpoint_reached;
    sc.no_fsm = res.no_fsm;
    return sc;
}

ordered_json scenario_to_json(const ScenarioReport& sc, bool timing) {
    ordered_json j;
    ordered_json bits = ordered_json::array();
    for (const auto& b : sc.bits) {
        ordered_json jb;
        jb["bit"] = b.secret_bit;
        jb["value"] = b.value;
        jb["classification"] = b.classification == LeakClass::Detected ? "detected"
                               : b.classification == LeakClass::Warned ? "warned"
                                                                       : "negligible";
        jb["witness_path"] = b.witness_path;
        bits.push_back(std::move(jb));
    }
    j["bits"] = std::move(bits);
    j["summary"]["detected"]["count"] = sc.summary.detected.count;
    if (sc.summary.detected.count > 0) j["summary"]["detected"]["avg"] = sc.summary.detected.avg;
    else j["summary"]["detected"]["avg"] = nullptr;
    j["summary"]["warned"]["count"] = sc.summary.warned.count;
    if (sc.summary.warned.count > 0) j["summary"]["warned"]["avg"] = sc.summary.warned.avg;
    else j["summary"]["warned"]["avg"] = nullptr;
    j["summary"]["detected_cell"] = format_avg_cell(sc.summary.detected);
    j["summary"]["warned_cell"] = format_avg_cell(sc.summary.warned);
    j["paths_total"] = sc.paths_total;
    if (timing) {
        j["invalid_order"] = sc.invalid_order;
        j["invalid_overwrite"] = sc.invalid_overwrite;
        j["fixpoint_reached"] = sc.fixpoint_reached;
        j["no_fsm"] = sc.no_fsm;
        ordered_json rounds = ordered_json::array();
        for (const auto& r : sc.rounds) {
            ordered_json jr;
            jr["round"] = r.round;
            jr["paths"] = r.paths_enumerated;
            jr["invalid_order"] = r.invalid_order;
            jr["invalid_overwrite"] = r.invalid_overwrite;
            ordered_json loops = ordered_json::array();
            for (const auto& l : r.loops) {
                ordered_json jl;
                jl["signals"] = l.signals;
                jl["iterations"] = l.iterations;
                loops.push_back(std::move(jl));
            }
            jr["loops"] = std::move(loops);
            jr["signals_introduced"] = r.signals_introduced;
            rounds.push_back(std::move(jr));
        }
        j["rounds"] = std::move(rounds);
    }
    return j;
}

void scenario_to_text(std::ostringstream& os, const std::string& title, const ScenarioReport& sc,
                      bool timing) {
    os << title << ": detected " << format_avg_cell(sc.summary.detected) << "  warned "
       << format_avg_cell(sc.summary.warned) << "  paths " << sc.paths_total;
    if (timing) {
        os << "  invalid " << sc.invalid_order + sc.invalid_overwrite << " (order "
           << sc.invalid_order << ", overwrite " << sc.invalid_overwrite << ")";
        if (sc.no_fsm) os << "  [no FSM: equals the time-agnostic result]";
        if (!sc.fixpoint_reached) os << "  [PARTIAL: refinement round bound hit]";
    }
    os << "\n";
    for (const auto& b : sc.bits) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", b.value);
        os << "  bit " << b.secret_bit << ": " << buf << " ["
           << (b.classification == LeakClass::Detected ? "detected"
               : b.classification == LeakClass::Warned ? "warned"
                                                       : "negligible")
           << "]";
        if (!b.witness_path.empty()) os << " witness " << b.witness_path;
        os << "\n";
    }
    if (timing) {
        for (const auto& r : sc.rounds) {
            os << "  round " << r.round << ": paths " << r.paths_enumerated << ", invalid order "
               << r.invalid_order << ", invalid overwrite " << r.invalid_overwrite;
            for (const auto& l : r.loops) {
                os << ", loop {";
                for (size_t i = 0; i < l.signals.size(); ++i) {
                    if (i) os << ", ";
                    os << l.signals[i];
                }
                os << "} x" << l.iterations;
            }
            os << "\n";
        }
    }
}

} // namespace

LeakageReport run_on_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                             const AnalysisConfig& config) {
    config.thresholds.validate();
    LeakageReport report;
    report.tool_version = kVersion;
    report.schema_version = kReportSchemaVersion;
    report.config = config;
    report.source_file = sources.empty() ? "" : sources.front().first;

    DataflowGraph graph;
    {
        PhaseClock clock(report.phase_seconds, "frontend");
        SourceUnit unit = parse_unit(sources, config.top);
        ModuleDecl flat = elaborate(unit);
        graph = build_graph(flat);
        if (config.secret.empty()) throw DiagError("no secret signal configured");
        graph = label_secret(graph, config.secret);
    }

    if (!config.dump_graph_path.empty()) {
        std::ofstream out(config.dump_graph_path);
        if (!out) throw DiagError("cannot write graph dump to '" + config.dump_graph_path + "'");
        out << dump_graph(graph);
    }

    // FSM summary (top-scored register) for the report and the channel scan.
    std::optional<Fsm> fsm;
    {
        PhaseClock clock(report.phase_seconds, "fsm-extract");
        auto regs = find_state_registers(graph);
        if (!regs.empty()) {
            fsm = extract_fsm(graph, regs.front());
            report.fsm.found = true;
            report.fsm.reg = fsm->reg.signal;
            report.fsm.states.assign(fsm->states.begin(), fsm->states.end());
            report.fsm.transitions = fsm->transitions;
            report.fsm.reset_state = fsm->reset_state;
            report.fsm.reset_heuristic_used = fsm->reset_heuristic_used;
            report.fsm.reset_unidentifiable = fsm->reset_unidentifiable;
            StateGraph sg = state_graph(*fsm);
            report.fsm.unreachable = sg.unreachable;
        }
    }
    if (!config.dump_fsm_path.empty() && fsm) {
        std::ofstream out(config.dump_fsm_path);
        if (!out) throw DiagError("cannot write FSM dump to '" + config.dump_fsm_path + "'");
        out << fsm_to_dot(*fsm);
    }

    bool want_agnostic =
        config.mode == AnalysisMode::Agnostic || config.mode == AnalysisMode::All;
    bool want_timing = config.mode == AnalysisMode::Timing || config.mode == AnalysisMode::All;
    bool want_channels =
        config.mode == AnalysisMode::Channels || config.mode == AnalysisMode::All;

    if (want_agnostic) {
        PhaseClock clock(report.phase_seconds, "scenario1-agnostic");
        report.agnostic = make_agnostic_scenario(graph, config);
    }
    if (want_timing) {
        PhaseClock clock(report.phase_seconds, "scenario2-timing");
        report.timing = make_timing_scenario(graph, config);
    }
    if (want_channels) {
        PhaseClock clock(report.phase_seconds, "scenario3-channels");
        ChannelsReport ch;
        int horizon = config.horizon > 0 ? config.horizon
                                         : default_horizon(fsm ? &*fsm : nullptr);
        auto deps = build_dependency_list(graph, fsm ? &*fsm : nullptr, horizon);
        ch.findings = detect_timing_channels(graph, fsm ? &*fsm : nullptr, deps);
        ch.count = non_exempt_count(ch.findings);
        ch.exempted = static_cast<int>(ch.findings.size()) - ch.count;
        ch.horizon = horizon;
        ch.truncated = deps.truncated;
        report.channels = std::move(ch);
    }

    // Exit code: judged on the most refined dataflow scenario computed plus
    // the timing-channel count.
    int detected = 0;
    if (report.timing) detected = report.timing->summary.detected.count;
    else if (report.agnostic) detected = report.agnostic->summary.detected.count;
    int channels = report.channels ? report.channels->count : 0;
    report.exit_code = (detected > 0 || channels > 0) ? 2 : 0;
    return report;
}

LeakageReport run(const AnalysisConfig& config) {
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& path : config.files) {
        std::ifstream in(path);
        if (!in) throw DiagError("cannot read input file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        sources.emplace_back(path, buf.str());
    }
    if (sources.empty()) throw DiagError("no input files");
    return run_on_sources(sources, config);
}

std::string emit_report(const LeakageReport& report, const std::string& format) {
    if (format == "json") {
        ordered_json j;
        j["schema_version"] = report.schema_version;
        j["tool"]["name"] = "rtlleak";
        j["tool"]["version"] = report.tool_version;
        ordered_json cfg;
        cfg["top"] = report.config.top;
        cfg["secret"] = report.config.secret;
        cfg["mode"] = mode_name(report.config.mode);
        cfg["detect_threshold"] = report.config.thresholds.detect;
        cfg["warn_threshold"] = report.config.thresholds.warn;
        cfg["horizon"] = report.config.horizon;
        cfg["max_path_len"] = report.config.max_path_len;
        cfg["max_rounds"] = report.config.max_rounds;
        cfg["files"] = report.config.files;
        j["config"] = std::move(cfg);

        ordered_json fsm;
        fsm["found"] = report.fsm.found;
        if (report.fsm.found) {
            fsm["register"] = report.fsm.reg;
            fsm["states"] = report.fsm.states;
            ordered_json ts = ordered_json::array();
            for (const auto& t : report.fsm.transitions) {
                ordered_json jt;
                jt["from"] = t.from;
                jt["to"] = t.to;
                jt["guard"] = t.guard_str;
                if (t.synthetic_hold) jt["hold"] = true;
                ts.push_back(std::move(jt));
            }
            fsm["transitions"] = std::move(ts);
            if (report.fsm.reset_state) fsm["reset_state"] = *report.fsm.reset_state;
            else fsm["reset_state"] = nullptr;
            fsm["reset_heuristic_used"] = report.fsm.reset_heuristic_used;
            fsm["reset_unidentifiable"] = report.fsm.reset_unidentifiable;
            fsm["unreachable_states"] = report.fsm.unreachable;
        }
        j["fsm"] = std::move(fsm);

        ordered_json scenarios;
        if (report.agnostic) scenarios["agnostic"] = scenario_to_json(*report.agnostic, false);
        if (report.timing) scenarios["timing"] = scenario_to_json(*report.timing, true);
        if (report.channels) {
            ordered_json ch;
            ch["count"] = report.channels->count;
            ch["exempted"] = report.channels->exempted;
            ch["horizon"] = report.channels->horizon;
            ch["truncated"] = report.channels->truncated;
            ordered_json fs = ordered_json::array();
            for (const auto& f : report.channels->findings) {
                ordered_json jf;
                jf["file"] = report.source_file;
                jf["line"] = f.location.line;
                jf["col"] = f.location.col;
                jf["condition_signal"] = f.condition_signal;
                jf["condition_tainted_cycle"] = f.condition_tainted_cycle;
                jf["assignment_target"] = f.assignment_target;
                jf["assignment_states"] = f.assignment_states;
                jf["earliest_fire_cycle"] = f.earliest_fire_cycle;
                jf["exempted"] = f.exempted;
                if (f.exempted) jf["exempt_reason"] = f.exempt_reason;
                fs.push_back(std::move(jf));
            }
            ch["findings"] = std::move(fs);
            scenarios["channels"] = std::move(ch);
        }
        j["scenarios"] = std::move(scenarios);

        if (report.config.emit_timings) {
            ordered_json t;
            for (const auto& [name, secs] : report.phase_seconds) t[name] = secs;
            j["timings"] = std::move(t);
        }
        j["exit_code"] = report.exit_code;
        return j.dump(2) + "\n";
    }

    if (format != "text") throw DiagError("unknown report format '" + format + "'");

    std::ostringstream os;
    os << "rtlleak " << report.tool_version << " — mode " << mode_name(report.config.mode)
       << ", top '" << report.config.top << "', secret '" << report.config.secret << "'\n";
    if (report.fsm.found) {
        os << "fsm: register '" << report.fsm.reg << "', " << report.fsm.states.size()
           << " states, " << report.fsm.transitions.size() << " transitions, reset ";
        if (report.fsm.reset_state) {
            os << *report.fsm.reset_state;
            if (report.fsm.reset_heuristic_used) os << " (name-heuristic reset)";
        } else {
            os << "unidentifiable (all states initial)";
        }
        if (!report.fsm.unreachable.empty()) {
            os << ", unreachable {";
            for (size_t i = 0; i < report.fsm.unreachable.size(); ++i) {
                if (i) os << ", ";
                os << report.fsm.unreachable[i];
            }
            os << "}";
        }
        os << "\n";
    } else {
        os << "fsm: none extractable\n";
    }
    if (report.agnostic)
        scenario_to_text(os, "scenario 1 (time-agnostic)", *report.agnostic, false);
    if (report.timing)
        scenario_to_text(os, "scenario 2 (timing-refined)", *report.timing, true);
    if (report.channels) {
        os << "scenario 3 (timing channels): " << report.channels->count << " finding"
           << (report.channels->count == 1 ? "" : "s");
        if (report.channels->exempted > 0) os << " (+" << report.channels->exempted << " exempted)";
        os << ", horizon " << report.channels->horizon
           << (report.channels->truncated ? " [truncated]" : "") << "\n";
        for (const auto& f : report.channels->findings) {
            os << "  " << report.source_file << ":" << f.location.line << ":" << f.location.col
               << ": condition '" << f.condition_signal << "' tainted@"
               << f.condition_tainted_cycle << " gates '" << f.assignment_target
               << "' (fires earliest cycle " << f.earliest_fire_cycle << ")";
            if (f.exempted) os << " [exempted: " << f.exempt_reason << "]";
            os << "\n";
        }
    }
    os << "timings:";
    for (const auto& [name, secs] : report.phase_seconds) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %s=%.3fs", name.c_str(), secs);
        os << buf;
    }
    os << "\nexit: " << report.exit_code << "\n";
    return os.str();
}

} // namespace rtlleak
