#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "resroute/formulation.hpp"
#include "resroute/mip.hpp"
#include "resroute/oracle.hpp"
#include "resroute/plan.hpp"
#include "resroute/scenario.hpp"

namespace resroute {

// Exit codes shared by the drivers and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverLimit = 1;
inline constexpr int kExitInputError = 2;

struct RunOptions {
    bool static_mode = false;       // forbid all trips (every count fixed to 0)
    double gap = 1e-4;
    double time_limit_s = 300.0;
    long max_nodes = 10000;
    int workers = 1;
    std::string dump_program_path;  // empty: no dump
    std::string out_dir;            // empty: no artifact files
    std::ostream* log = nullptr;
};

struct SolveOutcome {
    int exit_code = kExitOk;
    std::string message;
    Scenario scenario;
    RestorationPlan plan;
    bool has_plan = false;
    MipResult mip;
    double runtime_s = 0.0;
};

inline nlohmann::json summary_json(const SolveOutcome& out) {
    nlohmann::json j;
    j["status"] = out.exit_code == kExitOk          ? "ok"
                  : out.exit_code == kExitSolverLimit ? "solver-limit"
                                                      : "input-error";
    j["message"] = out.message;
    j["nodes"] = out.mip.nodes;
    j["gap"] = out.mip.gap;
    j["best_bound"] = out.mip.best_bound;
    j["runtime_s"] = out.runtime_s;
    if (out.has_plan) {
        j["objective"] = {{"total", out.plan.objective_total},
                          {"pickup", out.plan.objective_pickup},
                          {"generation", out.plan.objective_generation},
                          {"transport", out.plan.objective_transport}};
        j["incumbent_source"] = out.mip.incumbent ? out.mip.incumbent->source : "";
    }
    return j;
}

inline void write_artifacts(const SolveOutcome& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream os(fs::path(dir) / "summary.json");
        os << summary_json(out).dump(2) << "\n";
    }
    if (!out.has_plan) return;
    {
        std::ofstream os(fs::path(dir) / "plan.json");
        os << plan_to_json(out.plan).dump(2) << "\n";
    }
    {
        std::ofstream os(fs::path(dir) / "schedule.csv");
        write_schedule_csv(out.plan, os);
    }
    {
        std::ofstream os(fs::path(dir) / "traces.csv");
        write_traces_csv(out.scenario, out.plan, os);
    }
}

/// Loads, compiles, and optimizes one scenario; writes plan.json,
/// schedule.csv, traces.csv, and summary.json when out_dir is set.
inline SolveOutcome run_solve(const std::string& scenario_path, const RunOptions& opts = {}) {
    SolveOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
        out.scenario = load_scenario(scenario_path);
        ValidationReport vr = validate(out.scenario);
        if (!vr.pass()) {
            out.exit_code = kExitInputError;
            out.message = vr.to_string();
            if (!opts.out_dir.empty()) write_artifacts(out, opts.out_dir);
            return out;
        }
    } catch (const std::exception& ex) {
        out.exit_code = kExitInputError;
        out.message = ex.what();
        if (!opts.out_dir.empty()) write_artifacts(out, opts.out_dir);
        return out;
    }

    CompiledProgram cp = compile(out.scenario);
    if (opts.static_mode)
        for (int c : cp.program.integer_cols) cp.program.ub[c] = 0.0;
    if (!opts.dump_program_path.empty()) {
        std::ofstream os(opts.dump_program_path);
        dump_program(cp.program, os);
    }

    MipSettings ms;
    ms.gap = opts.gap;
    ms.time_limit_s = opts.time_limit_s;
    ms.max_nodes = opts.max_nodes;
    ms.workers = opts.workers;
    ms.log = opts.log;
    out.mip = optimize(cp.program, ms);
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (out.mip.incumbent) {
        out.plan = extract_plan(out.scenario, cp.index, cp.atlas, out.mip.incumbent->x);
        out.has_plan = true;
        out.exit_code = out.mip.hit_limit ? kExitSolverLimit : kExitOk;
        out.message = out.mip.hit_limit ? "stopped at node/time limit with an incumbent" : "ok";
    } else {
        out.exit_code = kExitSolverLimit;
        out.message = out.mip.root_infeasible ? "root relaxation infeasible"
                                              : "no incumbent within limits";
    }
    if (!opts.out_dir.empty()) write_artifacts(out, opts.out_dir);
    return out;
}

struct CompareOutcome {
    int exit_code = kExitOk;
    std::string message;
    SolveOutcome routed;
    SolveOutcome static_run;
    bool dominance_holds = false;  // routed objective >= static objective - 1e-6
};

inline nlohmann::json compare_json(const Scenario& sc, const CompareOutcome& cmp) {
    nlohmann::json j;
    j["routed_objective"] = cmp.routed.plan.objective_total;
    j["static_objective"] = cmp.static_run.plan.objective_total;
    j["dominance_holds"] = cmp.dominance_holds;
    nlohmann::json steps = nlohmann::json::array();
    for (int t = 1; t <= sc.horizon; ++t)
        steps.push_back({{"t", t},
                         {"restored_routed_mw", cmp.routed.plan.restored_mw(sc, t)},
                         {"restored_static_mw", cmp.static_run.plan.restored_mw(sc, t)},
                         {"generation_routed_mw", cmp.routed.plan.generation_mw(t)},
                         {"generation_static_mw", cmp.static_run.plan.generation_mw(t)}});
    j["steps"] = std::move(steps);
    nlohmann::json buses = nlohmann::json::array();
    for (size_t e = 0; e < cmp.routed.plan.ess.size(); ++e) {
        const auto& r = cmp.routed.plan.ess[e];
        const auto& s = cmp.static_run.plan.ess[e];
        buses.push_back({{"bus", r.bus},
                         {"soc_routed", r.soc},
                         {"soc_min_routed", r.soc_min},
                         {"soc_max_routed", r.soc_max},
                         {"soc_static", s.soc},
                         {"soc_min_static", s.soc_min},
                         {"soc_max_static", s.soc_max}});
    }
    j["ess"] = std::move(buses);
    return j;
}

inline void write_compare_csv(const Scenario& sc, const CompareOutcome& cmp, std::ostream& os) {
    os << "t,restored_routed_mw,restored_static_mw,generation_routed_mw,generation_static_mw\n";
    for (int t = 1; t <= sc.horizon; ++t)
        os << t << "," << detail::fmt9(cmp.routed.plan.restored_mw(sc, t)) << ","
           << detail::fmt9(cmp.static_run.plan.restored_mw(sc, t)) << ","
           << detail::fmt9(cmp.routed.plan.generation_mw(t)) << ","
           << detail::fmt9(cmp.static_run.plan.generation_mw(t)) << "\n";
}

/// Solves the scenario with routing allowed and with routing forbidden, under
/// identical initial fuel, SoC, and demand, and reports the two side by side.
inline CompareOutcome run_compare(const std::string& scenario_path, const RunOptions& opts = {}) {
    CompareOutcome cmp;
    RunOptions routed_opts = opts;
    RunOptions static_opts = opts;
    routed_opts.static_mode = false;
    static_opts.static_mode = true;
    if (!opts.out_dir.empty()) {
        routed_opts.out_dir = (std::filesystem::path(opts.out_dir) / "routed").string();
        static_opts.out_dir = (std::filesystem::path(opts.out_dir) / "static").string();
    }
    static_opts.dump_program_path.clear();

    cmp.routed = run_solve(scenario_path, routed_opts);
    if (cmp.routed.exit_code == kExitInputError || !cmp.routed.has_plan) {
        cmp.exit_code = cmp.routed.exit_code;
        cmp.message = "routed solve failed: " + cmp.routed.message;
        return cmp;
    }
    cmp.static_run = run_solve(scenario_path, static_opts);
    if (cmp.static_run.exit_code == kExitInputError || !cmp.static_run.has_plan) {
        cmp.exit_code = cmp.static_run.exit_code;
        cmp.message = "static solve failed: " + cmp.static_run.message;
        return cmp;
    }

    cmp.dominance_holds =
        cmp.routed.plan.objective_total >= cmp.static_run.plan.objective_total - 1e-6;
    cmp.exit_code = std::max(cmp.routed.exit_code, cmp.static_run.exit_code);
    cmp.message = cmp.dominance_holds ? "ok" : "routed objective fell below static objective";

    if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        std::ofstream js(std::filesystem::path(opts.out_dir) / "compare.json");
        js << compare_json(cmp.routed.scenario, cmp).dump(2) << "\n";
        std::ofstream cs(std::filesystem::path(opts.out_dir) / "compare.csv");
        write_compare_csv(cmp.routed.scenario, cmp, cs);
    }
    return cmp;
}

}  // namespace resroute
