// Command-line front end: solve / compare / validate over scenario JSON files.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "resroute/resroute.hpp"

namespace {

void add_solver_flags(CLI::App* cmd, resroute::RunOptions& opts, long& seed) {
    cmd->add_option("--gap", opts.gap, "relative optimality gap");
    cmd->add_option("--time-limit", opts.time_limit_s, "wall-clock limit in seconds");
    cmd->add_option("--nodes", opts.max_nodes, "branch-and-bound node limit");
    cmd->add_option("--workers", opts.workers, "worker thread count");
    cmd->add_option("--dump-program", opts.dump_program_path,
                    "write the compiled program to this path");
    cmd->add_option("--out", opts.out_dir, "directory for output artifacts");
    cmd->add_option("--seed", seed,
                    "random seed for scenario-generation tooling (never affects the solve)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"load restoration with mobile storage routing"};
    app.require_subcommand(1);

    std::string path;
    resroute::RunOptions opts;
    opts.out_dir = ".";
    long seed = 0;
    bool verbose = false;

    CLI::App* solve = app.add_subcommand("solve", "optimize one scenario");
    solve->add_option("scenario", path, "scenario JSON file")->required();
    solve->add_flag("--static", opts.static_mode, "forbid all trips (every count fixed to 0)");
    solve->add_flag("--verbose", verbose, "print search progress");
    add_solver_flags(solve, opts, seed);

    CLI::App* compare = app.add_subcommand("compare", "routed vs static side by side");
    compare->add_option("scenario", path, "scenario JSON file")->required();
    compare->add_flag("--verbose", verbose, "print search progress");
    add_solver_flags(compare, opts, seed);

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    validate_cmd->add_option("scenario", path, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);
    if (verbose) opts.log = &std::cerr;

    if (validate_cmd->parsed()) {
        try {
            resroute::Scenario sc = resroute::load_scenario(path);
            resroute::ValidationReport vr = resroute::validate(sc);
            if (!vr.pass()) {
                std::cerr << vr.to_string();
                return resroute::kExitInputError;
            }
            std::cout << "ok: " << sc.buses.size() << " buses, " << sc.branches.size()
                      << " branches, " << resroute::islands(sc).size() << " islands, T="
                      << sc.horizon << "\n";
            return resroute::kExitOk;
        } catch (const std::exception& ex) {
            std::cerr << ex.what() << "\n";
            return resroute::kExitInputError;
        }
    }

    if (solve->parsed()) {
        resroute::SolveOutcome out = resroute::run_solve(path, opts);
        if (out.exit_code != resroute::kExitOk)
            std::cerr << out.message << "\n";
        else
            std::cout << "objective " << out.plan.objective_total << "  nodes " << out.mip.nodes
                      << "  gap " << out.mip.gap << "\n";
        return out.exit_code;
    }

    resroute::CompareOutcome cmp = resroute::run_compare(path, opts);
    if (cmp.exit_code != resroute::kExitOk || !cmp.dominance_holds)
        std::cerr << cmp.message << "\n";
    else
        std::cout << "routed " << cmp.routed.plan.objective_total << "  static "
                  << cmp.static_run.plan.objective_total << "\n";
    return cmp.exit_code;
}
