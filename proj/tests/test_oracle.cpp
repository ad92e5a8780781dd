#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace resroute;

namespace {

/// Single ESS bus, no transport: the only integer columns are its d_t flags.
Scenario single_ess(int T) {
    Scenario sc = testutil::ess_toy(T, 1, false);
    // drop the stranded island {4, 5}
    sc.buses.resize(3);
    sc.branches.resize(2);
    sc.loads.resize(1);
    sc.ess_buses.resize(1);
    sc.reference_buses.clear();
    testutil::finish(sc);
    return sc;
}

RestorationPlan solved_plan(const Scenario& sc, CompiledProgram& cp) {
    cp = compile(sc);
    MipResult res = optimize(cp.program);
    REQUIRE(res.incumbent);
    return extract_plan(sc, cp.index, cp.atlas, res.incumbent->x);
}

}  // namespace

TEST_CASE("enumeration counts assignments exactly") {
    SECTION("one ESS bus, T=2, no arcs: 2^2 assignments") {
        Scenario sc = single_ess(2);
        CompiledProgram cp = compile(sc);
        REQUIRE(cp.program.binary_cols.size() == 2);
        REQUIRE(cp.program.integer_cols.empty());
        EnumerationResult res = enumerate_optimal(cp.program);
        CHECK(res.assignments_tried == 4);
        CHECK(res.feasible);
    }
    SECTION("capped trips multiply the domain") {
        Scenario sc = testutil::ess_toy(3, 2);  // 6 binaries, 2 counts in {0,1,2}
        CompiledProgram cp = compile(sc);
        EnumerationResult res = enumerate_optimal(cp.program);
        CHECK(res.assignments_tried == (1 << 6) * 3 * 3);
    }
}

TEST_CASE("enumeration refuses oversized domains with the computed product") {
    ConicProgram pr;
    pr.resize(30);
    for (int c = 0; c < 30; ++c) {
        pr.binary_cols.push_back(c);
        pr.lb[c] = 0.0;
        pr.ub[c] = 1.0;
    }
    CHECK_THROWS_WITH(enumerate_optimal(pr),
                      Catch::Matchers::ContainsSubstring("exceeds"));
}

TEST_CASE("enumeration reports infeasibility when no assignment works") {
    ConicProgram pr;
    pr.resize(2);
    pr.binary_cols = {1};
    pr.lb[1] = 0.0;
    pr.ub[1] = 1.0;
    pr.lb[0] = 3.0;
    pr.ub[0] = 10.0;
    pr.ineq.add({{0, 1.0}, {1, -1.0}}, 0.0);  // x0 <= x1 <= 1 < 3
    EnumerationResult res = enumerate_optimal(pr);
    CHECK_FALSE(res.feasible);
    CHECK(res.assignments_tried == 2);
}

TEST_CASE("parallel enumeration is deterministic") {
    Scenario sc = testutil::ess_toy(3, 2);
    CompiledProgram cp = compile(sc);
    EnumerationResult a = enumerate_optimal(cp.program, {}, 1000000, 1);
    EnumerationResult b = enumerate_optimal(cp.program, {}, 1000000, 4);
    REQUIRE(a.feasible);
    REQUIRE(b.feasible);
    CHECK_THAT(a.objective, Catch::Matchers::WithinAbs(b.objective, 1e-9));
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("converged solve passes every family") {
    Scenario sc = testutil::ess_toy(3, 2);
    CompiledProgram cp;
    RestorationPlan plan = solved_plan(sc, cp);
    FeasibilityReport rep = check_feasibility(sc, plan, 1e-6);
    INFO(rep.to_string());
    CHECK(rep.pass());
}

TEST_CASE("constructed violations land in the right family") {
    Scenario sc = testutil::ess_toy(3, 2);
    CompiledProgram cp;
    RestorationPlan base = solved_plan(sc, cp);
    REQUIRE(check_feasibility(sc, base, 1e-6).pass());
    const double tol = 1e-6;

    SECTION("ramp") {
        RestorationPlan p = base;
        p.generators[0].p[1] = p.generators[0].p[0] + sc.generators[0].ramp_up + 0.1;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["ramp"].violation > tol);
    }
    SECTION("fuel") {
        RestorationPlan p = base;
        p.generators[0].fuel[2] += 0.05;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["fuel"].violation > tol);
        CHECK(rep.families["fuel"].detail.find("recursion") != std::string::npos);
    }
    SECTION("pickup monotonicity") {
        RestorationPlan p = base;
        auto& r = p.pickup.at(2);
        r[0] = 0.9;
        r[1] = 0.4;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["pickup_monotonicity"].violation > tol);
    }
    SECTION("complementarity") {
        RestorationPlan p = base;
        p.ess[0].d[0] = 0.0;
        p.ess[0].p_charge[0] = 0.1;  // charging while the flag says discharge
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["complementarity"].violation > tol);
    }
    SECTION("SoC recursion") {
        RestorationPlan p = base;
        p.ess[0].soc[2] += 0.07;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["soc_evolution"].violation > tol);
    }
    SECTION("bound evolution") {
        RestorationPlan p = base;
        p.ess[0].soc_max[2] += 0.5;  // books no longer move by unit capacity
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["bound_evolution"].violation > tol);
        CHECK(rep.families["conservation"].violation > tol);
    }
    SECTION("travel box") {
        RestorationPlan p = base;
        if (p.schedule.empty())
            p.schedule.push_back({3, 4, 1, 2, 1, 1, 0.0});
        p.schedule[0].soc_shipped =
            p.schedule[0].quantity * sc.mess_types[0].soc_max_unit + 0.2;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["travel_box"].violation > tol);
    }
    SECTION("illegal trip slot") {
        RestorationPlan p = base;
        p.schedule.push_back({4, 3, 3, 4, 1, 1, 0.1});  // departs too late to arrive by T
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["travel_box"].violation > tol);
        CHECK(rep.families["travel_box"].detail.find("illegal") != std::string::npos);
    }
    SECTION("power balance") {
        RestorationPlan p = base;
        p.branches[0].p[0] += 0.05;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["power_balance"].violation > tol);
    }
    SECTION("cone") {
        RestorationPlan p = base;
        p.branches[0].p[0] = 1.0;
        p.branches[0].current_sq[0] = 0.0;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["cone"].violation > tol);
    }
    SECTION("integrality") {
        RestorationPlan p = base;
        p.ess[0].d[0] = 0.4;
        FeasibilityReport rep = check_feasibility(sc, p, tol);
        CHECK(rep.families["integrality"].violation > tol);
    }
}

TEST_CASE("violation details name the bus and time step") {
    Scenario sc = testutil::ess_toy(3, 2);
    CompiledProgram cp;
    RestorationPlan p = solved_plan(sc, cp);
    auto& r = p.pickup.at(2);
    r[0] = 0.9;
    r[1] = 0.4;
    FeasibilityReport rep = check_feasibility(sc, p, 1e-6);
    const auto& f = rep.families["pickup_monotonicity"];
    CHECK(f.detail.find("bus 2") != std::string::npos);
    CHECK(f.detail.find("t=2") != std::string::npos);
}
