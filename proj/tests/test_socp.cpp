#include <array>
#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "projection_oracle.hpp"

using namespace resroute;
using testutil::dist4;
using testutil::in_rotated_cone;
using testutil::numeric_project;

namespace {

ConicProgram one_var_lp() {
    ConicProgram pr;
    pr.resize(1);
    pr.objective[0] = 1.0;  // maximize x
    pr.lb[0] = 0.0;
    pr.ub[0] = 3.0;
    return pr;
}

}  // namespace

TEST_CASE("rotated-cone projection matches the numeric oracle on 1000 points") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        double u = uni(rng), v = uni(rng), w1 = uni(rng), w2 = uni(rng);
        auto fast = project_rotated_cone(u, v, w1, w2);
        auto slow = numeric_project(u, v, w1, w2);
        CHECK(in_rotated_cone(fast));
        worst = std::max(worst, dist4(fast, slow));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("projection is idempotent to 1e-12") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        auto p = project_rotated_cone(uni(rng), uni(rng), uni(rng), uni(rng));
        auto q = project_rotated_cone(p[0], p[1], p[2], p[3]);
        CHECK(dist4(p, q) <= 1e-12);
    }
}

TEST_CASE("projection optimality against random cone points") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        std::array<double, 4> x{uni(rng), uni(rng), uni(rng), uni(rng)};
        auto p = project_rotated_cone(x[0], x[1], x[2], x[3]);
        for (int j = 0; j < 20; ++j) {
            double u = pos(rng), v = pos(rng);
            double cap = std::sqrt(2.0 * u * v);
            double ang = uni(rng);
            double rho = std::min(cap, pos(rng));
            std::array<double, 4> y{u, v, rho * std::cos(ang), rho * std::sin(ang)};
            REQUIRE(in_rotated_cone(y));
            CHECK(dist4(x, p) <= dist4(x, y) + 1e-12);
        }
    }
}

TEST_CASE("projection fixed points and polar case") {
    auto inside = project_rotated_cone(1.0, 1.0, 0.5, 0.5);
    CHECK_THAT(inside[0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(inside[2], Catch::Matchers::WithinAbs(0.5, 1e-15));
    auto polar = project_rotated_cone(-1.0, -1.0, 0.0, 0.0);
    for (double c : polar) CHECK_THAT(c, Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("one-dimensional linear program") {
    SolveResult res = solve_relaxation(one_var_lp());
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK_THAT(res.x[0], Catch::Matchers::WithinAbs(3.0, 1e-5));
    CHECK_THAT(res.objective, Catch::Matchers::WithinAbs(3.0, 1e-5));
}

TEST_CASE("infeasible cone program is certified") {
    // v = l = 1 fixed, cone forces |P| <= 1, but P >= 3 demanded.
    ConicProgram pr;
    pr.resize(4);
    pr.lb[0] = pr.ub[0] = 1.0;
    pr.lb[1] = pr.ub[1] = 1.0;
    pr.lb[2] = 3.0;
    pr.ub[2] = 10.0;
    pr.lb[3] = pr.ub[3] = 0.0;
    pr.cones.push_back({0, 1, 2, 3});
    SolveResult res = solve_relaxation(pr);
    CHECK(res.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded program is certified") {
    ConicProgram pr;
    pr.resize(1);
    pr.objective[0] = 1.0;  // maximize x, no upper bound
    pr.lb[0] = 0.0;
    SolveResult res = solve_relaxation(pr);
    CHECK(res.status == SolveStatus::Unbounded);
}

TEST_CASE("two-bus relaxation restores the full load") {
    Scenario sc = testutil::two_bus(1);
    CompiledProgram cp = compile(sc);
    SolveResult res = solve_relaxation(cp.program);
    REQUIRE(res.status == SolveStatus::Optimal);
    // pickup pays 1.0, generating 0.2 MW costs 0.16: full pickup is optimal
    CHECK_THAT(res.x[cp.atlas.r(0, 1)], Catch::Matchers::WithinAbs(1.0, 1e-4));
    // objective = 1 - 0.8*(0.2 + losses); losses are tiny on r = x = 0.01
    CHECK(res.objective > 0.83);
    CHECK(res.objective < 0.8401);
    CHECK(res.res_primal <= 1e-6);
    CHECK(res.res_dual <= 1e-6);
    CHECK(res.res_gap <= 1e-6);
    CHECK(res.cone_tightness >= 0.0);
    CHECK(res.cone_tightness <= 1.0);
}

TEST_CASE("equilibration leaves the solution unchanged on a conditioned toy") {
    Scenario sc = testutil::two_bus(2);
    CompiledProgram cp = compile(sc);
    SolverSettings on, off;
    off.scaling = false;
    SolveResult a = solve_relaxation(cp.program, on);
    SolveResult b = solve_relaxation(cp.program, off);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK_THAT(a.objective, Catch::Matchers::WithinAbs(b.objective, 1e-4));
    for (int t = 1; t <= 2; ++t)
        CHECK_THAT(a.x[cp.atlas.r(0, t)],
                   Catch::Matchers::WithinAbs(b.x[cp.atlas.r(0, t)], 1e-3));
}

TEST_CASE("solver is deterministic") {
    Scenario sc = testutil::ess_toy();
    CompiledProgram cp = compile(sc);
    SolveResult a = solve_relaxation(cp.program);
    SolveResult b = solve_relaxation(cp.program);
    REQUIRE(a.status == b.status);
    CHECK(a.iterations == b.iterations);
    for (size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
}
