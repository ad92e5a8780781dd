#pragma once

// Shared scenario builders for the test suites.

#include <random>
#include <string>

#include "resroute/resroute.hpp"

namespace testutil {

using namespace resroute;

inline std::string data_path(const std::string& name) {
    return std::string(RESROUTE_DATA_DIR) + "/" + name;
}

inline void finish(Scenario& sc) {
    for (auto& g : sc.generators)
        if (g.cost.empty()) g.cost.assign(sc.horizon, sc.costs.generation_default);
    for (auto& l : sc.loads)
        if (l.pickup_weight.empty()) l.pickup_weight.assign(sc.horizon, sc.costs.pickup_default);
    assign_islands(sc);
}

/// Smallest network: generator bus 1 feeding load bus 2 over one branch.
inline Scenario two_bus(int T = 1) {
    Scenario sc;
    sc.horizon = T;
    sc.buses = {{1, BusKind::Generator}, {2, BusKind::Load}};
    sc.branches = {{1, 2, 0.01, 0.01}};
    GeneratorSpec g;
    g.bus = 1;
    g.p_max = 1.0;
    g.ramp_up = 1.0;
    g.ramp_down = -1.0;
    g.fuel_initial = 10.0;
    g.q_min = -0.5;
    g.q_max = 0.5;
    sc.generators = {g};
    LoadSpec l;
    l.bus = 2;
    l.p_forecast.assign(T, 0.2);
    l.q_forecast.assign(T, 0.1);
    sc.loads = {l};
    finish(sc);
    return sc;
}

/// Two islands: {generator 1 - load 2 - ESS 3} and {ESS 4 - load 5}; the
/// second island has no generation, so restoring load 5 requires shipping
/// stored energy over the single arc (3,4). Integer footprint stays tiny.
inline Scenario ess_toy(int T = 3, long k_cap = 2, bool with_arc = true) {
    Scenario sc;
    sc.horizon = T;
    sc.max_travel = 1;
    sc.eta_ch = 0.9;
    sc.eta_dis = 0.9;
    sc.buses = {{1, BusKind::Generator},
                {2, BusKind::Load},
                {3, BusKind::Ess},
                {4, BusKind::Ess},
                {5, BusKind::Load}};
    sc.branches = {{1, 2, 0.01, 0.01}, {2, 3, 0.01, 0.01}, {4, 5, 0.01, 0.01}};
    GeneratorSpec g;
    g.bus = 1;
    g.p_max = 0.25;
    g.ramp_up = 0.25;
    g.ramp_down = -0.25;
    g.fuel_initial = 5.0;
    g.q_min = -0.3;
    g.q_max = 0.3;
    g.cost.assign(T, 0.1);
    sc.generators = {g};
    LoadSpec l;
    l.bus = 2;
    l.p_forecast.assign(T, 0.2);
    l.q_forecast.assign(T, 0.1);
    LoadSpec l5;
    l5.bus = 5;
    l5.p_forecast.assign(T, 0.3);
    l5.q_forecast.assign(T, 0.15);
    sc.loads = {l, l5};
    sc.mess_types = {{1, 0.025, 0.25}};
    EssBusSpec e3;
    e3.bus = 3;
    e3.unit_initial_soc[1] = {0.15, 0.15};
    e3.p_ch_max = 0.3;
    e3.p_dis_max = 0.3;
    e3.q_min = -0.3;
    e3.q_max = 0.3;
    EssBusSpec e4 = e3;
    e4.bus = 4;
    e4.unit_initial_soc[1] = {};
    sc.ess_buses = {e3, e4};
    if (with_arc) {
        TransportArcSpec a;
        a.from = 3;
        a.to = 4;
        a.count_max = k_cap;
        sc.transport_arcs = {a};
    }
    finish(sc);
    return sc;
}

/// Randomized tiny instance for enumeration-vs-search checks; the integer
/// footprint stays at 6 binaries (2 ESS buses x T=3) and 2 capped counts.
inline Scenario tiny_random(unsigned seed) {
    std::mt19937 rng(seed);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    Scenario sc = ess_toy(3, 1 + (int)(rng() % 3));
    // a single departure step keeps exhaustive enumeration fast on one core
    sc.transport_arcs[0].depart_steps = {1};
    sc.loads[0].p_forecast.assign(3, uni(0.2, 0.6));
    sc.loads[0].q_forecast.assign(3, 0.5 * sc.loads[0].p_forecast[0]);
    sc.generators[0].p_max = uni(0.1, 0.3);
    sc.generators[0].ramp_up = sc.generators[0].p_max;
    sc.generators[0].ramp_down = -sc.generators[0].p_max;
    sc.generators[0].cost.assign(3, uni(0.05, 0.3));
    double s0 = uni(0.1, 0.2);
    sc.ess_buses[0].unit_initial_soc[1] = {s0, s0};
    sc.ess_buses[0].p_dis_max = uni(0.1, 0.4);
    sc.ess_buses[1].p_dis_max = sc.ess_buses[0].p_dis_max;
    sc.costs.transport_rule.fraction = uni(0.02, 0.3);
    sc.loads[0].pickup_weight.assign(3, uni(0.5, 2.0));
    return sc;
}

}  // namespace testutil
