#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "resroute/plan.hpp"
#include "resroute/program.hpp"
#include "resroute/scenario.hpp"
#include "resroute/socp.hpp"

namespace resroute {

// ---------------------------------------------------------------------------
// Standalone feasibility checker. Every constraint family is evaluated
// directly from the Scenario and the reported plan, on a code path separate
// from the constraint builders, so builder bugs cannot certify themselves.
// ---------------------------------------------------------------------------

struct FamilyResult {
    double violation = 0.0;
    std::string detail;
};

struct FeasibilityReport {
    std::map<std::string, FamilyResult> families;
    double tol = 1e-6;

    void note(const std::string& family, double viol, const std::string& detail) {
        auto& f = families[family];
        if (viol > f.violation) {
            f.violation = viol;
            f.detail = detail;
        }
    }
    bool pass() const {
        for (const auto& [name, f] : families)
            if (f.violation > tol) return false;
        return true;
    }
    std::vector<std::string> failing() const {
        std::vector<std::string> out;
        for (const auto& [name, f] : families)
            if (f.violation > tol) out.push_back(name);
        return out;
    }
    std::string to_string() const {
        std::string out;
        for (const auto& [name, f] : families) {
            out += name + ": " + std::to_string(f.violation);
            if (f.violation > tol) out += "  [" + f.detail + "]";
            out += "\n";
        }
        return out;
    }
};

namespace oracle_detail {

inline std::string at(Index bus, int t) {
    return "bus " + std::to_string(bus) + ", t=" + std::to_string(t);
}

}  // namespace oracle_detail

inline FeasibilityReport check_feasibility(const Scenario& sc, const RestorationPlan& plan,
                                           double tol = 1e-6) {
    using oracle_detail::at;
    FeasibilityReport rep;
    rep.tol = tol;
    const int T = sc.horizon;
    const double dt = sc.step_hours;

    // Injection per bus from the plan.
    auto injections = [&](Index bus, int t) -> std::pair<double, double> {
        const Bus* b = sc.find_bus(bus);
        if (b->kind == BusKind::Load) {
            const LoadSpec* ld = sc.find_load(bus);
            double r = plan.pickup.count(bus) ? plan.pickup.at(bus)[t - 1] : 0.0;
            return {-r * ld->p_forecast[t - 1], -r * ld->q_forecast[t - 1]};
        }
        if (b->kind == BusKind::Generator) {
            for (const auto& g : plan.generators)
                if (g.bus == bus) return {g.p[t - 1], g.q[t - 1]};
            return {0.0, 0.0};
        }
        for (const auto& e : plan.ess)
            if (e.bus == bus)
                return {-e.p_charge[t - 1] + e.p_discharge[t - 1], e.q[t - 1]};
        return {0.0, 0.0};
    };

    auto branch_trace = [&](Index from, Index to) -> const BranchTrace* {
        for (const auto& b : plan.branches)
            if (b.from == from && b.to == to) return &b;
        return nullptr;
    };

    // power balance + voltage drop + cone + network boxes
    rep.families["power_balance"];
    rep.families["cone"];
    rep.families["voltage_bounds"];
    rep.families["current_bounds"];
    for (int t = 1; t <= T; ++t) {
        for (const auto& bus : sc.buses) {
            double sum_p = 0, sum_q = 0;
            for (const auto& br : sc.branches) {
                const BranchTrace* tr = branch_trace(br.from, br.to);
                if (!tr) continue;
                if (br.from == bus.id) {
                    sum_p += tr->p[t - 1];
                    sum_q += tr->q[t - 1];
                }
                if (br.to == bus.id) {
                    sum_p -= tr->p[t - 1] - br.resistance * tr->current_sq[t - 1];
                    sum_q -= tr->q[t - 1] - br.reactance * tr->current_sq[t - 1];
                }
            }
            auto [p, q] = injections(bus.id, t);
            rep.note("power_balance", std::abs(sum_p - p), "real balance, " + at(bus.id, t));
            rep.note("power_balance", std::abs(sum_q - q), "reactive balance, " + at(bus.id, t));

            double v = plan.voltage.count(bus.id) ? plan.voltage.at(bus.id)[t - 1] : 1.0;
            if (sc.is_reference(bus.id))
                rep.note("voltage_bounds", std::abs(v - 1.0), "reference " + at(bus.id, t));
            else
                rep.note("voltage_bounds",
                         std::max(sc.v_min - v, v - sc.v_max), at(bus.id, t));
        }
        for (const auto& br : sc.branches) {
            const BranchTrace* tr = branch_trace(br.from, br.to);
            if (!tr) continue;
            double vi = plan.voltage.at(br.from)[t - 1];
            double vj = plan.voltage.at(br.to)[t - 1];
            double z2 = br.resistance * br.resistance + br.reactance * br.reactance;
            double drop = vi - vj - 2 * (br.resistance * tr->p[t - 1] + br.reactance * tr->q[t - 1]) +
                          z2 * tr->current_sq[t - 1];
            std::string where =
                "branch (" + std::to_string(br.from) + "," + std::to_string(br.to) + "), t=" +
                std::to_string(t);
            rep.note("power_balance", std::abs(drop), "voltage drop, " + where);
            double lhs = tr->p[t - 1] * tr->p[t - 1] + tr->q[t - 1] * tr->q[t - 1];
            rep.note("cone", std::max(0.0, lhs - vi * tr->current_sq[t - 1]), where);
            rep.note("current_bounds",
                     std::max(-tr->current_sq[t - 1],
                              tr->current_sq[t - 1] - br.current_sq_max),
                     where);
        }
    }

    // generators: fuel recursion, ramps, limits, reactive box
    rep.families["fuel"];
    rep.families["ramp"];
    rep.families["generation_limits"];
    rep.families["reactive_bounds"];
    for (const auto& g : plan.generators) {
        const GeneratorSpec* spec = sc.find_generator(g.bus);
        if (!spec) continue;
        rep.note("fuel", std::abs(g.fuel[0] - spec->fuel_initial), "initial fuel, bus " +
                                                                       std::to_string(g.bus));
        for (int t = 1; t <= T; ++t) {
            double expect = g.fuel[t - 1] - spec->fuel_rate * dt * g.p[t - 1];
            rep.note("fuel", std::abs(g.fuel[t] - expect), "fuel recursion, " + at(g.bus, t));
        }
        for (int t = 0; t <= T; ++t)
            rep.note("fuel", std::max(0.0, -g.fuel[t]), "fuel nonnegativity, " + at(g.bus, t + 1));
        for (int t = 1; t <= T - 1; ++t) {
            double step = g.p[t] - g.p[t - 1];
            rep.note("ramp", std::max(step - spec->ramp_up, spec->ramp_down - step),
                     at(g.bus, t));
        }
        rep.note("ramp", std::max(0.0, g.p[0] - spec->ramp_up), "first step, bus " +
                                                                    std::to_string(g.bus));
        for (int t = 1; t <= T; ++t) {
            rep.note("generation_limits", std::max(-g.p[t - 1], g.p[t - 1] - spec->p_max),
                     at(g.bus, t));
            rep.note("reactive_bounds",
                     std::max(spec->q_min - g.q[t - 1], g.q[t - 1] - spec->q_max), at(g.bus, t));
        }
    }

    // loads: pickup box + monotonicity
    rep.families["pickup"];
    rep.families["pickup_monotonicity"];
    for (const auto& ld : sc.loads) {
        if (!plan.pickup.count(ld.bus)) continue;
        const auto& r = plan.pickup.at(ld.bus);
        for (int t = 1; t <= T; ++t)
            rep.note("pickup", std::max(-r[t - 1], r[t - 1] - 1.0), at(ld.bus, t));
        for (int t = 1; t <= T - 1; ++t)
            rep.note("pickup_monotonicity", r[t - 1] - r[t],
                     "r decreases, " + at(ld.bus, t + 1));
    }

    // ESS buses: complementarity, SoC evolution, SoC limits, reactive box
    rep.families["complementarity"];
    rep.families["soc_evolution"];
    rep.families["soc_limits"];
    rep.families["integrality"];
    for (const auto& e : plan.ess) {
        const EssBusSpec* spec = sc.find_ess(e.bus);
        if (!spec) continue;
        for (int t = 1; t <= T; ++t) {
            double d = e.d[t - 1];
            rep.note("integrality", std::abs(d - std::lround(d)), "d, " + at(e.bus, t));
            rep.note("complementarity",
                     std::max({-e.p_charge[t - 1], e.p_charge[t - 1] - d * spec->p_ch_max}),
                     "charging, " + at(e.bus, t));
            rep.note("complementarity",
                     std::max({-e.p_discharge[t - 1],
                               e.p_discharge[t - 1] - (1 - d) * spec->p_dis_max}),
                     "discharging, " + at(e.bus, t));
            rep.note("reactive_bounds",
                     std::max(spec->q_min - e.q[t - 1], e.q[t - 1] - spec->q_max), at(e.bus, t));
        }
        // phi from the schedule, independently of the plan's phi column
        std::vector<double> phi(T + 1, 0.0);
        for (const auto& row : plan.schedule) {
            if (row.to == e.bus && row.arrive <= T) phi[row.arrive - 1] += row.soc_shipped;
            if (row.from == e.bus) phi[row.depart - 1] -= row.soc_shipped;
        }
        double s1 = spec->stationary_soc_init;
        for (const auto& [tid, socs] : spec->unit_initial_soc)
            for (double v : socs) s1 += v;
        rep.note("soc_evolution", std::abs(e.soc[0] - s1), "initial SoC, bus " +
                                                               std::to_string(e.bus));
        for (int t = 1; t <= T; ++t) {
            double expect = e.soc[t - 1] + phi[t - 1] + sc.eta_ch * dt * e.p_charge[t - 1] -
                            (dt / sc.eta_dis) * e.p_discharge[t - 1];
            rep.note("soc_evolution", std::abs(e.soc[t] - expect),
                     "SoC recursion, " + at(e.bus, t));
            rep.note("soc_evolution", std::abs(e.phi[t - 1] - phi[t - 1]),
                     "phi mismatch, " + at(e.bus, t));
        }
        for (int t = 1; t <= T + 1; ++t) {
            double held = e.soc[t - 1] + phi[t - 1];
            rep.note("soc_limits",
                     std::max(e.soc_min[t - 1] - held, held - e.soc_max[t - 1]), at(e.bus, t));
        }
    }

    // bound evolution + conservation + travel boxes, all from the schedule
    rep.families["bound_evolution"];
    rep.families["conservation"];
    rep.families["travel_box"];
    double total_lb = 0, total_ub = 0;
    for (const auto& spec : sc.ess_buses) {
        total_lb += spec.stationary_soc_min;
        total_ub += spec.stationary_soc_max;
        for (const auto& mt : sc.mess_types) {
            int n = spec.unit_count(mt.type_id);
            total_lb += n * mt.soc_min_unit;
            total_ub += n * mt.soc_max_unit;
        }
    }
    for (const auto& e : plan.ess) {
        const EssBusSpec* spec = sc.find_ess(e.bus);
        if (!spec) continue;
        double lb = spec->stationary_soc_min, ub = spec->stationary_soc_max;
        for (const auto& mt : sc.mess_types) {
            int n = spec->unit_count(mt.type_id);
            lb += n * mt.soc_min_unit;
            ub += n * mt.soc_max_unit;
        }
        for (int t = 1; t <= T + 1; ++t) {
            rep.note("bound_evolution", std::abs(e.soc_min[t - 1] - lb),
                     "lower book, " + at(e.bus, t));
            rep.note("bound_evolution", std::abs(e.soc_max[t - 1] - ub),
                     "upper book, " + at(e.bus, t));
            // credit arrivals at t+1, debit departures at t
            for (const auto& row : plan.schedule) {
                const MessType* mt = sc.find_type(row.mess_type);
                if (row.to == e.bus && row.arrive == t + 1) {
                    lb += row.quantity * mt->soc_min_unit;
                    ub += row.quantity * mt->soc_max_unit;
                }
                if (row.from == e.bus && row.depart == t) {
                    lb -= row.quantity * mt->soc_min_unit;
                    ub -= row.quantity * mt->soc_max_unit;
                }
            }
        }
    }
    for (int t = 1; t <= T + 1; ++t) {
        double sum_lb = 0, sum_ub = 0;
        for (const auto& e : plan.ess) {
            sum_lb += e.soc_min[t - 1];
            sum_ub += e.soc_max[t - 1];
        }
        for (const auto& row : plan.schedule) {
            if (row.depart < t && t < row.arrive) {
                const MessType* mt = sc.find_type(row.mess_type);
                sum_lb += row.quantity * mt->soc_min_unit;
                sum_ub += row.quantity * mt->soc_max_unit;
            }
        }
        rep.note("conservation", std::abs(sum_lb - total_lb), "lower total, t=" + std::to_string(t));
        rep.note("conservation", std::abs(sum_ub - total_ub), "upper total, t=" + std::to_string(t));
    }
    for (const auto& row : plan.schedule) {
        std::string where = "trip " + std::to_string(row.from) + "->" + std::to_string(row.to) +
                            " depart " + std::to_string(row.depart);
        const MessType* mt = sc.find_type(row.mess_type);
        if (!mt || row.quantity < 1) {
            rep.note("integrality", 1.0, "bad schedule row, " + where);
            continue;
        }
        rep.note("travel_box",
                 std::max(row.quantity * mt->soc_min_unit - row.soc_shipped,
                          row.soc_shipped - row.quantity * mt->soc_max_unit),
                 where);
        // row must match a declared arc with a legal timing
        bool legal = false;
        for (const auto& arc : sc.transport_arcs) {
            if (arc.from != row.from || arc.to != row.to) continue;
            int omega = row.arrive - row.depart;
            bool omega_ok = arc.travel_steps.empty()
                                ? (omega >= 1 && omega <= sc.max_travel)
                                : std::count(arc.travel_steps.begin(), arc.travel_steps.end(),
                                             omega) > 0;
            bool depart_ok = arc.depart_steps.empty()
                                 ? (row.depart >= 1 && row.depart <= sc.horizon - omega)
                                 : std::count(arc.depart_steps.begin(), arc.depart_steps.end(),
                                              row.depart) > 0;
            bool type_ok = arc.types.empty() ||
                           std::count(arc.types.begin(), arc.types.end(), row.mess_type) > 0;
            bool cap_ok = !arc.count_max || row.quantity <= *arc.count_max;
            if (omega_ok && depart_ok && type_ok && cap_ok) legal = true;
        }
        if (!legal) rep.note("travel_box", 1.0, "illegal trip slot, " + where);
    }

    return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of all integral assignments on tiny programs.
// ---------------------------------------------------------------------------

struct EnumerationResult {
    bool feasible = false;
    double objective = -kInf;        // maximize sense
    std::vector<long> assignment;    // values of binary cols then integer cols
    long assignments_tried = 0;
};

/// Solves the continuous relaxation for every integral assignment of the
/// binary and integer columns; brute force by construction. Refuses domains
/// whose product exceeds max_assignments.
inline EnumerationResult enumerate_optimal(const ConicProgram& pr, SolverSettings settings = {},
                                           long max_assignments = 1000000, int threads = 1) {
    std::vector<int> cols = pr.binary_cols;
    cols.insert(cols.end(), pr.integer_cols.begin(), pr.integer_cols.end());
    std::vector<long> lo(cols.size()), hi(cols.size());
    long product = 1;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (!is_finite(pr.lb[cols[i]]) || !is_finite(pr.ub[cols[i]]))
            throw std::runtime_error("enumeration requires finite integer bounds");
        lo[i] = (long)std::ceil(pr.lb[cols[i]] - 1e-9);
        hi[i] = (long)std::floor(pr.ub[cols[i]] + 1e-9);
        product *= std::max(0L, hi[i] - lo[i] + 1);
        if (product > max_assignments)
            throw std::runtime_error("enumeration domain too large: product exceeds " +
                                     std::to_string(max_assignments));
    }

    StandardForm sf = to_standard(pr);
    ConeSolver solver(sf.A, sf.n_eq, sf.n_ineq, sf.soc_dims, settings);

    auto assignment_at = [&](long idx) {
        std::vector<long> a(cols.size());
        for (size_t i = cols.size(); i-- > 0;) {
            long span = hi[i] - lo[i] + 1;
            a[i] = lo[i] + idx % span;
            idx /= span;
        }
        return a;  // index 0 is lexicographically smallest
    };

    auto evaluate = [&](long idx, EnumerationResult& best) {
        std::vector<long> a = assignment_at(idx);
        Eigen::VectorXd b = sf.b;
        for (size_t i = 0; i < cols.size(); ++i) {
            b[sf.bounds.lb_row[cols[i]]] = -(double)a[i];
            b[sf.bounds.ub_row[cols[i]]] = (double)a[i];
        }
        SolveResult res = solver.solve(b, sf.c);
        ++best.assignments_tried;
        if (res.status != SolveStatus::Optimal) return;
        double obj = -res.objective;
        if (!best.feasible || obj > best.objective + 1e-12) {
            best.feasible = true;
            best.objective = obj;
            best.assignment = a;
        }
    };

    if (threads <= 1 || product < 16) {
        EnumerationResult best;
        for (long idx = 0; idx < product; ++idx) evaluate(idx, best);
        return best;
    }
    // parallel over index chunks; reduction keeps the lexicographically
    // smallest argmax (lower chunk wins ties)
    int nt = std::min<long>(threads, product);
    std::vector<EnumerationResult> partial(nt);
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
        pool.emplace_back([&, w] {
            for (long idx = w; idx < product; idx += nt) evaluate(idx, partial[w]);
        });
    for (auto& t : pool) t.join();
    EnumerationResult best;
    for (const auto& p : partial) {
        best.assignments_tried += p.assignments_tried;
        if (!p.feasible) continue;
        bool better = !best.feasible || p.objective > best.objective + 1e-12 ||
                      (std::abs(p.objective - best.objective) <= 1e-12 &&
                       p.assignment < best.assignment);
        if (better) {
            bool keep_count = true;
            long n = best.assignments_tried;
            best = p;
            if (keep_count) best.assignments_tried = n;
        }
    }
    return best;
}

}  // namespace resroute
