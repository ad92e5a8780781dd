#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "resroute/program.hpp"
#include "resroute/scenario.hpp"
#include "resroute/transport.hpp"

namespace resroute {

struct ScheduleRow {
    Index from = 0, to = 0;
    int depart = 0, arrive = 0, mess_type = 0;
    long quantity = 0;
    double soc_shipped = 0.0;
};

struct GenTrace {
    Index bus = 0;
    std::vector<double> p, q;   // [T]
    std::vector<double> fuel;   // [T+1]
};

struct EssTrace {
    Index bus = 0;
    std::vector<double> p_charge, p_discharge, q, d;        // [T]
    std::vector<double> soc, soc_min, soc_max, phi;         // [T+1]
};

struct BranchTrace {
    Index from = 0, to = 0;
    std::vector<double> current_sq, p, q;  // [T]
};

struct RestorationPlan {
    double objective_total = 0, objective_pickup = 0, objective_generation = 0,
           objective_transport = 0;
    std::map<Index, std::vector<double>> pickup;   // load bus -> r over [T]
    std::vector<GenTrace> generators;
    std::vector<EssTrace> ess;
    std::map<Index, std::vector<double>> voltage;  // bus -> v over [T]
    std::vector<BranchTrace> branches;
    std::vector<ScheduleRow> schedule;

    double restored_mw(const Scenario& sc, int t) const {
        double sum = 0;
        for (const auto& ld : sc.loads) {
            auto it = pickup.find(ld.bus);
            if (it != pickup.end()) sum += it->second[t - 1] * ld.p_forecast[t - 1];
        }
        return sum;
    }
    double generation_mw(int t) const {
        double sum = 0;
        for (const auto& g : generators) sum += g.p[t - 1];
        return sum;
    }
    double total_restored_energy(const Scenario& sc) const {
        double sum = 0;
        for (int t = 1; t <= sc.horizon; ++t) sum += restored_mw(sc, t) * sc.step_hours;
        return sum;
    }
};

/// Rounds the integer columns of a solution and rebuilds the reported plan.
/// SoC bound traces and fuel are recomputed exactly from the rounded schedule
/// so that reported bound changes are exact multiples of unit capacities.
inline RestorationPlan extract_plan(const Scenario& sc, const TransportIndex& index,
                                    const VariableAtlas& atlas, const std::vector<double>& x,
                                    double int_tol = 1e-4) {
    const int T = atlas.T;
    RestorationPlan plan;

    // Integrality check + rounding.
    std::vector<long> kround(index.size());
    for (int s = 0; s < index.size(); ++s) {
        double v = x[atlas.count(s)];
        long r = std::lround(v);
        if (std::abs(v - (double)r) > int_tol)
            throw std::runtime_error("non-integral trip count at column " +
                                     std::to_string(atlas.count(s)) + " (value " +
                                     std::to_string(v) + ")");
        kround[s] = std::max(0L, r);
    }
    std::vector<std::vector<double>> dround(sc.ess_buses.size());
    for (size_t e = 0; e < sc.ess_buses.size(); ++e) {
        dround[e].resize(T);
        for (int t = 1; t <= T; ++t) {
            double v = x[atlas.d((int)e, t)];
            long r = std::lround(v);
            if (std::abs(v - (double)r) > int_tol || (r != 0 && r != 1))
                throw std::runtime_error("non-binary charge state at column " +
                                         std::to_string(atlas.d((int)e, t)) + " (value " +
                                         std::to_string(v) + ")");
            dround[e][t - 1] = (double)r;
        }
    }

    // Schedule rows, in slot order.
    std::vector<double> shipped(index.size(), 0.0);
    for (int s = 0; s < index.size(); ++s) {
        if (kround[s] < 1) continue;
        const TripSlot& slot = index.slot(s);
        const MessType* mt = sc.find_type(slot.mess_type);
        double lo = kround[s] * mt->soc_min_unit, hi = kround[s] * mt->soc_max_unit;
        double soc = std::clamp(x[atlas.ship_soc(s)], lo, hi);
        shipped[s] = soc;
        plan.schedule.push_back(
            {slot.from, slot.to, slot.depart, slot.arrive(), slot.mess_type, kround[s], soc});
    }

    for (size_t ld = 0; ld < sc.loads.size(); ++ld) {
        std::vector<double> r(T);
        for (int t = 1; t <= T; ++t)
            r[t - 1] = std::clamp(x[atlas.r((int)ld, t)], 0.0, 1.0);
        plan.pickup[sc.loads[ld].bus] = std::move(r);
    }

    for (size_t g = 0; g < sc.generators.size(); ++g) {
        const GeneratorSpec& spec = sc.generators[g];
        GenTrace tr;
        tr.bus = spec.bus;
        tr.p.resize(T);
        tr.q.resize(T);
        tr.fuel.resize(T + 1);
        int bi = -1;
        for (size_t b = 0; b < sc.buses.size(); ++b)
            if (sc.buses[b].id == spec.bus) bi = (int)b;
        tr.fuel[0] = spec.fuel_initial;
        for (int t = 1; t <= T; ++t) {
            tr.p[t - 1] = x[atlas.pgen((int)g, t)];
            tr.q[t - 1] = x[atlas.q(bi, t)];
            tr.fuel[t] = tr.fuel[t - 1] - spec.fuel_rate * sc.step_hours * tr.p[t - 1];
        }
        plan.generators.push_back(std::move(tr));
    }

    for (size_t e = 0; e < sc.ess_buses.size(); ++e) {
        const EssBusSpec& spec = sc.ess_buses[e];
        EssTrace tr;
        tr.bus = spec.bus;
        tr.p_charge.resize(T);
        tr.p_discharge.resize(T);
        tr.q.resize(T);
        tr.d = dround[e];
        tr.soc.resize(T + 1);
        tr.soc_min.resize(T + 1);
        tr.soc_max.resize(T + 1);
        tr.phi.assign(T + 1, 0.0);
        int bi = -1;
        for (size_t b = 0; b < sc.buses.size(); ++b)
            if (sc.buses[b].id == spec.bus) bi = (int)b;
        for (int t = 1; t <= T; ++t) {
            tr.p_charge[t - 1] = std::max(0.0, x[atlas.pch((int)e, t)]);
            tr.p_discharge[t - 1] = std::max(0.0, x[atlas.pdis((int)e, t)]);
            tr.q[t - 1] = x[atlas.q(bi, t)];
        }
        // phi from the shipped SoC values of the rounded schedule.
        for (int t = 1; t <= T; ++t) {
            double phi = 0;
            for (int s : index.arrivals_at(spec.bus, t)) phi += shipped[s];
            for (int s : index.departures_at(spec.bus, t)) phi -= shipped[s];
            tr.phi[t - 1] = phi;
        }
        // SoC recursion from the exact initial fill.
        double s1 = spec.stationary_soc_init;
        for (const auto& [tid, socs] : spec.unit_initial_soc)
            for (double v : socs) s1 += v;
        tr.soc[0] = s1;
        for (int t = 1; t <= T; ++t)
            tr.soc[t] = tr.soc[t - 1] + tr.phi[t - 1] +
                        sc.eta_ch * sc.step_hours * tr.p_charge[t - 1] -
                        (sc.step_hours / sc.eta_dis) * tr.p_discharge[t - 1];
        // Bound books from unit counts: credit at arrival step, debit one step
        // after departure.
        double lb1 = spec.stationary_soc_min, ub1 = spec.stationary_soc_max;
        for (const auto& mt : sc.mess_types) {
            int n = spec.unit_count(mt.type_id);
            lb1 += n * mt.soc_min_unit;
            ub1 += n * mt.soc_max_unit;
        }
        tr.soc_min[0] = lb1;
        tr.soc_max[0] = ub1;
        for (int t = 1; t <= T; ++t) {
            double dlb = 0, dub = 0;
            for (int s : index.arrivals_at(spec.bus, t + 1)) {
                const MessType* mt = sc.find_type(index.slot(s).mess_type);
                dlb += kround[s] * mt->soc_min_unit;
                dub += kround[s] * mt->soc_max_unit;
            }
            for (int s : index.departures_at(spec.bus, t)) {
                const MessType* mt = sc.find_type(index.slot(s).mess_type);
                dlb -= kround[s] * mt->soc_min_unit;
                dub -= kround[s] * mt->soc_max_unit;
            }
            tr.soc_min[t] = tr.soc_min[t - 1] + dlb;
            tr.soc_max[t] = tr.soc_max[t - 1] + dub;
        }
        plan.ess.push_back(std::move(tr));
    }

    for (size_t b = 0; b < sc.buses.size(); ++b) {
        std::vector<double> v(T);
        for (int t = 1; t <= T; ++t) v[t - 1] = x[atlas.v((int)b, t)];
        plan.voltage[sc.buses[b].id] = std::move(v);
    }
    for (size_t e = 0; e < sc.branches.size(); ++e) {
        BranchTrace tr;
        tr.from = sc.branches[e].from;
        tr.to = sc.branches[e].to;
        tr.current_sq.resize(T);
        tr.p.resize(T);
        tr.q.resize(T);
        for (int t = 1; t <= T; ++t) {
            tr.current_sq[t - 1] = x[atlas.l((int)e, t)];
            tr.p[t - 1] = x[atlas.flow_p((int)e, t)];
            tr.q[t - 1] = x[atlas.flow_q((int)e, t)];
        }
        plan.branches.push_back(std::move(tr));
    }

    // Objective decomposition, recomputed from the reported traces.
    for (size_t ld = 0; ld < sc.loads.size(); ++ld)
        for (int t = 1; t <= T; ++t)
            plan.objective_pickup +=
                sc.loads[ld].pickup_weight[t - 1] * plan.pickup[sc.loads[ld].bus][t - 1];
    for (size_t g = 0; g < sc.generators.size(); ++g)
        for (int t = 1; t <= T; ++t)
            plan.objective_generation += sc.generators[g].cost[t - 1] * plan.generators[g].p[t - 1];
    for (int s = 0; s < index.size(); ++s)
        plan.objective_transport +=
            kround[s] * sc.transport_unit_cost(index.slot(s).mess_type, index.slot(s).travel);
    plan.objective_total =
        plan.objective_pickup - plan.objective_generation - plan.objective_transport;
    return plan;
}

// ---------------------------------------------------------------------------
// Serialization. Floats use 9 significant digits everywhere for stable diffs.
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt9(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}
}  // namespace detail

inline nlohmann::json plan_to_json(const RestorationPlan& plan) {
    nlohmann::json j;
    j["objective"] = {{"total", plan.objective_total},
                      {"pickup", plan.objective_pickup},
                      {"generation", plan.objective_generation},
                      {"transport", plan.objective_transport}};
    for (const auto& [bus, r] : plan.pickup) j["pickup"][std::to_string(bus)] = r;
    for (const auto& g : plan.generators)
        j["generators"].push_back(
            {{"bus", g.bus}, {"p", g.p}, {"q", g.q}, {"fuel", g.fuel}});
    for (const auto& e : plan.ess)
        j["ess"].push_back({{"bus", e.bus},
                            {"p_charge", e.p_charge},
                            {"p_discharge", e.p_discharge},
                            {"q", e.q},
                            {"d", e.d},
                            {"soc", e.soc},
                            {"soc_min", e.soc_min},
                            {"soc_max", e.soc_max},
                            {"phi", e.phi}});
    for (const auto& [bus, v] : plan.voltage) j["voltage"][std::to_string(bus)] = v;
    for (const auto& b : plan.branches)
        j["branches"].push_back({{"from", b.from},
                                 {"to", b.to},
                                 {"current_sq", b.current_sq},
                                 {"p", b.p},
                                 {"q", b.q}});
    j["schedule"] = nlohmann::json::array();
    for (const auto& row : plan.schedule)
        j["schedule"].push_back({{"from", row.from},
                                 {"to", row.to},
                                 {"depart", row.depart},
                                 {"arrive", row.arrive},
                                 {"type", row.mess_type},
                                 {"quantity", row.quantity},
                                 {"soc_shipped", row.soc_shipped}});
    return j;
}

inline RestorationPlan plan_from_json(const nlohmann::json& j) {
    RestorationPlan plan;
    plan.objective_total = j.at("objective").at("total").get<double>();
    plan.objective_pickup = j.at("objective").at("pickup").get<double>();
    plan.objective_generation = j.at("objective").at("generation").get<double>();
    plan.objective_transport = j.at("objective").at("transport").get<double>();
    if (j.contains("pickup"))
        for (auto it = j.at("pickup").begin(); it != j.at("pickup").end(); ++it)
            plan.pickup[std::stoi(it.key())] = it.value().get<std::vector<double>>();
    for (const auto& gj : j.value("generators", nlohmann::json::array())) {
        GenTrace g;
        g.bus = gj.at("bus").get<Index>();
        g.p = gj.at("p").get<std::vector<double>>();
        g.q = gj.at("q").get<std::vector<double>>();
        g.fuel = gj.at("fuel").get<std::vector<double>>();
        plan.generators.push_back(std::move(g));
    }
    for (const auto& ej : j.value("ess", nlohmann::json::array())) {
        EssTrace e;
        e.bus = ej.at("bus").get<Index>();
        e.p_charge = ej.at("p_charge").get<std::vector<double>>();
        e.p_discharge = ej.at("p_discharge").get<std::vector<double>>();
        e.q = ej.at("q").get<std::vector<double>>();
        e.d = ej.at("d").get<std::vector<double>>();
        e.soc = ej.at("soc").get<std::vector<double>>();
        e.soc_min = ej.at("soc_min").get<std::vector<double>>();
        e.soc_max = ej.at("soc_max").get<std::vector<double>>();
        e.phi = ej.at("phi").get<std::vector<double>>();
        plan.ess.push_back(std::move(e));
    }
    if (j.contains("voltage"))
        for (auto it = j.at("voltage").begin(); it != j.at("voltage").end(); ++it)
            plan.voltage[std::stoi(it.key())] = it.value().get<std::vector<double>>();
    for (const auto& bj : j.value("branches", nlohmann::json::array())) {
        BranchTrace b;
        b.from = bj.at("from").get<Index>();
        b.to = bj.at("to").get<Index>();
        b.current_sq = bj.at("current_sq").get<std::vector<double>>();
        b.p = bj.at("p").get<std::vector<double>>();
        b.q = bj.at("q").get<std::vector<double>>();
        plan.branches.push_back(std::move(b));
    }
    for (const auto& rj : j.value("schedule", nlohmann::json::array())) {
        ScheduleRow row;
        row.from = rj.at("from").get<Index>();
        row.to = rj.at("to").get<Index>();
        row.depart = rj.at("depart").get<int>();
        row.arrive = rj.at("arrive").get<int>();
        row.mess_type = rj.at("type").get<int>();
        row.quantity = rj.at("quantity").get<long>();
        row.soc_shipped = rj.at("soc_shipped").get<double>();
        plan.schedule.push_back(row);
    }
    return plan;
}

/// schedule.csv, column order frozen: from,to,depart,arrive,type,qty
inline void write_schedule_csv(const RestorationPlan& plan, std::ostream& os) {
    os << "from,to,depart,arrive,type,qty\n";
    for (const auto& row : plan.schedule)
        os << row.from << "," << row.to << "," << row.depart << "," << row.arrive << ","
           << row.mess_type << "," << row.quantity << "\n";
}

/// traces.csv: one row per time step; SoC columns run to T+1, power columns
/// are blank on the last row.
inline void write_traces_csv(const Scenario& sc, const RestorationPlan& plan, std::ostream& os) {
    const int T = sc.horizon;
    os << "t,restored_mw,generation_mw";
    for (const auto& e : plan.ess)
        os << ",soc_" << e.bus << ",soc_max_" << e.bus << ",soc_min_" << e.bus;
    os << "\n";
    for (int t = 1; t <= T + 1; ++t) {
        os << t << ",";
        if (t <= T)
            os << detail::fmt9(plan.restored_mw(sc, t)) << "," << detail::fmt9(plan.generation_mw(t));
        else
            os << ",";
        for (const auto& e : plan.ess)
            os << "," << detail::fmt9(e.soc[t - 1]) << "," << detail::fmt9(e.soc_max[t - 1]) << ","
               << detail::fmt9(e.soc_min[t - 1]);
        os << "\n";
    }
}

}  // namespace resroute
