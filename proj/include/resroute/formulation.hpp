#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "resroute/program.hpp"
#include "resroute/scenario.hpp"
#include "resroute/transport.hpp"

namespace resroute {

/// Compiles a validated Scenario plus its TransportIndex into a ConicProgram.
/// Builder methods append rows in a fixed order so that identical scenarios
/// produce identical programs.
class Compiler {
  public:
    Compiler(const Scenario& sc, const TransportIndex& index) : sc_(sc), index_(index) {
        if (sc_.branches.size() + islands(sc_).size() != sc_.buses.size())
            throw std::runtime_error("network is not a forest");
        make_atlas();
        program_.resize(atlas_.num_vars);
        for (size_t i = 0; i < sc_.buses.size(); ++i) bus_idx_[sc_.buses[i].id] = (int)i;
        for (size_t i = 0; i < sc_.generators.size(); ++i) gen_idx_[sc_.generators[i].bus] = (int)i;
        for (size_t i = 0; i < sc_.loads.size(); ++i) load_idx_[sc_.loads[i].bus] = (int)i;
        for (size_t i = 0; i < sc_.ess_buses.size(); ++i) ess_idx_[sc_.ess_buses[i].bus] = (int)i;
    }

    const VariableAtlas& atlas() const { return atlas_; }
    const ConicProgram& program() const { return program_; }

    ConicProgram compile() {
        build_objective();
        build_power_flow();
        build_voltage_current_bounds();
        build_generator();
        build_reactive_bounds();
        build_load_pickup();
        build_mess_power();
        build_soc_evolution();
        build_bound_evolution();
        build_bound_conservation();
        build_travel_soc();
        build_integrality();
        program_.meta["eq_rows"] = program_.eq.size();
        program_.meta["ineq_rows"] = program_.ineq.size();
        return program_;
    }

    void build_objective() {
        const int T = atlas_.T;
        for (size_t ld = 0; ld < sc_.loads.size(); ++ld)
            for (int t = 1; t <= T; ++t)
                program_.objective[atlas_.r((int)ld, t)] = sc_.loads[ld].pickup_weight[t - 1];
        for (size_t g = 0; g < sc_.generators.size(); ++g)
            for (int t = 1; t <= T; ++t)
                program_.objective[atlas_.pgen((int)g, t)] = -sc_.generators[g].cost[t - 1];
        for (int s = 0; s < index_.size(); ++s) {
            const TripSlot& slot = index_.slot(s);
            program_.objective[atlas_.count(s)] =
                -sc_.transport_unit_cost(slot.mess_type, slot.travel);
        }
    }

    void build_power_flow() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size();
        for (int t = 1; t <= T; ++t) {
            for (size_t j = 0; j < sc_.buses.size(); ++j) {
                std::vector<std::pair<int, double>> prow, qrow;
                for (size_t e = 0; e < sc_.branches.size(); ++e) {
                    const Branch& br = sc_.branches[e];
                    if (bus_idx_.at(br.from) == (int)j) {
                        prow.push_back({atlas_.flow_p((int)e, t), 1.0});
                        qrow.push_back({atlas_.flow_q((int)e, t), 1.0});
                    }
                    if (bus_idx_.at(br.to) == (int)j) {
                        prow.push_back({atlas_.flow_p((int)e, t), -1.0});
                        prow.push_back({atlas_.l((int)e, t), br.resistance});
                        qrow.push_back({atlas_.flow_q((int)e, t), -1.0});
                        qrow.push_back({atlas_.l((int)e, t), br.reactance});
                    }
                }
                prow.push_back({atlas_.p((int)j, t), -1.0});
                qrow.push_back({atlas_.q((int)j, t), -1.0});
                program_.eq.add(std::move(prow), 0.0);
                program_.eq.add(std::move(qrow), 0.0);
            }
            for (size_t e = 0; e < sc_.branches.size(); ++e) {
                const Branch& br = sc_.branches[e];
                int i = bus_idx_.at(br.from), j = bus_idx_.at(br.to);
                double z2 = br.resistance * br.resistance + br.reactance * br.reactance;
                program_.eq.add({{atlas_.v(i, t), 1.0},
                                 {atlas_.v(j, t), -1.0},
                                 {atlas_.flow_p((int)e, t), -2.0 * br.resistance},
                                 {atlas_.flow_q((int)e, t), -2.0 * br.reactance},
                                 {atlas_.l((int)e, t), z2}},
                                0.0);
                program_.cones.push_back({atlas_.v(i, t), atlas_.l((int)e, t),
                                          atlas_.flow_p((int)e, t), atlas_.flow_q((int)e, t)});
            }
        }
        program_.meta["power_flow_eq"] = program_.eq.size() - eq0;
        program_.meta["cones"] = (int)program_.cones.size();
    }

    void build_voltage_current_bounds() {
        const int T = atlas_.T;
        for (size_t j = 0; j < sc_.buses.size(); ++j) {
            bool ref = sc_.is_reference(sc_.buses[j].id);
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.v((int)j, t)] = ref ? 1.0 : sc_.v_min;
                program_.ub[atlas_.v((int)j, t)] = ref ? 1.0 : sc_.v_max;
            }
        }
        for (size_t e = 0; e < sc_.branches.size(); ++e)
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.l((int)e, t)] = 0.0;
                if (is_finite(sc_.branches[e].current_sq_max))
                    program_.ub[atlas_.l((int)e, t)] = sc_.branches[e].current_sq_max;
            }
    }

    void build_generator() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size(), in0 = program_.ineq.size();
        for (size_t g = 0; g < sc_.generators.size(); ++g) {
            const GeneratorSpec& gen = sc_.generators[g];
            int gi = (int)g;
            program_.eq.add({{atlas_.fuel(gi, 1), 1.0}}, gen.fuel_initial);
            for (int t = 1; t <= T; ++t)
                program_.eq.add({{atlas_.fuel(gi, t + 1), 1.0},
                                 {atlas_.fuel(gi, t), -1.0},
                                 {atlas_.pgen(gi, t), gen.fuel_rate * sc_.step_hours}},
                                0.0);
            for (int t = 1; t <= T + 1; ++t) program_.lb[atlas_.fuel(gi, t)] = 0.0;
            for (int t = 1; t <= T - 1; ++t) {
                program_.ineq.add({{atlas_.pgen(gi, t + 1), 1.0}, {atlas_.pgen(gi, t), -1.0}},
                                  gen.ramp_up);
                program_.ineq.add({{atlas_.pgen(gi, t), 1.0}, {atlas_.pgen(gi, t + 1), -1.0}},
                                  -gen.ramp_down);
            }
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.pgen(gi, t)] = 0.0;
                program_.ub[atlas_.pgen(gi, t)] = gen.p_max;
            }
            // Cold start: the undated ramp bound applies to the first step.
            program_.ub[atlas_.pgen(gi, 1)] = std::min(gen.p_max, gen.ramp_up);
            int bi = bus_idx_.at(gen.bus);
            for (int t = 1; t <= T; ++t)
                program_.eq.add({{atlas_.p(bi, t), 1.0}, {atlas_.pgen(gi, t), -1.0}}, 0.0);
        }
        program_.meta["generator_eq"] = program_.eq.size() - eq0;
        program_.meta["generator_ineq"] = program_.ineq.size() - in0;
    }

    void build_reactive_bounds() {
        const int T = atlas_.T;
        for (const auto& gen : sc_.generators) {
            int bi = bus_idx_.at(gen.bus);
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.q(bi, t)] = gen.q_min;
                program_.ub[atlas_.q(bi, t)] = gen.q_max;
            }
        }
        for (const auto& ess : sc_.ess_buses) {
            int bi = bus_idx_.at(ess.bus);
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.q(bi, t)] = ess.q_min;
                program_.ub[atlas_.q(bi, t)] = ess.q_max;
            }
        }
    }

    void build_load_pickup() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size(), in0 = program_.ineq.size();
        for (size_t ld = 0; ld < sc_.loads.size(); ++ld) {
            const LoadSpec& load = sc_.loads[ld];
            int li = (int)ld, bi = bus_idx_.at(load.bus);
            for (int t = 1; t <= T; ++t) {
                // Consumption-negative convention: p_j = -r_j * p_hat.
                program_.eq.add({{atlas_.p(bi, t), 1.0}, {atlas_.r(li, t), load.p_forecast[t - 1]}},
                                0.0);
                program_.eq.add({{atlas_.q(bi, t), 1.0}, {atlas_.r(li, t), load.q_forecast[t - 1]}},
                                0.0);
                program_.lb[atlas_.r(li, t)] = 0.0;
                program_.ub[atlas_.r(li, t)] = 1.0;
            }
            for (int t = 1; t <= T - 1; ++t)
                program_.ineq.add({{atlas_.r(li, t), 1.0}, {atlas_.r(li, t + 1), -1.0}}, 0.0);
        }
        program_.meta["load_eq"] = program_.eq.size() - eq0;
        program_.meta["load_ineq"] = program_.ineq.size() - in0;
    }

    void build_mess_power() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size(), in0 = program_.ineq.size();
        for (size_t e = 0; e < sc_.ess_buses.size(); ++e) {
            const EssBusSpec& ess = sc_.ess_buses[e];
            int ei = (int)e, bi = bus_idx_.at(ess.bus);
            for (int t = 1; t <= T; ++t) {
                program_.lb[atlas_.pch(ei, t)] = 0.0;
                program_.lb[atlas_.pdis(ei, t)] = 0.0;
                program_.ineq.add({{atlas_.pch(ei, t), 1.0}, {atlas_.d(ei, t), -ess.p_ch_max}},
                                  0.0);
                program_.ineq.add({{atlas_.pdis(ei, t), 1.0}, {atlas_.d(ei, t), ess.p_dis_max}},
                                  ess.p_dis_max);
                program_.eq.add({{atlas_.p(bi, t), 1.0},
                                 {atlas_.pch(ei, t), 1.0},
                                 {atlas_.pdis(ei, t), -1.0}},
                                0.0);
            }
        }
        program_.meta["mess_power_eq"] = program_.eq.size() - eq0;
        program_.meta["mess_power_ineq"] = program_.ineq.size() - in0;
    }

    void build_soc_evolution() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size(), in0 = program_.ineq.size();
        for (size_t e = 0; e < sc_.ess_buses.size(); ++e) {
            const EssBusSpec& ess = sc_.ess_buses[e];
            int ei = (int)e;
            double s1 = ess.stationary_soc_init;
            for (const auto& [tid, socs] : ess.unit_initial_soc)
                for (double v : socs) s1 += v;
            program_.eq.add({{atlas_.s(ei, 1), 1.0}}, s1);
            for (int t = 1; t <= T; ++t)
                program_.eq.add({{atlas_.s(ei, t + 1), 1.0},
                                 {atlas_.s(ei, t), -1.0},
                                 {atlas_.phi(ei, t), -1.0},
                                 {atlas_.pch(ei, t), -sc_.eta_ch * sc_.step_hours},
                                 {atlas_.pdis(ei, t), sc_.step_hours / sc_.eta_dis}},
                                0.0);
            for (int t = 1; t <= T; ++t) {
                std::vector<std::pair<int, double>> row{{atlas_.phi(ei, t), 1.0}};
                for (int slot : index_.arrivals_at(ess.bus, t))
                    row.push_back({atlas_.ship_soc(slot), -1.0});
                for (int slot : index_.departures_at(ess.bus, t))
                    row.push_back({atlas_.ship_soc(slot), 1.0});
                program_.eq.add(std::move(row), 0.0);
            }
            program_.eq.add({{atlas_.phi(ei, T + 1), 1.0}}, 0.0);
            for (int t = 1; t <= T + 1; ++t) {
                program_.ineq.add({{atlas_.s_lb(ei, t), 1.0},
                                   {atlas_.s(ei, t), -1.0},
                                   {atlas_.phi(ei, t), -1.0}},
                                  0.0);
                program_.ineq.add({{atlas_.s(ei, t), 1.0},
                                   {atlas_.phi(ei, t), 1.0},
                                   {atlas_.s_ub(ei, t), -1.0}},
                                  0.0);
            }
        }
        program_.meta["soc_eq"] = program_.eq.size() - eq0;
        program_.meta["soc_ineq"] = program_.ineq.size() - in0;
    }

    void build_bound_evolution() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size();
        for (size_t e = 0; e < sc_.ess_buses.size(); ++e) {
            const EssBusSpec& ess = sc_.ess_buses[e];
            int ei = (int)e;
            double lb1 = ess.stationary_soc_min, ub1 = ess.stationary_soc_max;
            for (const auto& mt : sc_.mess_types) {
                int n = ess.unit_count(mt.type_id);
                lb1 += n * mt.soc_min_unit;
                ub1 += n * mt.soc_max_unit;
            }
            program_.eq.add({{atlas_.s_lb(ei, 1), 1.0}}, lb1);
            program_.eq.add({{atlas_.s_ub(ei, 1), 1.0}}, ub1);
            // Capacity credited at the arrival step, debited one step after
            // departure; at t = T both sums are empty and the boundary row
            // s(T+1) = s(T) emerges from the same recursion.
            for (int t = 1; t <= T; ++t) {
                std::vector<std::pair<int, double>> lrow{{atlas_.s_lb(ei, t + 1), 1.0},
                                                         {atlas_.s_lb(ei, t), -1.0}};
                std::vector<std::pair<int, double>> urow{{atlas_.s_ub(ei, t + 1), 1.0},
                                                         {atlas_.s_ub(ei, t), -1.0}};
                for (int slot : index_.arrivals_at(ess.bus, t + 1)) {
                    lrow.push_back({atlas_.ship_lb(slot), -1.0});
                    urow.push_back({atlas_.ship_ub(slot), -1.0});
                }
                for (int slot : index_.departures_at(ess.bus, t)) {
                    lrow.push_back({atlas_.ship_lb(slot), 1.0});
                    urow.push_back({atlas_.ship_ub(slot), 1.0});
                }
                program_.eq.add(std::move(lrow), 0.0);
                program_.eq.add(std::move(urow), 0.0);
            }
        }
        program_.meta["bound_eq"] = program_.eq.size() - eq0;
    }

    void build_bound_conservation() {
        const int T = atlas_.T;
        int eq0 = program_.eq.size();
        double total_lb = 0.0, total_ub = 0.0;
        for (const auto& ess : sc_.ess_buses) {
            total_lb += ess.stationary_soc_min;
            total_ub += ess.stationary_soc_max;
            for (const auto& mt : sc_.mess_types) {
                int n = ess.unit_count(mt.type_id);
                total_lb += n * mt.soc_min_unit;
                total_ub += n * mt.soc_max_unit;
            }
        }
        for (int t = 1; t <= T + 1; ++t) {
            std::vector<std::pair<int, double>> lrow, urow;
            for (size_t e = 0; e < sc_.ess_buses.size(); ++e) {
                lrow.push_back({atlas_.s_lb((int)e, t), 1.0});
                urow.push_back({atlas_.s_ub((int)e, t), 1.0});
            }
            for (int slot : index_.in_transit_at(t)) {
                lrow.push_back({atlas_.ship_lb(slot), 1.0});
                urow.push_back({atlas_.ship_ub(slot), 1.0});
            }
            program_.eq.add(std::move(lrow), total_lb);
            program_.eq.add(std::move(urow), total_ub);
        }
        program_.meta["conservation_eq"] = program_.eq.size() - eq0;
    }

    void build_travel_soc() {
        int eq0 = program_.eq.size(), in0 = program_.ineq.size();
        for (int s = 0; s < index_.size(); ++s) {
            const TripSlot& slot = index_.slot(s);
            const MessType* mt = sc_.find_type(slot.mess_type);
            program_.eq.add({{atlas_.ship_lb(s), 1.0}, {atlas_.count(s), -mt->soc_min_unit}},
                            0.0);
            program_.eq.add({{atlas_.ship_ub(s), 1.0}, {atlas_.count(s), -mt->soc_max_unit}},
                            0.0);
            program_.ineq.add({{atlas_.ship_lb(s), 1.0}, {atlas_.ship_soc(s), -1.0}}, 0.0);
            program_.ineq.add({{atlas_.ship_soc(s), 1.0}, {atlas_.ship_ub(s), -1.0}}, 0.0);
            program_.lb[atlas_.count(s)] = 0.0;
            long cap = slot.count_max ? *slot.count_max : sc_.total_units(slot.mess_type);
            program_.ub[atlas_.count(s)] = (double)cap;
        }
        program_.meta["travel_eq"] = program_.eq.size() - eq0;
        program_.meta["travel_ineq"] = program_.ineq.size() - in0;
    }

    void build_integrality() {
        const int T = atlas_.T;
        for (size_t e = 0; e < sc_.ess_buses.size(); ++e)
            for (int t = 1; t <= T; ++t) {
                int c = atlas_.d((int)e, t);
                program_.binary_cols.push_back(c);
                program_.lb[c] = 0.0;
                program_.ub[c] = 1.0;
            }
        for (int s = 0; s < index_.size(); ++s)
            program_.integer_cols.push_back(atlas_.count(s));
        program_.meta["binary_cols"] = (int)program_.binary_cols.size();
        program_.meta["integer_cols"] = (int)program_.integer_cols.size();
    }

  private:
    void make_atlas() {
        const int T = sc_.horizon;
        atlas_.T = T;
        atlas_.num_buses = (int)sc_.buses.size();
        atlas_.num_branches = (int)sc_.branches.size();
        atlas_.num_gens = (int)sc_.generators.size();
        atlas_.num_loads = (int)sc_.loads.size();
        atlas_.num_ess = (int)sc_.ess_buses.size();
        atlas_.num_slots = index_.size();
        int off = 0;
        auto take = [&off](int n) { int o = off; off += n; return o; };
        atlas_.off_v = take(atlas_.num_buses * T);
        atlas_.off_p = take(atlas_.num_buses * T);
        atlas_.off_q = take(atlas_.num_buses * T);
        atlas_.off_l = take(atlas_.num_branches * T);
        atlas_.off_flow_p = take(atlas_.num_branches * T);
        atlas_.off_flow_q = take(atlas_.num_branches * T);
        atlas_.off_pgen = take(atlas_.num_gens * T);
        atlas_.off_fuel = take(atlas_.num_gens * (T + 1));
        atlas_.off_r = take(atlas_.num_loads * T);
        atlas_.off_pch = take(atlas_.num_ess * T);
        atlas_.off_pdis = take(atlas_.num_ess * T);
        atlas_.off_d = take(atlas_.num_ess * T);
        atlas_.off_s = take(atlas_.num_ess * (T + 1));
        atlas_.off_s_ub = take(atlas_.num_ess * (T + 1));
        atlas_.off_s_lb = take(atlas_.num_ess * (T + 1));
        atlas_.off_phi = take(atlas_.num_ess * (T + 1));
        atlas_.off_ship_soc = take(atlas_.num_slots);
        atlas_.off_ship_ub = take(atlas_.num_slots);
        atlas_.off_ship_lb = take(atlas_.num_slots);
        atlas_.off_count = take(atlas_.num_slots);
        atlas_.num_vars = off;
    }

    const Scenario& sc_;
    const TransportIndex& index_;
    VariableAtlas atlas_;
    ConicProgram program_;
    std::map<Index, int> bus_idx_, gen_idx_, load_idx_, ess_idx_;
};

struct CompiledProgram {
    ConicProgram program;
    VariableAtlas atlas;
    TransportIndex index;
};

inline CompiledProgram compile(const Scenario& sc) {
    CompiledProgram out;
    out.index = build_index(sc);
    Compiler c(sc, out.index);
    out.program = c.compile();
    out.atlas = c.atlas();
    return out;
}

}  // namespace resroute
