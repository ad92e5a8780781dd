#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "resroute/core.hpp"

namespace resroute {

enum class BusKind { Load, Generator, Ess };

inline const char* to_string(BusKind k) {
    switch (k) {
        case BusKind::Load: return "load";
        case BusKind::Generator: return "generator";
        case BusKind::Ess: return "ess";
    }
    return "?";
}

struct Bus {
    Index id = 0;
    BusKind kind = BusKind::Load;
    int island = -1;  // filled by assign_islands
};

struct Branch {
    Index from = 0;
    Index to = 0;
    double resistance = 0.0;   // per unit
    double reactance = 0.0;    // per unit
    double current_sq_max = kInf;  // squared-current cap, inf = uncapped
};

struct GeneratorSpec {
    Index bus = 0;
    double p_max = 0.0;
    double ramp_up = 0.0;
    double ramp_down = 0.0;  // <= 0
    double fuel_initial = 0.0;
    double fuel_rate = 1.0;  // fuel per MWh produced
    double q_min = 0.0;
    double q_max = 0.0;
    std::vector<double> cost;  // per step, length T after resolve
};

struct LoadSpec {
    Index bus = 0;
    std::vector<double> p_forecast;  // length T, strictly positive
    std::vector<double> q_forecast;  // length T
    std::vector<double> pickup_weight;  // per step, length T after resolve
};

struct MessType {
    int type_id = 0;
    double soc_min_unit = 0.0;  // MWh per unit
    double soc_max_unit = 0.0;
};

struct EssBusSpec {
    Index bus = 0;
    // type id -> initial SoC of each unit of that type stationed here.
    std::map<int, std::vector<double>> unit_initial_soc;
    double p_ch_max = 0.0;
    double p_dis_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    // Stationary (non-routable) capacity offsets; zero when every unit is mobile.
    double stationary_soc_min = 0.0;
    double stationary_soc_max = 0.0;
    double stationary_soc_init = 0.0;

    int unit_count(int type_id) const {
        auto it = unit_initial_soc.find(type_id);
        return it == unit_initial_soc.end() ? 0 : static_cast<int>(it->second.size());
    }
};

struct TransportArcSpec {
    Index from = 0;
    Index to = 0;
    std::vector<int> travel_steps;  // allowed omega; empty = all of [1, H]
    std::vector<int> depart_steps;  // allowed t; empty = all of [1, T - omega]
    std::vector<int> types;         // allowed MESS types; empty = all
    std::optional<long> count_max;  // per-slot cap on traveling units
};

/// Transport tariff: cost per shipped unit is
///   base_per_mwh * fraction * soc_max_unit(type) * (1 + extra_step_fraction * (omega - 1)).
struct TransportCostRule {
    double base_per_mwh = 0.8;
    double fraction = 0.1;
    double extra_step_fraction = 0.1;
};

struct CostWeights {
    double pickup_default = 1.0;
    double generation_default = 0.8;
    TransportCostRule transport_rule;
    // (type, omega) -> per-unit cost override.
    std::map<std::pair<int, int>, double> transport_overrides;
};

struct Scenario {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<GeneratorSpec> generators;
    std::vector<LoadSpec> loads;
    std::vector<EssBusSpec> ess_buses;
    std::vector<MessType> mess_types;
    std::vector<TransportArcSpec> transport_arcs;
    CostWeights costs;

    int horizon = 0;        // T
    double step_hours = 1.0;
    int max_travel = 0;     // H
    double eta_ch = 1.0;
    double eta_dis = 1.0;
    double v_min = 0.95;
    double v_max = 1.05;
    std::vector<Index> reference_buses;  // one per island

    const Bus* find_bus(Index id) const {
        for (const auto& b : buses)
            if (b.id == id) return &b;
        return nullptr;
    }
    const MessType* find_type(int type_id) const {
        for (const auto& m : mess_types)
            if (m.type_id == type_id) return &m;
        return nullptr;
    }
    const EssBusSpec* find_ess(Index bus) const {
        for (const auto& e : ess_buses)
            if (e.bus == bus) return &e;
        return nullptr;
    }
    const GeneratorSpec* find_generator(Index bus) const {
        for (const auto& g : generators)
            if (g.bus == bus) return &g;
        return nullptr;
    }
    const LoadSpec* find_load(Index bus) const {
        for (const auto& l : loads)
            if (l.bus == bus) return &l;
        return nullptr;
    }

    bool is_reference(Index bus) const {
        return std::find(reference_buses.begin(), reference_buses.end(), bus) !=
               reference_buses.end();
    }

    double transport_unit_cost(int type_id, int omega) const {
        auto it = costs.transport_overrides.find({type_id, omega});
        if (it != costs.transport_overrides.end()) return it->second;
        const MessType* mt = find_type(type_id);
        double cap = mt ? mt->soc_max_unit : 0.0;
        const auto& r = costs.transport_rule;
        return r.base_per_mwh * r.fraction * cap *
               (1.0 + r.extra_step_fraction * (omega - 1));
    }

    /// Total unit count of a given type across all ESS buses.
    long total_units(int type_id) const {
        long n = 0;
        for (const auto& e : ess_buses) n += e.unit_count(type_id);
        return n;
    }
};

/// Connected components of the branch forest, ordered by smallest bus id.
inline std::vector<std::vector<Index>> islands(const Scenario& sc) {
    std::map<Index, Index> parent;
    for (const auto& b : sc.buses) parent[b.id] = b.id;
    std::function<Index(Index)> find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& br : sc.branches) {
        if (!parent.count(br.from) || !parent.count(br.to)) continue;
        Index a = find(br.from), b = find(br.to);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<Index, std::vector<Index>> groups;
    for (const auto& b : sc.buses) groups[find(b.id)].push_back(b.id);
    std::vector<std::vector<Index>> out;
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    // std::map keys ascend and each root is its group's smallest id already.
    return out;
}

/// Stamps the island index onto each bus and fills default reference buses
/// (smallest-id generator per island, else smallest bus id).
inline void assign_islands(Scenario& sc) {
    auto comps = islands(sc);
    std::map<Index, int> island_of;
    for (size_t i = 0; i < comps.size(); ++i)
        for (Index b : comps[i]) island_of[b] = static_cast<int>(i);
    for (auto& b : sc.buses) b.island = island_of[b.id];

    if (sc.reference_buses.empty()) {
        for (const auto& comp : comps) {
            Index ref = comp.front();
            for (Index b : comp) {
                const Bus* bus = sc.find_bus(b);
                if (bus && bus->kind == BusKind::Generator) {
                    ref = b;
                    break;  // comp is sorted, first generator wins
                }
            }
            sc.reference_buses.push_back(ref);
        }
    }
}

inline ValidationReport validate(const Scenario& sc) {
    ValidationReport rep;
    const int T = sc.horizon;
    const int H = sc.max_travel;

    if (T < 1) rep.add("horizon", "T must be >= 1");
    if (H >= T) rep.add("max_travel", "H must be < T");
    if (H < 0) rep.add("max_travel", "H must be >= 0");
    if (!(sc.step_hours > 0)) rep.add("step_hours", "must be positive");
    if (!(sc.eta_ch > 0 && sc.eta_ch <= 1)) rep.add("eta_ch", "must be in (0, 1]");
    if (!(sc.eta_dis > 0 && sc.eta_dis <= 1)) rep.add("eta_dis", "must be in (0, 1]");
    if (!(sc.v_min <= 1.0 && 1.0 <= sc.v_max))
        rep.add("voltage_bounds", "must satisfy v_min <= 1 <= v_max");

    std::set<Index> ids;
    for (const auto& b : sc.buses) {
        if (!ids.insert(b.id).second)
            rep.add("buses", "duplicate bus id " + std::to_string(b.id));
    }

    auto kind_of = [&](Index id) -> std::optional<BusKind> {
        const Bus* b = sc.find_bus(id);
        if (!b) return std::nullopt;
        return b->kind;
    };

    // Kind partition: every bus of a kind must carry exactly one matching spec.
    std::map<Index, int> spec_count;
    for (const auto& g : sc.generators) {
        spec_count[g.bus]++;
        if (kind_of(g.bus) != BusKind::Generator)
            rep.add("generators", "bus " + std::to_string(g.bus) + " is not a generator bus");
    }
    for (const auto& l : sc.loads) {
        spec_count[l.bus]++;
        if (kind_of(l.bus) != BusKind::Load)
            rep.add("loads", "bus " + std::to_string(l.bus) + " is not a load bus");
    }
    for (const auto& e : sc.ess_buses) {
        spec_count[e.bus]++;
        if (kind_of(e.bus) != BusKind::Ess)
            rep.add("ess", "bus " + std::to_string(e.bus) + " is not an ESS bus");
    }
    for (const auto& b : sc.buses) {
        int n = spec_count.count(b.id) ? spec_count[b.id] : 0;
        if (n != 1)
            rep.add("buses", "bus " + std::to_string(b.id) + " has " + std::to_string(n) +
                                 " device specs, expected exactly 1");
    }

    // Branches: endpoints exist, nonnegative resistance, forest structure.
    std::map<Index, Index> parent;
    for (const auto& b : sc.buses) parent[b.id] = b.id;
    std::function<Index(Index)> find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& br : sc.branches) {
        std::string tag = "branch (" + std::to_string(br.from) + "," + std::to_string(br.to) + ")";
        if (!ids.count(br.from) || !ids.count(br.to)) {
            rep.add(tag, "endpoint is not a bus");
            continue;
        }
        if (br.from == br.to) {
            rep.add(tag, "self-loop branch");
            continue;
        }
        if (br.resistance < 0) rep.add(tag, "resistance must be >= 0");
        if (br.current_sq_max < 0) rep.add(tag, "current cap must be >= 0");
        Index a = find(br.from), b = find(br.to);
        if (a == b)
            rep.add(tag, "creates a cycle; branches must form a forest");
        else
            parent[std::max(a, b)] = std::min(a, b);
    }

    for (const auto& g : sc.generators) {
        std::string tag = "generator " + std::to_string(g.bus);
        if (g.p_max < 0) rep.add(tag, "p_max must be >= 0");
        if (!(g.ramp_down <= 0 && 0 <= g.ramp_up))
            rep.add(tag, "need ramp_down <= 0 <= ramp_up");
        if (g.fuel_initial < 0) rep.add(tag, "fuel_initial must be >= 0");
        if (g.q_min > g.q_max) rep.add(tag, "q_min must be <= q_max");
        if (static_cast<int>(g.cost.size()) != T)
            rep.add(tag, "generation cost must have length T");
    }

    for (const auto& l : sc.loads) {
        std::string tag = "load " + std::to_string(l.bus);
        if (static_cast<int>(l.p_forecast.size()) != T ||
            static_cast<int>(l.q_forecast.size()) != T) {
            rep.add(tag, "forecasts must have length T");
            continue;
        }
        for (double p : l.p_forecast)
            if (!(p > 0)) {
                rep.add(tag, "p_forecast must be strictly positive at every step");
                break;
            }
        if (static_cast<int>(l.pickup_weight.size()) != T)
            rep.add(tag, "pickup_weight must have length T");
        else
            for (double w : l.pickup_weight)
                if (!(is_finite(w) && w >= 0)) {
                    rep.add(tag, "pickup_weight must be finite and >= 0");
                    break;
                }
    }

    std::set<int> type_ids;
    for (const auto& m : sc.mess_types) {
        std::string tag = "mess_type " + std::to_string(m.type_id);
        if (!type_ids.insert(m.type_id).second) rep.add(tag, "duplicate type id");
        if (!(0 <= m.soc_min_unit && m.soc_min_unit < m.soc_max_unit))
            rep.add(tag, "need 0 <= soc_min_unit < soc_max_unit");
    }

    for (const auto& e : sc.ess_buses) {
        std::string tag = "ess " + std::to_string(e.bus);
        if (e.p_ch_max < 0 || e.p_dis_max < 0) rep.add(tag, "power limits must be >= 0");
        if (e.q_min > e.q_max) rep.add(tag, "q_min must be <= q_max");
        for (const auto& [tid, socs] : e.unit_initial_soc) {
            const MessType* mt = sc.find_type(tid);
            if (!mt) {
                rep.add(tag, "unknown MESS type " + std::to_string(tid));
                continue;
            }
            for (double s : socs)
                if (!(mt->soc_min_unit <= s && s <= mt->soc_max_unit)) {
                    rep.add(tag, "initial unit SoC outside [soc_min_unit, soc_max_unit] for type " +
                                     std::to_string(tid));
                    break;
                }
        }
    }

    for (const auto& a : sc.transport_arcs) {
        std::string tag = "arc (" + std::to_string(a.from) + "," + std::to_string(a.to) + ")";
        if (a.from == a.to) {
            rep.add(tag, "self-loop arc");
            continue;
        }
        if (kind_of(a.from) != BusKind::Ess || kind_of(a.to) != BusKind::Ess)
            rep.add(tag, "arc endpoints must be ESS buses");
        for (int w : a.travel_steps)
            if (w < 1 || w > H) rep.add(tag, "travel time " + std::to_string(w) + " outside [1, H]");
        for (int t : a.depart_steps)
            if (t < 1 || t > T - 1) rep.add(tag, "departure step " + std::to_string(t) + " outside [1, T-1]");
        for (int tid : a.types)
            if (!sc.find_type(tid)) rep.add(tag, "unknown MESS type " + std::to_string(tid));
        if (a.count_max && *a.count_max < 0) rep.add(tag, "count_max must be >= 0");
    }

    if (!(is_finite(sc.costs.pickup_default) && sc.costs.pickup_default >= 0))
        rep.add("costs.pickup", "must be finite and >= 0");
    if (!(is_finite(sc.costs.generation_default) && sc.costs.generation_default >= 0))
        rep.add("costs.generation", "must be finite and >= 0");
    for (const auto& [key, c] : sc.costs.transport_overrides)
        if (!is_finite(c)) rep.add("costs.transport", "override must be finite");

    // Reference buses: exactly one per island, each inside its island.
    auto comps = islands(sc);
    if (sc.reference_buses.size() != comps.size()) {
        rep.add("reference_buses",
                "expected " + std::to_string(comps.size()) + " (one per island), got " +
                    std::to_string(sc.reference_buses.size()));
    } else {
        std::set<int> covered;
        for (Index r : sc.reference_buses) {
            const Bus* b = sc.find_bus(r);
            if (!b) {
                rep.add("reference_buses", "bus " + std::to_string(r) + " does not exist");
                continue;
            }
            int isl = -1;
            for (size_t i = 0; i < comps.size(); ++i)
                if (std::binary_search(comps[i].begin(), comps[i].end(), r))
                    isl = static_cast<int>(i);
            if (isl < 0 || !covered.insert(isl).second)
                rep.add("reference_buses", "islands must each have exactly one reference bus");
        }
    }

    return rep;
}

// ---------------------------------------------------------------------------
// JSON serialization. Schema documented in docs/scenario_schema.md.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> number_or_array(const nlohmann::json& j, int T) {
    if (j.is_number()) return std::vector<double>(T, j.get<double>());
    auto v = j.get<std::vector<double>>();
    return v;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    const auto& hz = j.at("horizon");
    sc.horizon = hz.at("steps").get<int>();
    sc.step_hours = hz.value("step_hours", 1.0);
    sc.max_travel = hz.value("max_travel_steps", 0);

    if (j.contains("options")) {
        const auto& op = j.at("options");
        sc.eta_ch = op.value("eta_charge", 0.9);
        sc.eta_dis = op.value("eta_discharge", 0.9);
        sc.v_min = op.value("v_min", 0.95);
        sc.v_max = op.value("v_max", 1.05);
        if (op.contains("reference_buses"))
            sc.reference_buses = op.at("reference_buses").get<std::vector<Index>>();
    }

    for (const auto& bj : j.at("buses")) {
        Bus b;
        b.id = bj.at("id").get<Index>();
        std::string k = bj.at("kind").get<std::string>();
        if (k == "load") b.kind = BusKind::Load;
        else if (k == "generator") b.kind = BusKind::Generator;
        else if (k == "ess") b.kind = BusKind::Ess;
        else throw std::runtime_error("unknown bus kind: " + k);
        sc.buses.push_back(b);
    }

    for (const auto& bj : j.value("branches", nlohmann::json::array())) {
        Branch br;
        br.from = bj.at("from").get<Index>();
        br.to = bj.at("to").get<Index>();
        br.resistance = bj.at("r").get<double>();
        br.reactance = bj.at("x").get<double>();
        if (bj.contains("i_sq_max") && !bj.at("i_sq_max").is_null())
            br.current_sq_max = bj.at("i_sq_max").get<double>();
        sc.branches.push_back(br);
    }

    if (j.contains("costs")) {
        const auto& cj = j.at("costs");
        sc.costs.pickup_default = cj.value("pickup_default", 1.0);
        sc.costs.generation_default = cj.value("generation_default", 0.8);
        if (cj.contains("transport_rule")) {
            const auto& rj = cj.at("transport_rule");
            sc.costs.transport_rule.base_per_mwh = rj.value("base_per_mwh", 0.8);
            sc.costs.transport_rule.fraction = rj.value("fraction", 0.1);
            sc.costs.transport_rule.extra_step_fraction = rj.value("extra_step_fraction", 0.1);
        }
        for (const auto& oj : cj.value("transport_overrides", nlohmann::json::array()))
            sc.costs.transport_overrides[{oj.at("type").get<int>(), oj.at("omega").get<int>()}] =
                oj.at("cost").get<double>();
    }

    for (const auto& gj : j.value("generators", nlohmann::json::array())) {
        GeneratorSpec g;
        g.bus = gj.at("bus").get<Index>();
        g.p_max = gj.at("p_max").get<double>();
        g.ramp_up = gj.at("ramp_up").get<double>();
        g.ramp_down = gj.at("ramp_down").get<double>();
        g.fuel_initial = gj.at("fuel_initial").get<double>();
        g.fuel_rate = gj.value("fuel_rate", 1.0);
        g.q_min = gj.value("q_min", 0.0);
        g.q_max = gj.value("q_max", 0.0);
        if (gj.contains("cost"))
            g.cost = detail::number_or_array(gj.at("cost"), sc.horizon);
        else
            g.cost.assign(sc.horizon, sc.costs.generation_default);
        sc.generators.push_back(g);
    }

    for (const auto& lj : j.value("loads", nlohmann::json::array())) {
        LoadSpec l;
        l.bus = lj.at("bus").get<Index>();
        l.p_forecast = detail::number_or_array(lj.at("p_forecast"), sc.horizon);
        l.q_forecast = detail::number_or_array(lj.at("q_forecast"), sc.horizon);
        if (lj.contains("pickup_weight"))
            l.pickup_weight = detail::number_or_array(lj.at("pickup_weight"), sc.horizon);
        else
            l.pickup_weight.assign(sc.horizon, sc.costs.pickup_default);
        sc.loads.push_back(l);
    }

    for (const auto& mj : j.value("mess_types", nlohmann::json::array())) {
        MessType m;
        m.type_id = mj.at("id").get<int>();
        m.soc_min_unit = mj.at("soc_min_unit").get<double>();
        m.soc_max_unit = mj.at("soc_max_unit").get<double>();
        sc.mess_types.push_back(m);
    }

    for (const auto& ej : j.value("ess", nlohmann::json::array())) {
        EssBusSpec e;
        e.bus = ej.at("bus").get<Index>();
        e.p_ch_max = ej.at("p_charge_max").get<double>();
        e.p_dis_max = ej.at("p_discharge_max").get<double>();
        e.q_min = ej.value("q_min", 0.0);
        e.q_max = ej.value("q_max", 0.0);
        e.stationary_soc_min = ej.value("stationary_soc_min", 0.0);
        e.stationary_soc_max = ej.value("stationary_soc_max", 0.0);
        e.stationary_soc_init = ej.value("stationary_soc_init", 0.0);
        for (const auto& uj : ej.value("units", nlohmann::json::array()))
            e.unit_initial_soc[uj.at("type").get<int>()] =
                uj.at("initial_soc").get<std::vector<double>>();
        sc.ess_buses.push_back(e);
    }

    if (j.contains("transport")) {
        for (const auto& aj : j.at("transport").value("arcs", nlohmann::json::array())) {
            TransportArcSpec a;
            a.from = aj.at("from").get<Index>();
            a.to = aj.at("to").get<Index>();
            if (aj.contains("travel_steps"))
                a.travel_steps = aj.at("travel_steps").get<std::vector<int>>();
            if (aj.contains("depart_steps"))
                a.depart_steps = aj.at("depart_steps").get<std::vector<int>>();
            if (aj.contains("types")) a.types = aj.at("types").get<std::vector<int>>();
            if (aj.contains("count_max") && !aj.at("count_max").is_null())
                a.count_max = aj.at("count_max").get<long>();
            sc.transport_arcs.push_back(a);
        }
    }

    assign_islands(sc);
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json j;
    in >> j;
    return scenario_from_json(j);
}

}  // namespace resroute
