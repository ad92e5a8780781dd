#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "resroute/scenario.hpp"

namespace resroute {

/// One legal (arc, departure, travel time, MESS type) tuple of the
/// time-expanded transport network.
struct TripSlot {
    int arc = 0;        // index into Scenario::transport_arcs
    Index from = 0;
    Index to = 0;
    int depart = 0;     // t, 1-based
    int travel = 0;     // omega
    int mess_type = 0;  // nu
    std::optional<long> count_max;

    int arrive() const { return depart + travel; }
};

/// Immutable index over trip slots. A slot contributes its SoC positively to
/// its destination at the arrival step and negatively to its origin at the
/// departure step; constraint builders consume arrivals_at/departures_at and
/// never re-derive time offsets themselves.
class TransportIndex {
  public:
    const std::vector<TripSlot>& slots() const { return slots_; }
    int size() const { return static_cast<int>(slots_.size()); }
    const TripSlot& slot(int i) const { return slots_[i]; }

    const std::vector<int>& arrivals_at(Index bus, int t) const {
        auto it = arrivals_.find({bus, t});
        return it == arrivals_.end() ? empty_ : it->second;
    }
    const std::vector<int>& departures_at(Index bus, int t) const {
        auto it = departures_.find({bus, t});
        return it == departures_.end() ? empty_ : it->second;
    }

    /// Slots strictly between departure and arrival at step t.
    std::vector<int> in_transit_at(int t) const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (slots_[i].depart < t && t < slots_[i].arrive()) out.push_back(i);
        return out;
    }

    friend TransportIndex build_index(const Scenario& sc);

  private:
    std::vector<TripSlot> slots_;
    std::map<std::pair<Index, int>, std::vector<int>> arrivals_;
    std::map<std::pair<Index, int>, std::vector<int>> departures_;
    std::vector<int> empty_;
};

/// Enumerates every legal trip slot, ordered by (arc, type, travel, depart).
inline TransportIndex build_index(const Scenario& sc) {
    TransportIndex idx;
    const int T = sc.horizon;
    const int H = sc.max_travel;

    for (size_t a = 0; a < sc.transport_arcs.size(); ++a) {
        const auto& arc = sc.transport_arcs[a];
        std::vector<int> types;
        if (arc.types.empty())
            for (const auto& m : sc.mess_types) types.push_back(m.type_id);
        else
            types = arc.types;
        std::sort(types.begin(), types.end());

        std::vector<int> omegas;
        if (arc.travel_steps.empty())
            for (int w = 1; w <= H; ++w) omegas.push_back(w);
        else
            omegas = arc.travel_steps;
        std::sort(omegas.begin(), omegas.end());

        for (int nu : types) {
            for (int w : omegas) {
                for (int t = 1; t <= T - w; ++t) {
                    if (!arc.depart_steps.empty() &&
                        std::find(arc.depart_steps.begin(), arc.depart_steps.end(), t) ==
                            arc.depart_steps.end())
                        continue;
                    TripSlot s;
                    s.arc = static_cast<int>(a);
                    s.from = arc.from;
                    s.to = arc.to;
                    s.depart = t;
                    s.travel = w;
                    s.mess_type = nu;
                    s.count_max = arc.count_max;
                    idx.slots_.push_back(s);
                }
            }
        }
    }

    for (int i = 0; i < idx.size(); ++i) {
        const TripSlot& s = idx.slots_[i];
        idx.arrivals_[{s.to, s.arrive()}].push_back(i);
        idx.departures_[{s.from, s.depart}].push_back(i);
    }
    return idx;
}

}  // namespace resroute
