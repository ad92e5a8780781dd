#!/usr/bin/env python3
"""Deterministically generate the 123-bus benchmark scenario JSON.

Bus roles, storage fleet parameters, generator limits, and the transport arc
list are fixed; load magnitudes and per-unit initial SoC are drawn from a
seeded RNG so the file is reproducible byte-for-byte.

Two corrections to the published arc list are applied (see docs):
  * (122,112) -> (122,116): bus 112 is not a storage bus.
  * The duplicate (121,72) entry is replaced by (122,18) to keep 40 distinct
    arcs, matching a route that otherwise has no supporting arc.
"""

import argparse
import json
import random

ESS_BUSES = [3, 8, 18, 21, 23, 25, 54, 57, 61, 67, 72,
             89, 91, 93, 115, 116, 120, 121, 122]
GEN_BUSES = [13, 14, 15, 26, 27, 36, 40, 44, 78, 81, 97,
             101, 105, 108, 110, 117, 118, 119, 123]

ARCS = [
    (121, 61), (121, 72), (121, 120), (57, 120),
    (121, 116), (21, 67), (21, 122), (23, 121),
    (25, 89), (54, 121), (54, 25), (54, 115),
    (54, 116), (54, 120), (57, 54), (61, 116),
    (67, 23), (67, 116), (67, 120), (72, 25),
    (72, 57), (72, 89), (72, 93), (89, 67),
    (89, 72), (89, 122), (91, 115), (91, 120),
    (93, 121), (93, 89), (115, 57), (116, 72),
    (116, 120), (120, 57), (120, 89), (122, 18),
    (121, 93), (122, 121), (122, 61), (122, 116),
]

# Five electrically separate sections (no branch crosses a boundary).
ISLAND_RANGES = [(1, 25), (26, 50), (51, 75), (76, 100), (101, 123)]

S_MAX_UNIT = {1: 0.25, 2: 0.05}
S_MIN_UNIT = {1: 0.025, 2: 0.005}
T = 10


def build(seed: int) -> dict:
    rng = random.Random(seed)
    kinds = {}
    for b in range(1, 124):
        kinds[b] = "ess" if b in ESS_BUSES else "generator" if b in GEN_BUSES else "load"

    branches = []
    for lo, hi in ISLAND_RANGES:
        for b in range(lo, hi):
            branches.append({"from": b, "to": b + 1, "r": 0.004, "x": 0.004})

    loads = []
    for b in range(1, 124):
        if kinds[b] != "load":
            continue
        p = round(rng.uniform(0.02, 0.06), 6)
        loads.append({"bus": b, "p_forecast": p, "q_forecast": round(0.5 * p, 6)})

    generators = [
        {"bus": b, "p_max": 0.46, "ramp_up": 0.15, "ramp_down": -0.1,
         "fuel_initial": 3.55, "fuel_rate": 1.0, "q_min": -0.24, "q_max": 0.24,
         "cost": 0.8}
        for b in GEN_BUSES
    ]

    ess = []
    for b in ESS_BUSES:
        n = 2 if b == 122 else 1  # 2 extra units at bus 122 bring the fleet to 40
        units = []
        for t in (1, 2):
            socs = [round(rng.uniform(0.5 * S_MAX_UNIT[t], 0.65 * S_MAX_UNIT[t]), 6)
                    for _ in range(n)]
            units.append({"type": t, "initial_soc": socs})
        ess.append({"bus": b, "p_charge_max": 0.16, "p_discharge_max": 0.16,
                    "q_min": -0.24, "q_max": 0.24, "units": units})

    return {
        "horizon": {"steps": T, "step_hours": 1.0, "max_travel_steps": 3},
        "options": {"eta_charge": 0.9, "eta_discharge": 0.9,
                    "v_min": 0.95, "v_max": 1.05},
        "costs": {"pickup_default": 1.0, "generation_default": 0.8,
                  "transport_rule": {"base_per_mwh": 0.8, "fraction": 0.1,
                                     "extra_step_fraction": 0.1}},
        "buses": [{"id": b, "kind": kinds[b]} for b in range(1, 124)],
        "branches": branches,
        "generators": generators,
        "loads": loads,
        "mess_types": [{"id": 1, "soc_min_unit": 0.025, "soc_max_unit": 0.25},
                       {"id": 2, "soc_min_unit": 0.005, "soc_max_unit": 0.05}],
        "ess": ess,
        "transport": {"arcs": [{"from": a, "to": b} for a, b in ARCS]},
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240123)
    ap.add_argument("--out", default="data/ieee123_mess.json")
    args = ap.parse_args()
    with open(args.out, "w") as f:
        json.dump(build(args.seed), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
