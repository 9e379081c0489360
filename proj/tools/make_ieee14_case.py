#!/usr/bin/env python3
"""Regenerates cases/ieee14.json.

The network is the standard IEEE 14-bus test system reduced to the data the
toolkit uses: per-line series reactance converted to per-unit susceptance
(b = 1/x on the 100 MVA base), thermal limits in MW, and a per-line wildfire
risk index. Two committable units (buses 1 and 2) carry the classic 14-bus
cost and ramp figures; the 11 loads follow a 24-hour shape that peaks at
hour 16 with a system peak of 399 MW, the combined capacity of both units.

Per-line ignition probabilities scale linearly with the risk index so that
the riskiest line sits a little under 5.4e-6 per hour.
"""

import json
import pathlib

# id, from, to, reactance (pu), flow_max (MW), wfpi
LINES = [
    (1, 1, 2, 0.05917, 250.0, 80.4),
    (2, 1, 5, 0.22304, 150.0, 63.1),
    (3, 2, 3, 0.19797, 120.0, 70.2),
    (4, 2, 4, 0.17632, 110.0, 77.1),
    (5, 2, 5, 0.17388, 110.0, 83.2),
    (6, 3, 4, 0.17103, 80.0, 73.4),
    (7, 4, 5, 0.04211, 120.0, 75.6),
    (8, 4, 7, 0.20912, 90.0, 84.5),
    (9, 4, 9, 0.55618, 87.0, 81.9),
    (10, 5, 6, 0.25202, 63.0, 78.3),
    (11, 6, 11, 0.19890, 63.0, 0.0),
    (12, 6, 12, 0.25581, 40.0, 0.0),
    (13, 6, 13, 0.13027, 60.0, 56.89),
    (14, 7, 8, 0.17615, 50.0, 89.51),
    (15, 7, 9, 0.11001, 90.0, 86.7),
    (16, 9, 10, 0.08450, 60.0, 0.0),
    (17, 9, 14, 0.27038, 55.0, 88.2),
    (18, 10, 11, 0.19207, 45.0, 0.0),
    (19, 12, 13, 0.19988, 40.0, 0.0),
    (20, 13, 14, 0.34802, 45.0, 0.0),
]

# id, bus, p_max, ramp, min_up, min_down, marginal, start/stop cost
GENERATORS = [
    (1, 1, 340.0, 248.4, 8, 4, 7.92, 280.0),
    (2, 2, 59.0, 22.0, 2, 2, 23.27, 56.0),
]

# bus -> peak load (MW); the column sums to exactly 399.00
PEAK_LOAD = {
    2: 33.43,
    3: 145.12,
    4: 73.64,
    5: 11.71,
    6: 17.25,
    9: 45.45,
    10: 13.86,
    11: 5.39,
    12: 9.40,
    13: 20.80,
    14: 22.95,
}

# Fraction of peak per hour; hour 16 (1-based) is the peak.
SHAPE = [
    0.62, 0.59, 0.57, 0.55, 0.56, 0.60, 0.66, 0.72, 0.77, 0.80, 0.83, 0.85,
    0.86, 0.88, 0.93, 1.00, 0.98, 0.95, 0.93, 0.90, 0.85, 0.78, 0.71, 0.65,
]

VOLL = 1000.0
IGNITION_AT_MAX_WFPI = 9e-6  # per hour at wfpi = 150


def main() -> None:
    assert abs(sum(PEAK_LOAD.values()) - 399.0) < 1e-9
    assert sum(w for *_, w in LINES) == 1089.0

    case = {
        "meta": {"name": "ieee14", "horizon_hours": len(SHAPE), "theta_bound_rad": 0.6},
        "buses": [{"id": b, "name": f"bus{b}"} for b in range(1, 15)],
        "lines": [
            {
                "id": lid,
                "from": u,
                "to": v,
                "susceptance": round(1.0 / x, 10),
                "flow_max": cap,
                "wfpi": w,
                "ignition_prob": round(w / 150.0 * IGNITION_AT_MAX_WFPI, 14),
            }
            for lid, u, v, x, cap, w in LINES
        ],
        "generators": [
            {
                "id": gid,
                "bus": bus,
                "p_min": 0.0,
                "p_max": pmax,
                "ramp_max": ramp,
                "min_up": up,
                "min_down": dn,
                "marginal_cost": cost,
                "startup_cost": cyc,
                "shutdown_cost": cyc,
                "initial_on": False,
            }
            for gid, bus, pmax, ramp, up, dn, cost, cyc in GENERATORS
        ],
        "demands": [
            {
                "id": i + 1,
                "bus": bus,
                "voll": VOLL,
                "profile": [round(peak * f, 2) for f in SHAPE],
            }
            for i, (bus, peak) in enumerate(sorted(PEAK_LOAD.items()))
        ],
    }

    out = pathlib.Path(__file__).resolve().parent.parent / "cases" / "ieee14.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(case, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
