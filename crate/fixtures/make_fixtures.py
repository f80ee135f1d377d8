"""Regenerates the bundled fixtures.

ieee118/: network and unit list from the PYPOWER copy of the IEEE 118-bus
case (``pip install pypower``); unit-commitment parameters, fast-start
designation, line ratings and the net-load profile are synthesised here.

steep_ramp/: a three-unit single-bus day whose only event is a 60 MW
quarter-hour step, sized so that an hourly ramp requirement is met by the
cheap unit alone while the quarter-hour requirement needs a second unit.
"""

import json
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

HERE = Path(__file__).resolve().parent

# Fraction of peak net load per hour: overnight plateau, morning bump,
# midday solar trough, steep evening ramp.
DUCK = [0.74, 0.72, 0.71, 0.71, 0.72, 0.76, 0.82, 0.80, 0.70, 0.60, 0.54, 0.51,
        0.50, 0.51, 0.55, 0.63, 0.75, 0.88, 0.97, 1.00, 0.97, 0.92, 0.85, 0.78]
PEAK_MW = 4200.0
N_LOADS = 91
N_FAST = 18
N_TIGHT = 3


def write_profile(path, hourly, quarterly):
    with open(path, "w") as f:
        f.write("resolution,index,forecast_mw,sigma_mw\n")
        for t, v in enumerate(hourly, 1):
            f.write(f"hour,{t},{v:.4f},\n")
        for q, v in enumerate(quarterly, 1):
            f.write(f"quarter,{q},{v:.4f},\n")


def duck_profile():
    hourly = np.array(DUCK) * PEAK_MW
    spline = CubicSpline(np.arange(24) + 0.5, hourly, bc_type="natural")
    quarterly = spline(np.arange(96) * 0.25 + 0.125).reshape(24, 4)
    # Shift each hour's quarters so they average to the hourly value.
    quarterly += (hourly - quarterly.mean(axis=1))[:, None]
    return hourly, quarterly.ravel()


def ptdf(buses, lines, slack):
    idx = {b: i for i, b in enumerate(buses)}
    nb, nl = len(buses), len(lines)
    a = np.zeros((nl, nb))
    for k, ln in enumerate(lines):
        a[k, idx[ln["from"]]] = 1.0
        a[k, idx[ln["to"]]] = -1.0
    bd = np.diag([1.0 / ln["reactance"] for ln in lines])
    keep = [i for i in range(nb) if buses[i] != slack]
    bbus = a.T @ bd @ a
    x = np.zeros((nb, nb))
    x[np.ix_(keep, keep)] = np.linalg.inv(bbus[np.ix_(keep, keep)])
    return bd @ a @ x  # line x bus


def make_ieee118():
    from pypower.case118 import case118

    case = case118()
    bus, gen, branch, gencost = case["bus"], case["gen"], case["branch"], case["gencost"]
    buses = [int(b) for b in bus[:, 0]]
    slack = int(bus[bus[:, 1] == 3][0, 0])

    lines = [{"id": f"L{k + 1}", "from": int(br[0]), "to": int(br[1]), "reactance": float(br[3]), "rating": 0.0}
             for k, br in enumerate(branch)]

    demand = bus[:, 2]
    order = np.argsort(-demand, kind="stable")[:N_LOADS]
    total = demand[order].sum()
    shares = [{"bus": buses[i], "share": float(demand[i] / total)} for i in sorted(order)]
    shares[-1]["share"] = 1.0 - sum(s["share"] for s in shares[:-1])

    # The 100 MW entries of the case are placeholders; every other one by bus
    # number becomes a small fast-start unit, the rest mid-merit units.
    placeholders = sorted(i for i in range(len(gen)) if gen[i, 8] == 100.0)
    fast = set(placeholders[::2][:N_FAST])
    generators = []
    for i in range(len(gen)):
        b = int(gen[i, 0])
        c2, c1 = gencost[i, 4], gencost[i, 5]
        if i in fast:
            k = len([j for j in fast if j < i])
            p_max = [20.0, 30.0, 40.0, 50.0][k % 4]
            u = dict(cost=round(c1 * 1.6 + p_max * 0.1 + 0.35 * k, 2), no_load_cost=5.0 * p_max, startup_cost=4.0 * p_max,
                     shutdown_cost=0.0, p_max=p_max, p_min=0.2 * p_max, ramp_hourly=p_max, ramp_15min=p_max,
                     ramp_startup=p_max, ramp_shutdown=p_max, min_up=1, min_down=1, fast_start=True)
        elif gen[i, 8] == 100.0:
            # Spread sizes and heat rates so no two mid-merit units are interchangeable.
            k = len([j for j in placeholders if j < i and j not in fast])
            p_max = [80.0, 90.0, 100.0, 110.0, 120.0][k % 5]
            u = dict(cost=round(c1 + c2 * p_max + 0.4 * k, 2), no_load_cost=2.0 * p_max,
                     startup_cost=20.0 * p_max, shutdown_cost=0.0, p_max=p_max, p_min=0.3 * p_max,
                     ramp_hourly=0.5 * p_max, ramp_15min=0.125 * p_max, ramp_startup=0.5 * p_max,
                     ramp_shutdown=0.5 * p_max, min_up=3, min_down=3, fast_start=False)
        else:
            p_max = float(gen[i, 8])
            ramp = round(0.35 * p_max, 2)
            u = dict(cost=round(c1 + 0.5 * c2 * p_max, 2), no_load_cost=round(3.0 * p_max, 2),
                     startup_cost=round(40.0 * p_max, 2), shutdown_cost=0.0, p_max=p_max,
                     p_min=round(0.3 * p_max, 2), ramp_hourly=ramp, ramp_15min=round(ramp / 4, 3),
                     ramp_startup=round(0.5 * p_max, 2), ramp_shutdown=round(0.5 * p_max, 2),
                     min_up=6 if p_max >= 300 else 4, min_down=6 if p_max >= 300 else 4, fast_start=False)
        generators.append({"id": f"G{b}", "bus": b, **u})

    hourly, quarterly = duck_profile()

    # Initial state: cheapest long-start units on, economic dispatch of hour 1.
    slow = sorted((g for g in generators if not g["fast_start"]), key=lambda g: g["cost"])
    need, cap = hourly[0], 0.0
    on = []
    for g in slow:
        if cap >= 1.15 * need:
            break
        on.append(g)
        cap += g["p_max"]
    out = {g["id"]: g["p_min"] for g in on}
    rest = need - sum(out.values())
    for g in on:
        add = min(rest, g["p_max"] - g["p_min"])
        out[g["id"]] += add
        rest -= add
    for g in generators:
        if g["id"] in out:
            g["initial"] = {"on": True, "output": round(out[g["id"]], 6), "hours_in_state": 24}
        else:
            g["initial"] = {"on": False, "output": 0.0, "hours_in_state": 24}

    # Ratings: largest DC flow over the day under a merit-order dispatch of
    # the long-start units, plus margin; the few heaviest corridors are rated
    # below that flow so congestion appears around the peak.
    h = ptdf(buses, lines, slack)
    idx = {b: i for i, b in enumerate(buses)}
    peak_flow = np.zeros(len(lines))
    for load in hourly:
        inj = np.zeros(len(buses))
        rest = load
        for g in slow:
            take = min(rest, g["p_max"])
            inj[idx[g["bus"]]] += take
            rest -= take
        for s in shares:
            inj[idx[s["bus"]]] -= load * s["share"]
        peak_flow = np.maximum(peak_flow, np.abs(h @ inj))
    tight = set(np.argsort(-peak_flow)[:N_TIGHT])
    for k, (ln, f) in enumerate(zip(lines, peak_flow)):
        margin = 0.9 if k in tight else 1.15
        ln["rating"] = float(round(max(margin * f, 50.0), 1))

    out_dir = HERE / "ieee118"
    out_dir.mkdir(exist_ok=True)
    system = {"name": "ieee118", "slack_bus": slack, "generators": generators, "buses": buses,
              "lines": lines, "load_shares": shares}
    (out_dir / "system.json").write_text(json.dumps(system, indent=1) + "\n")
    write_profile(out_dir / "profile.csv", hourly, quarterly)


def make_steep_ramp():
    def unit(uid, **kw):
        base = dict(id=uid, bus=1, no_load_cost=0.0, startup_cost=0.0, shutdown_cost=0.0, p_min=0.0,
                    min_up=1, min_down=1, fast_start=False)
        base.update(kw)
        return base

    generators = [
        unit("A", cost=10.0, p_max=1000.0, p_min=100.0, ramp_hourly=60.0, ramp_15min=15.0,
             ramp_startup=1000.0, ramp_shutdown=1000.0,
             initial={"on": True, "output": 400.0, "hours_in_state": 24}),
        unit("B", cost=20.0, no_load_cost=50.0, startup_cost=500.0, p_max=200.0, p_min=10.0,
             ramp_hourly=200.0, ramp_15min=50.0, ramp_startup=100.0, ramp_shutdown=100.0, min_up=4,
             initial={"on": False, "output": 0.0, "hours_in_state": 24}),
        unit("F", cost=100.0, startup_cost=100.0, p_max=30.0, ramp_hourly=120.0, ramp_15min=30.0,
             ramp_startup=30.0, ramp_shutdown=30.0, fast_start=True,
             initial={"on": False, "output": 0.0, "hours_in_state": 24}),
    ]
    system = {"name": "steep-ramp", "slack_bus": 1, "generators": generators, "buses": [1], "lines": [],
              "load_shares": [{"bus": 1, "share": 1.0}]}
    quarterly = [400.0] * 48 + [400.0, 400.0, 400.0, 460.0] + [460.0] * 44
    hourly = [sum(quarterly[4 * t:4 * t + 4]) / 4 for t in range(24)]
    out_dir = HERE / "steep_ramp"
    out_dir.mkdir(exist_ok=True)
    (out_dir / "system.json").write_text(json.dumps(system, indent=1) + "\n")
    write_profile(out_dir / "profile.csv", hourly, quarterly)


if __name__ == "__main__":
    make_steep_ramp()
    make_ieee118()
