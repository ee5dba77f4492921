#!/usr/bin/env python3
"""Regenerate the calibrated harvester efficiency curve.

The shipped curve is a piecewise-linear surrogate, not a vendor datasheet
trace.  It is anchored so the end-to-end charge model reproduces the
measured behaviour of the reference deployment:

  * initial charge (0 V -> 2.3 V on 68 uF) takes <= 30 s at 4.5 m,
  * update charge (2.2 V -> 2.3 V) takes ~10 s at 6 m,
  * the charge-time ratio t(d)/t(d-0.5) has its minimum near 4.5 m and
    grows beyond it (the knee where falling efficiency compounds the
    inverse-square path loss).

Anchor efficiencies are placed at the input powers corresponding to
half-metre distances on the default 27 dBm EIRP / 2.15 dBi link, with the
drop between anchors specified in dB of output power so the knee shape is
explicit.  Run from the repository root:

    python scripts/calibrate_efficiency_curve.py
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

C_LIGHT = 299792458.0
FREQ = 869.5e6
EIRP_DBM = 27.0
G_R_DBI = 2.15

# eta at the 4.5 m and 6 m anchors; chosen so t_initial(4.5) ~ 27.7 s (inside
# the 30 s budget with margin) and t_update(6) ~ 10.0 s.
ETA_4P5 = 0.2125
ETA_6P0 = 0.0890

# dB drop of 10*log10(eta) per half-metre step, outward from 4.5 m.  The
# outward steps grow, which is what creates the knee; the 5.0->6.0 segment is
# scaled so it lands exactly on ETA_6P0.
DROP_OUT_5, DROP_OUT_5P5 = 0.93, 1.26
DROP_OUT_6P5, DROP_OUT_7 = 2.10, 2.75
# dB rise per half-metre step, inward from 4.5 m down to 1 m.
RISES_IN = (0.55, 0.48, 0.42, 0.36, 0.31, 0.26, 0.21)

TOP_POINTS = ((0.0, 0.40), (5.0, 0.42), (10.0, 0.44))
BOTTOM_POINT = (-19.5, 0.0126)


def input_power_dbm(distance_m: float) -> float:
    lam = C_LIGHT / FREQ
    return EIRP_DBM + G_R_DBI - 20.0 * math.log10(4.0 * math.pi * distance_m / lam)


def build_curve() -> list[tuple[float, float]]:
    level = {4.5: 10.0 * math.log10(ETA_4P5)}
    total = level[4.5] - 10.0 * math.log10(ETA_6P0)
    level[5.0] = level[4.5] - DROP_OUT_5
    level[5.5] = level[5.0] - DROP_OUT_5P5
    level[6.0] = level[5.5] - (total - DROP_OUT_5 - DROP_OUT_5P5)
    level[6.5] = level[6.0] - DROP_OUT_6P5
    level[7.0] = level[6.5] - DROP_OUT_7
    d = 4.5
    for rise in RISES_IN:
        level[round(d - 0.5, 1)] = level[d] + rise
        d = round(d - 0.5, 1)

    points = [(input_power_dbm(dist), 10.0 ** (lvl / 10.0))
              for dist, lvl in level.items()]
    points.append(BOTTOM_POINT)
    points.extend(TOP_POINTS)
    points.sort()
    return points


def verify(points: list[tuple[float, float]]) -> None:
    ps = np.array([p for p, _ in points])
    es = np.array([e for _, e in points])
    assert (np.diff(ps) > 0).all() and (np.diff(es) > 0).all()

    def harvest(d: float) -> float:
        p = input_power_dbm(d)
        if p < -19.5 or p > 10.0:
            return 0.0
        return float(np.interp(p, ps, es)) * 10.0 ** ((p - 30.0) / 10.0)

    e_initial = 0.5 * 68e-6 * 2.3**2
    e_update = 0.5 * 68e-6 * (2.3**2 - 2.2**2)
    grid = np.arange(1.0, 7.01, 0.5)
    t_initial = np.array([e_initial / harvest(d) for d in grid])
    ratios = t_initial[1:] / t_initial[:-1]

    print(f"t_initial(4.5 m) = {e_initial / harvest(4.5):7.3f} s  (budget 30 s)")
    print(f"t_update(6.0 m)  = {e_update / harvest(6.0):7.3f} s  (target ~10 s)")
    knee = ratios[7:]
    print(f"ratio t(d)/t(d-0.5) beyond 4.5 m: {np.round(knee, 4)}")
    assert e_initial / harvest(4.5) <= 30.0
    assert abs(e_update / harvest(6.0) - 10.0) <= 2.0
    assert (np.diff(knee) > 0).all(), "knee must steepen beyond 4.5 m"


def main() -> None:
    points = build_curve()
    verify(points)
    out = Path(__file__).resolve().parents[1] / "src" / "chirploc" / "data" \
        / "harvester_efficiency.csv"
    lines = [
        "# Calibrated RF harvester efficiency surrogate (NOT a vendor datasheet",
        "# trace).  Piecewise linear in input power; regenerate with",
        "# scripts/calibrate_efficiency_curve.py, which documents the anchors.",
        "p_in_dbm,efficiency",
    ]
    lines += [f"{p:.3f},{e:.5f}" for p, e in points]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
