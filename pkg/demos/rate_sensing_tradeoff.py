"""
Trading sensing accuracy for secrecy rate
=========================================

A dual-function base station spends one power budget on two jobs: a rank-one
information beam toward the communication user, and a sensing covariance that
matches a multi-beam radar pattern.  This script sweeps the secrecy-rate
floor R0 and shows what each extra bit costs in beampattern matching error,
comparing the joint design against the two-stage benchmark (information beam
first, sensing with the leftover power) and against the secrecy-free sensing
bound.

Runs in a couple of minutes at a reduced pattern-grid size; bump `m` and
`points` for publication-quality numbers.
"""

import os

import numpy as np

from secbeam import baseline, scenario, search, worstcase

# the CU sits at 3 degrees, just off the broadside sensing beam; all four
# sensing targets are probed, the two innermost ones are untrusted
DOC = {
    "system": {"n": 8, "q_total_watt": 1.0},
    "geometry": {"cu_angle_deg": 3.0,
                 "target_angles_deg": [-15.0, 15.0, -45.0, 45.0],
                 "k_eve": 2},
    "sensing": {"m": 150},
    "secrecy": {"mode": "perfect", "r0": 4.0},
}

RATES = (1.0, 2.0, 3.0, 4.0, 5.0)


def main():
    scn = scenario.Scenario(DOC)
    cfg = scn.config()
    spec = scn.sensing_spec()

    sen = worstcase.solve_sensing_only(cfg, spec)
    print(f"sensing-only floor: D = {sen.objective:.4f} (no secrecy constraint)")
    print()
    print(f"{'R0 (bps/Hz)':>12} {'D joint':>10} {'D separate':>11} {'joint excess':>13}")

    rows = []
    for r0 in RATES:
        inst = scn.instance(r0=r0)
        joint = worstcase.solve_p1(inst, search.design_settings(points=20))
        sep = baseline.solve_separate(inst, baseline.powermin_settings(points=20))
        excess = (joint.objective - sen.objective) / sen.objective
        rows.append((r0, joint.objective, sep.objective))
        print(f"{r0:>12.1f} {joint.objective:>10.4f} {sep.objective:>11.4f} "
              f"{100 * excess:>12.1f}%")

    print()
    print("The joint design tracks the sensing floor at low rates and degrades")
    print("gracefully; the two-stage benchmark pays for its fixed information")
    print("beam at every rate.")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    out = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out, exist_ok=True)
    arr = np.asarray(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(arr[:, 0], arr[:, 1], "o-", label="joint design")
    ax.plot(arr[:, 0], arr[:, 2], "s-", label="separate benchmark")
    ax.axhline(sen.objective, color="gray", ls="--", label="sensing-only floor")
    ax.set_xlabel("secrecy rate floor R0 (bps/Hz)")
    ax.set_ylabel("beampattern matching error D")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(out, "rate_sensing_tradeoff.png")
    fig.savefig(path, dpi=120)
    print(f"saved {path}")


if __name__ == "__main__":
    main()
