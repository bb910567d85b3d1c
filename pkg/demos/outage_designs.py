"""
Outage-constrained secrecy under Gaussian channel errors
========================================================

When only a Rician channel estimate is available for each untrusted target,
the secrecy constraint can only be enforced statistically: the design caps
the probability that the realized channels push the secrecy rate below R0.
The chance constraint is handled by a Bernstein-type tail bound, which is
conservative by construction, so the Monte-Carlo outage of the shipped
design should land well below the budget rho.

This script designs at a few outage budgets, then stress-tests each design
with fresh channel draws.
"""

from secbeam import outage, scenario, search

DOC = {
    "system": {"n": 8, "q_total_watt": 1.0},
    "geometry": {"cu_angle_deg": 0.0,
                 "target_angles_deg": [-15.0, 15.0, -45.0, 45.0],
                 "k_eve": 2},
    "sensing": {"m": 150},
    "secrecy": {"mode": "gaussian", "r0": 2.5, "rho": 0.1, "rician_k": 10.0},
}

BUDGETS = (0.1, 0.15, 0.2)
SAMPLES = 50000


def main():
    scn = scenario.Scenario(DOC)
    print(f"Rician factor {scn.rician_k:.0f}: the estimate carries "
          f"{scn.rician_k / (scn.rician_k + 1):.0%} of the eavesdropper channel power,")
    print("the rest is the Gaussian error the design must absorb.")
    print()
    print(f"{'rho budget':>10} {'D':>9} {'MC outage':>10} {'99% CI':>9}")

    stt = search.design_settings(points=20)
    for rho in BUDGETS:
        inst = scn.instance(rho=rho)
        des = outage.solve_p2(inst, stt)
        if des.status != "optimal":
            print(f"{rho:>10.2f} {des.status:>9}")
            continue
        est = outage.empirical_outage(des.W, des.S, inst, samples=SAMPLES, seed=0)
        print(f"{rho:>10.2f} {des.objective:>9.4f} {est.p_hat:>10.4f} "
              f"{est.ci99:>9.4f}")

    print()
    print("A looser outage budget buys a smaller matching error, and every")
    print("empirical outage sits below its budget: the tail bound's slack is")
    print("the price of a hard guarantee from finite statistics.")


if __name__ == "__main__":
    main()
