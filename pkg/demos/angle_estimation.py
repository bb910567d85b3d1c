"""
Estimating target angles from the secure transmit waveform
==========================================================

The sensing side of the design is judged in the end by what a receiver can
estimate from the actual echoes.  This script transmits a block shaped by
the secrecy-constrained covariance, collects echoes from the four targets,
scans the Capon spatial spectrum, and reads the angle estimates off its
peaks.  A short Monte-Carlo pass then compares estimation error across the
three designs as the echo SNR grows.
"""

import os

import numpy as np

from secbeam import baseline, scenario, search, sensing, worstcase

DOC = {
    "system": {"n": 8, "q_total_watt": 1.0},
    "geometry": {"cu_angle_deg": 3.0,
                 "target_angles_deg": [-15.0, 15.0, -45.0, 45.0],
                 "k_eve": 2},
    "sensing": {"m": 150},
    "secrecy": {"mode": "perfect", "r0": 4.0},
}

SNRS = (0.0, 10.0, 20.0)
TRIALS = 25


def main():
    scn = scenario.Scenario(DOC)
    cfg = scn.config()
    spec = scn.sensing_spec()
    inst = scn.instance()

    stt = search.design_settings(points=20)
    joint = worstcase.solve_p1(inst, stt)
    sep = baseline.solve_separate(inst, baseline.powermin_settings(points=20))
    sen = worstcase.solve_sensing_only(cfg, spec)
    designs = {"joint": (joint.W, joint.S), "separate": (sep.W, sep.S),
               "sensing-only": (sen.W, sen.S)}

    # one look at the spectrum: a 256-symbol block at 10 dB echo SNR
    scene = sensing.scene_from_snr(cfg.target_angles, 10.0, cfg, seed=7)
    block = sensing.generate_transmit(joint.W, joint.S, length=256, seed=7)
    block = sensing.simulate_echo(block, scene, seed=7)
    spectrum = sensing.capon_spectrum(block)
    est = sensing.estimate_angles(spectrum, scene.k)
    print("truth (deg): ", ", ".join(f"{np.degrees(t):+7.2f}" for t in sorted(scene.angles)))
    print("capon (deg): ", ", ".join(f"{np.degrees(t):+7.2f}" for t in sorted(est)))
    print(f"per-look RMSE: {sensing.rmse(est, scene.angles):.3f} deg")
    print()

    print(f"{'design':>12} " + " ".join(f"{s:>9.0f} dB" for s in SNRS) + "   (RMSE, deg)")
    for name, (W, S) in designs.items():
        means = []
        for snr in SNRS:
            vals = [sensing.estimation_rmse(
                W, S, sensing.scene_from_snr(cfg.target_angles, snr, cfg, seed=s), seed=s)
                for s in range(TRIALS)]
            means.append(float(np.mean(vals)))
        print(f"{name:>12} " + " ".join(f"{m:>12.4f}" for m in means))

    print()
    print("All three covariances localize the targets; the joint design gives")
    print("up a little accuracy for the secrecy constraint, the separate")
    print("benchmark a little more.")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    out = os.path.join(os.path.dirname(__file__), "out")
    os.makedirs(out, exist_ok=True)
    angles, values = spectrum
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(np.degrees(angles), 10 * np.log10(values / np.max(values)))
    for t in scene.angles:
        ax.axvline(np.degrees(t), color="gray", ls=":", lw=0.8)
    ax.set_xlabel("angle (deg)")
    ax.set_ylabel("Capon spectrum (dB)")
    ax.set_ylim(-50, 2)
    fig.tight_layout()
    path = os.path.join(out, "capon_spectrum.png")
    fig.savefig(path, dpi=120)
    print(f"saved {path}")


if __name__ == "__main__":
    main()
