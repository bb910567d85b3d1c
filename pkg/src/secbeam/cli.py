"""Scenario-driven experiment runner.

Subcommands: solve-p1 (bounded/perfect designs), solve-p2 (gaussian outage
designs), baseline (two-stage separate design), sweep r0|theta0|rho|snr,
capon (RMSE vs SNR for the three designs), validate (re-check a saved
design.json).  Every run reads one scenario file and writes CSV data plus a
report.txt under --out; identical scenario and seed give byte-identical
CSVs.  Infeasible designs are reported with status rows and a zero exit so
sweeps never abort; scenario errors exit nonzero with the offending key.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import baseline, model, outage, scenario, search, sensing, worstcase


def _fmt(x):
    if x is None:
        return ""
    x = float(x)
    return format(x, ".12g") if np.isfinite(x) else ""


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _search_settings(scn, args):
    return search.design_settings(points=args.gamma_grid or scn.gamma_grid,
                                  workers=args.threads)


def _powermin_settings(scn, args):
    return baseline.powermin_settings(points=args.gamma_grid or scn.gamma_grid,
                                      workers=args.threads)


def _solve_joint(scn, inst, settings):
    if scn.mode == "gaussian":
        return outage.solve_p2(inst, settings)
    return worstcase.solve_p1(inst, settings)


def _mat_json(A):
    A = np.asarray(A, dtype=complex)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


def _mat_load(obj):
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def _beampattern_rows(spec, W, S, spacing_ratio):
    angles = np.degrees(spec.sample_angles)
    total = model.beampattern_gain(W + S, spec.sample_angles, spacing_ratio)
    info = model.beampattern_gain(W, spec.sample_angles, spacing_ratio)
    sens = model.beampattern_gain(S, spec.sample_angles, spacing_ratio)
    return [(a, t, i, s) for a, t, i, s in zip(angles, total, info, sens)]


def _verification(scn, inst, des, seed, mc_samples):
    """Mode-appropriate secrecy check on a solved design; None when not solved."""
    if des.status != "optimal":
        return None
    cfg = inst.config
    out = {"rate_bps_hz": model.secrecy_rate(
        des.W, des.S, cfg.g, list(cfg.h_hat), cfg.sigma0_sq, cfg.sigma_eve_sq)}
    if scn.mode == "gaussian":
        est = outage.empirical_outage(des.W, des.S, inst, samples=mc_samples, seed=seed)
        out["outage"] = {"p_hat": est.p_hat, "ci99": est.ci99,
                         "samples": est.samples, "seed": est.seed, "rho": inst.rho}
    else:
        check = worstcase.verify_worst_case(des.W, des.S, des.gamma, inst)
        out["worst_case"] = {"all_ok": check.all_ok,
                             "min_margin": float(np.min(check.margins)) if cfg.k_eve else 0.0}
    return out


def _report_lines(scn, des, verification, elapsed, extra=()):
    lines = ["design report", "=============", ""]
    lines += list(extra)
    lines.append(f"status: {des.status}")
    lines.append(f"objective D (beampattern error): {_fmt(des.objective) or 'n/a'}")
    lines.append(f"gamma* (CU SINR target): {_fmt(des.gamma) or 'n/a'}")
    lines.append(f"eta (pattern scale): {_fmt(des.eta) or 'n/a'}")
    if verification is None:
        lines.append("verification: skipped (design not solved)")
    else:
        lines.append(f"nominal secrecy rate (bps/Hz): {_fmt(verification['rate_bps_hz'])}")
        if "outage" in verification:
            o = verification["outage"]
            lines.append(
                "empirical outage: {} +- {} ({} samples, seed {}, budget rho {})".format(
                    _fmt(o["p_hat"]), _fmt(o["ci99"]), o["samples"], o["seed"], _fmt(o["rho"])))
        if "worst_case" in verification:
            w = verification["worst_case"]
            lines.append(f"worst-case LMI check: {'pass' if w['all_ok'] else 'FAIL'}"
                         f" (min margin {w['min_margin']:.3e})")
    lines.append(f"elapsed: {elapsed:.1f} s")
    lines += ["", "scenario", "--------", json.dumps(scn.raw, indent=2, sort_keys=True)]
    return lines


def _emit_design(out_dir, scn, inst, des, elapsed, seed, extra_json=None, extra_report=()):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = inst.config
    n = cfg.n
    W = des.W if des.W is not None else np.zeros((n, n), dtype=complex)
    S = des.S if des.S is not None else np.zeros((n, n), dtype=complex)
    _write_csv(out / "beampattern.csv",
               ("angle_deg", "total_watt", "info_watt", "sensing_watt"),
               _beampattern_rows(inst.spec, W, S, cfg.spacing_ratio))
    verification = _verification(scn, inst, des, seed, scn.mc_samples)
    doc = {
        "mode": scn.mode,
        "r0_bps_hz": inst.r0,
        "status": des.status,
        "objective": None if not np.isfinite(des.objective) else des.objective,
        "gamma": None if des.gamma is None or not np.isfinite(des.gamma) else des.gamma,
        "eta": None if not np.isfinite(des.eta) else des.eta,
        "seed": seed,
        "W": _mat_json(W),
        "S": _mat_json(S),
        "verification": verification,
        "scenario": scn.raw,
    }
    if scn.mode == "gaussian":
        doc["rho"] = inst.rho
    if extra_json:
        doc.update(extra_json)
    (out / "design.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    report = _report_lines(scn, des, verification, elapsed, extra_report)
    (out / "report.txt").write_text("\n".join(report) + "\n")
    print(f"{des.status}: D={_fmt(des.objective) or 'inf'} -> {out}")


def cmd_solve_p1(args):
    scn = scenario.load(args.scenario)
    if scn.mode == "gaussian":
        raise scenario.ScenarioError("solve-p1 runs perfect/bounded scenarios; use solve-p2")
    inst = scn.instance()
    t0 = time.time()
    des = worstcase.solve_p1(inst, _search_settings(scn, args))
    _emit_design(args.out, scn, inst, des, time.time() - t0, _seed(scn, args))
    return 0


def cmd_solve_p2(args):
    scn = scenario.load(args.scenario)
    if scn.mode != "gaussian":
        raise scenario.ScenarioError("solve-p2 runs gaussian scenarios; use solve-p1")
    inst = scn.instance()
    t0 = time.time()
    des = outage.solve_p2(inst, _search_settings(scn, args))
    _emit_design(args.out, scn, inst, des, time.time() - t0, _seed(scn, args))
    return 0


def cmd_baseline(args):
    scn = scenario.load(args.scenario)
    inst = scn.instance()
    t0 = time.time()
    sep = baseline.solve_separate(inst, _powermin_settings(scn, args))
    des = model.Design(W=sep.W_bar, S=sep.S_bar, eta=sep.eta, gamma=sep.gamma,
                       rank_one=True, status=sep.status, objective=sep.objective,
                       info=sep.info)
    _emit_design(args.out, scn, inst, des, time.time() - t0, _seed(scn, args),
                 extra_json={"design": "separate"},
                 extra_report=("design: two-stage separate benchmark",))
    return 0


_SWEEP_AXES = ("r0", "theta0", "rho", "snr")


def _sweep_values(axis, scn, args):
    if args.values:
        return [float(v) for v in args.values.split(",")]
    if axis == "r0":
        return [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    if axis == "theta0":
        return [float(v) for v in np.arange(-90, 91, 3)]
    if axis == "rho":
        return [0.1, 0.15, 0.2]
    return list(scn.snr_db)


def cmd_sweep(args):
    scn = scenario.load(args.scenario)
    if args.axis == "rho" and scn.mode != "gaussian":
        raise scenario.ScenarioError("sweep rho needs a gaussian scenario")
    if args.axis == "snr":
        return _run_capon(scn, args, csv_name="sweep.csv")
    values = _sweep_values(args.axis, scn, args)
    settings = _search_settings(scn, args)
    pm_settings = _powermin_settings(scn, args)
    base_cfg = scn.config()
    spec = scn.sensing_spec()
    sen = worstcase.solve_sensing_only(base_cfg, spec)
    d_sen = sen.objective
    rows = []
    t0 = time.time()
    for x in values:
        kw = {"r0": x} if args.axis == "r0" else (
            {"cu_angle_deg": x} if args.axis == "theta0" else {"rho": x})
        inst = scn.instance(**kw)
        joint = _solve_joint(scn, inst, settings)
        sep = baseline.solve_separate(inst, pm_settings)
        rows.append((x, joint.objective, sep.objective, d_sen, joint.status))
        print(f"{args.axis}={_fmt(x)}: joint {joint.status} D={_fmt(joint.objective) or 'inf'}"
              f", separate {sep.status} D={_fmt(sep.objective) or 'inf'}", flush=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    x_name = {"r0": "r0_bps_hz", "theta0": "theta0_deg", "rho": "rho"}[args.axis]
    _write_csv(out / "sweep.csv", (x_name, "d_opt", "d_sep", "d_sensing_only", "status"), rows)
    lines = [f"sweep over {args.axis}", "=" * (11 + len(args.axis)), "",
             f"points: {len(values)}",
             f"sensing-only bound D: {_fmt(d_sen)}",
             f"elapsed: {time.time() - t0:.1f} s", "", "scenario", "--------",
             json.dumps(scn.raw, indent=2, sort_keys=True)]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def _rmse_mean(W, S, cfg, snr_db, base_seed, trials, length, grid_size):
    vals = []
    for i in range(trials):
        scene = sensing.scene_from_snr(cfg.target_angles, snr_db, cfg, seed=base_seed + i)
        vals.append(sensing.estimation_rmse(W, S, scene, seed=base_seed + i,
                                            length=length, grid_size=grid_size,
                                            spacing_ratio=cfg.spacing_ratio))
    return float(np.mean(vals))


def _run_capon(scn, args, csv_name="rmse.csv"):
    inst = scn.instance()
    cfg = inst.config
    spec = scn.sensing_spec()
    seed = _seed(scn, args)
    t0 = time.time()
    joint = _solve_joint(scn, inst, _search_settings(scn, args))
    sep = baseline.solve_separate(inst, _powermin_settings(scn, args))
    sen = worstcase.solve_sensing_only(cfg, spec)
    designs = {
        "opt": (joint.W, joint.S) if joint.status == "optimal" else None,
        "sep": (sep.W_bar, sep.S_bar) if sep.status == "optimal" else None,
        "sensing_only": (sen.W, sen.S) if sen.status == "optimal" else None,
    }
    rows = []
    for snr in scn.snr_db:
        row = [snr]
        for name in ("opt", "sep", "sensing_only"):
            pair = designs[name]
            row.append(None if pair is None else _rmse_mean(
                pair[0], pair[1], cfg, snr, seed, scn.seeds,
                scn.block_length, scn.capon_grid))
        rows.append(tuple(row))
        print(f"snr {_fmt(snr)} dB: " + ", ".join(
            f"{n}={_fmt(r) or 'n/a'}" for n, r in zip(("opt", "sep", "sen"), row[1:])),
            flush=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / csv_name,
               ("snr_db", "rmse_opt_deg", "rmse_sep_deg", "rmse_sensing_only_deg"), rows)
    lines = ["capon RMSE vs received sensing SNR",
             "==================================", "",
             f"trials per point: {scn.seeds} (seeds {seed}..{seed + scn.seeds - 1})",
             f"block length L: {scn.block_length}, grid: {scn.capon_grid}",
             "received SNR convention: |beta|^2 * N * (N q) / sigma_z^2",
             f"designs: opt {joint.status} (D={_fmt(joint.objective) or 'inf'}), "
             f"separate {sep.status} (D={_fmt(sep.objective) or 'inf'}), "
             f"sensing-only {sen.status} (D={_fmt(sen.objective)})",
             f"elapsed: {time.time() - t0:.1f} s", "", "scenario", "--------",
             json.dumps(scn.raw, indent=2, sort_keys=True)]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / csv_name}")
    return 0


def cmd_capon(args):
    return _run_capon(scenario.load(args.scenario), args)


def cmd_validate(args):
    path = Path(args.design)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise scenario.ScenarioError(f"{path}: no such file")
    except json.JSONDecodeError as e:
        raise scenario.ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    scn = scenario.Scenario(doc["scenario"])
    inst = scn.instance(r0=doc["r0_bps_hz"], rho=doc.get("rho"))
    cfg = inst.config
    failures = []
    checks = []
    if doc["status"] != "optimal":
        checks.append(f"status is {doc['status']}; nothing to re-check")
    else:
        W, S = _mat_load(doc["W"]), _mat_load(doc["S"])
        diag_err = float(np.max(np.abs(np.real(np.diag(W + S)) - cfg.q)))
        checks.append(f"per-antenna power residual: {diag_err:.3e}")
        if diag_err > 1e-6 * cfg.q:
            failures.append("per-antenna power constraint violated")
        rate = model.secrecy_rate(W, S, cfg.g, list(cfg.h_hat),
                                  cfg.sigma0_sq, cfg.sigma_eve_sq)
        checks.append(f"nominal secrecy rate: {rate:.6f} bps/Hz (target {inst.r0})")
        if rate < inst.r0 - 1e-3:
            failures.append("nominal secrecy rate below target")
        stored = (doc.get("verification") or {})
        if scn.mode == "gaussian":
            o = stored.get("outage") or {}
            est = outage.empirical_outage(W, S, inst, samples=o.get("samples", scn.mc_samples),
                                          seed=o.get("seed", doc["seed"]))
            checks.append(f"empirical outage: {est.p_hat} (stored {o.get('p_hat')})")
            if "p_hat" in o:
                sigma = max(np.sqrt(o["p_hat"] * (1 - o["p_hat"]) / o["samples"]), 1e-12)
                if est.p_hat != o["p_hat"] and abs(est.p_hat - o["p_hat"]) > 3 * sigma:
                    failures.append("outage estimate does not reproduce under the stored seed")
                elif est.p_hat != o["p_hat"]:
                    failures.append("outage estimate not bit-identical under the stored seed")
            if est.p_hat > inst.rho:
                failures.append("empirical outage exceeds the budget rho")
        else:
            check = worstcase.verify_worst_case(W, S, doc["gamma"], inst)
            checks.append(f"worst-case LMI margins ok: {check.all_ok}")
            if not check.all_ok:
                failures.append("worst-case secrecy LMI fails for some eavesdropper")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    verdict = "PASS" if not failures else "FAIL"
    lines = [f"validate {path}", "", *checks, "",
             *(f"failure: {f}" for f in failures), f"verdict: {verdict}"]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print(f"{verdict}: {path}" + ("" if not failures else " (" + "; ".join(failures) + ")"))
    return 0 if not failures else 1


def _seed(scn, args):
    return scn.seed if args.seed is None else args.seed


def _add_common(p, scenario_required=True):
    if scenario_required:
        p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario's base seed")
    p.add_argument("--gamma-grid", type=int, default=None,
                   help="override the gamma grid point count")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for grid searches")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="secbeam",
        description="Secure ISAC transmit beamforming designs and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-p1", help="bounded/perfect-CSI joint design")
    _add_common(p)
    p.set_defaults(func=cmd_solve_p1)

    p = sub.add_parser("solve-p2", help="gaussian-error outage-constrained joint design")
    _add_common(p)
    p.set_defaults(func=cmd_solve_p2)

    p = sub.add_parser("baseline", help="two-stage separate design benchmark")
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="sweep one axis and tabulate objectives")
    p.add_argument("axis", choices=_SWEEP_AXES)
    p.add_argument("--values", default=None, help="comma-separated sweep values")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("capon", help="RMSE vs sensing SNR for the three designs")
    _add_common(p)
    p.set_defaults(func=cmd_capon)

    p = sub.add_parser("validate", help="re-check a saved design.json")
    p.add_argument("--design", required=True, help="design.json produced by a solve run")
    _add_common(p, scenario_required=False)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except scenario.ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
