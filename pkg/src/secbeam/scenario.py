"""Scenario files: JSON descriptions of a system, secrecy mode, and run plan.

A scenario document has five sections (system, geometry, sensing, secrecy,
run), every key optional except secrecy.mode and secrecy.r0.  Angles are
degrees and powers are dBm/Watt at this boundary; channels follow the
attenuation conventions g = sqrt(10^(-alpha/10)) a(theta_cu) and
h_hat_k = sqrt(10^(-phi/10)) a(theta_k) (scaled by the LoS fraction
sqrt(K_R/(K_R+1)) in gaussian mode, with error covariance
10^(-phi/10)/(K_R+1) I).  Unknown keys anywhere are rejected.
"""

import json
import math

import numpy as np

from . import model, outage, worstcase

MODES = ("perfect", "bounded", "gaussian")


class ScenarioError(ValueError):
    """A scenario file that does not parse or validate; message names the key."""


def _require(cond, where, msg):
    if not cond:
        raise ScenarioError(f"{where}: {msg}")


def _section(doc, name, known):
    sec = doc.get(name, {})
    _require(isinstance(sec, dict), name, "must be an object")
    for key in sec:
        if key not in known:
            raise ScenarioError(f"{name}.{key}: unknown key (known: {', '.join(sorted(known))})")
    return sec


def _number(sec, name, key, default=None, lo=None, hi=None, required=False):
    if key not in sec:
        if required:
            raise ScenarioError(f"{name}.{key}: required")
        return default
    v = sec[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{name}.{key}",
             "must be a number")
    v = float(v)
    _require(math.isfinite(v), f"{name}.{key}", "must be finite")
    if lo is not None:
        _require(v >= lo, f"{name}.{key}", f"must be >= {lo}")
    if hi is not None:
        _require(v <= hi, f"{name}.{key}", f"must be <= {hi}")
    return v


def _integer(sec, name, key, default, lo=1):
    v = _number(sec, name, key, default=default, lo=lo)
    _require(float(v).is_integer(), f"{name}.{key}", "must be an integer")
    return int(v)


def _number_list(sec, name, key, default):
    if key not in sec:
        return list(default)
    v = sec[key]
    _require(isinstance(v, list) and len(v) >= 1, f"{name}.{key}", "must be a nonempty list")
    out = []
    for i, item in enumerate(v):
        _require(isinstance(item, (int, float)) and not isinstance(item, bool),
                 f"{name}.{key}[{i}]", "must be a number")
        out.append(float(item))
    return out


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_gain(db):
    return 10.0 ** (-db / 10.0)


class Scenario:
    """A parsed scenario: config/spec builders plus the run plan."""

    def __init__(self, doc):
        _require(isinstance(doc, dict), "scenario", "top level must be an object")
        for key in doc:
            if key not in ("system", "geometry", "sensing", "secrecy", "run"):
                raise ScenarioError(f"{key}: unknown section")
        system = _section(doc, "system", {
            "n", "q_per_antenna_watt", "q_total_watt", "spacing_ratio",
            "noise_dbm", "cu_attenuation_db", "eve_attenuation_db"})
        geometry = _section(doc, "geometry", {"cu_angle_deg", "target_angles_deg", "k_eve"})
        sensing_sec = _section(doc, "sensing", {"m", "delta_theta_deg", "omega_c"})
        secrecy = _section(doc, "secrecy", {
            "mode", "r0", "epsilon_fraction", "rho", "rician_k"})
        run = _section(doc, "run", {
            "gamma_grid", "seed", "seeds", "mc_samples", "capon_grid",
            "block_length", "snr_db"})

        self.n = _integer(system, "system", "n", 8, lo=2)
        _require(not ("q_per_antenna_watt" in system and "q_total_watt" in system),
                 "system", "give q_per_antenna_watt or q_total_watt, not both")
        if "q_per_antenna_watt" in system:
            self.q = _number(system, "system", "q_per_antenna_watt", lo=1e-12)
        else:
            self.q = _number(system, "system", "q_total_watt", default=1.0, lo=1e-12) / self.n
        self.spacing_ratio = _number(system, "system", "spacing_ratio", 0.5, lo=1e-6)
        self.noise_dbm = _number(system, "system", "noise_dbm", -50.0)
        self.cu_attenuation_db = _number(system, "system", "cu_attenuation_db", 70.0)
        self.eve_attenuation_db = _number(system, "system", "eve_attenuation_db", 30.0)

        self.cu_angle_deg = _number(geometry, "geometry", "cu_angle_deg", 0.0, lo=-90.0, hi=90.0)
        self.target_angles_deg = _number_list(
            geometry, "geometry", "target_angles_deg", (-15.0, 15.0, -45.0, 45.0))
        for i, t in enumerate(self.target_angles_deg):
            _require(-90.0 <= t <= 90.0, f"geometry.target_angles_deg[{i}]",
                     "must lie in [-90, 90]")
        self.k_eve = _integer(geometry, "geometry", "k_eve", 2, lo=0)
        _require(self.k_eve <= len(self.target_angles_deg), "geometry.k_eve",
                 "cannot exceed the number of targets")

        self.m = _integer(sensing_sec, "sensing", "m", 500, lo=1)
        self.delta_theta_deg = _number(sensing_sec, "sensing", "delta_theta_deg", 10.0, lo=1e-6)
        self.omega_c = _number(sensing_sec, "sensing", "omega_c", 1.0, lo=0.0)

        mode = secrecy.get("mode")
        _require(mode in MODES, "secrecy.mode", f"must be one of {', '.join(MODES)}")
        self.mode = mode
        self.r0 = _number(secrecy, "secrecy", "r0", lo=0.0, required=True)
        self.epsilon_fraction = _number(secrecy, "secrecy", "epsilon_fraction", 0.0, lo=0.0)
        if mode != "bounded":
            _require(self.epsilon_fraction == 0.0, "secrecy.epsilon_fraction",
                     "only the bounded mode takes an error fraction")
        if mode == "gaussian":
            self.rho = _number(secrecy, "secrecy", "rho", required=True)
            _require(0.0 < self.rho < 1.0, "secrecy.rho", "must lie in (0, 1)")
            self.rician_k = _number(secrecy, "secrecy", "rician_k", 10.0, lo=0.0)
        else:
            _require("rho" not in secrecy, "secrecy.rho", "only the gaussian mode takes rho")
            _require("rician_k" not in secrecy, "secrecy.rician_k",
                     "only the gaussian mode takes a Rician factor")
            self.rho = None
            self.rician_k = None

        self.gamma_grid = _integer(run, "run", "gamma_grid", 100, lo=2)
        self.seed = _integer(run, "run", "seed", 0, lo=0)
        self.seeds = _integer(run, "run", "seeds", 100, lo=1)
        self.mc_samples = _integer(run, "run", "mc_samples", 100000, lo=1)
        self.capon_grid = _integer(run, "run", "capon_grid", 1000, lo=16)
        self.block_length = _integer(run, "run", "block_length", 256, lo=2)
        self.snr_db = _number_list(run, "run", "snr_db", (-10.0, 0.0, 10.0, 20.0))

        self.raw = doc

    def config(self, cu_angle_deg=None):
        """SystemConfig at the scenario's CU angle (or an override for sweeps)."""
        theta_deg = self.cu_angle_deg if cu_angle_deg is None else float(cu_angle_deg)
        theta = np.deg2rad(theta_deg)
        targets = np.deg2rad(np.asarray(self.target_angles_deg, dtype=float))
        g = np.sqrt(db_to_gain(self.cu_attenuation_db)) * model.steering(
            theta, self.n, self.spacing_ratio)
        amp = np.sqrt(db_to_gain(self.eve_attenuation_db))
        if self.mode == "gaussian":
            amp = amp * np.sqrt(self.rician_k / (self.rician_k + 1.0))
        if self.k_eve:
            h_hat = np.stack([amp * model.steering(t, self.n, self.spacing_ratio)
                              for t in targets[:self.k_eve]])
        else:
            h_hat = np.zeros((0, self.n), dtype=complex)
        noise = dbm_to_watt(self.noise_dbm)
        return model.SystemConfig(
            n=self.n, q=self.q, theta_cu=theta, target_angles=targets,
            k_eve=self.k_eve, g=g, h_hat=h_hat, sigma0_sq=noise,
            sigma_eve_sq=np.full(self.k_eve, noise), spacing_ratio=self.spacing_ratio)

    def sensing_spec(self):
        return model.SensingSpec.uniform(
            self.m, np.deg2rad(self.delta_theta_deg), self.omega_c)

    def instance(self, cu_angle_deg=None, r0=None, rho=None):
        """The design instance for the scenario's mode, with sweep overrides."""
        cfg = self.config(cu_angle_deg)
        spec = self.sensing_spec()
        r0 = self.r0 if r0 is None else float(r0)
        if self.mode == "gaussian":
            rho = self.rho if rho is None else float(rho)
            delta_sq = db_to_gain(self.eve_attenuation_db) / (self.rician_k + 1.0)
            return outage.OutageInstance.isotropic(cfg, spec, r0, rho, delta_sq)
        eps = np.zeros(cfg.k_eve)
        if self.mode == "bounded":
            eps = self.epsilon_fraction * np.linalg.norm(cfg.h_hat, axis=1)
        return worstcase.WorstCaseInstance(cfg, spec, r0, eps)


def load(path):
    """Parse a scenario file; raises ScenarioError with key/line diagnostics."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"{path}: no such file")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    try:
        return Scenario(doc)
    except ScenarioError as e:
        raise ScenarioError(f"{path}: {e}") from None
