"""Reproducible experiment runner.

Each subcommand maps one family of quantitative claims onto a deterministic
computation with a JSON config, and emits manifest.json, records.csv,
records.json and SVG figures into the output directory.

Exit codes: 0 all assertions pass; 2 assertion failures; 3 configuration
errors; 4 numerical aborts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import hyperbolic_spectral as hyp
from . import norm_engine as ne
from . import scans
from . import sphere_spectral as sph
from .svgplot import line_plot_svg
from .windows import default_windows

__all__ = ["main", "ConfigError", "RunManifest", "load_config", "COMMANDS"]

ENV_OUT = "CURVLENS_OUT"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class RunManifest:
    experiment: str
    config: dict
    config_hash: str
    package_version: str
    stage_seconds: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def as_dict(self):
        return {
            "experiment": self.experiment,
            "config": self.config,
            "config_hash": self.config_hash,
            "package_version": self.package_version,
            "stage_seconds": self.stage_seconds,
            "assertions": [a.as_dict() for a in self.assertions],
            "skipped": self.skipped,
            "passed": all(a.passed for a in self.assertions),
        }


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _validate_pairs(config: dict) -> None:
    n = config["dimension"]
    allow_closed = config.get("allow_closed_segment", False)
    for pair in config.get("exponent_pairs", []):
        spec = ne.MixedNormSpec(float(pair[0]), float(pair[1]))
        if spec.admissible(n):
            continue
        if allow_closed and spec.on_closed_segment(n):
            continue
        raise ConfigError(
            f"exponent pair ({pair[0]}, {pair[1]}) is not admissible at n={n}: "
            f"need n(1/r - 1/s) = 2 and min(|1/r - 1/2|, |1/s - 1/2|) > 1/(2n)"
            + ("" if not allow_closed else ", nor on the closed scaling segment"))


def load_config(command: str, path: str | None, seed: int | None = None,
                workers: int | None = None) -> dict:
    if command not in COMMANDS:
        raise ConfigError(f"unknown experiment {command!r}")
    config = json.loads(json.dumps(COMMANDS[command]["defaults"]))  # deep copy
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - set(config)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        config.update(user)
    if seed is not None:
        config["seed"] = seed
    if workers is not None:
        config["workers"] = workers
    _validate_pairs(config)
    return config


class _Stages:
    """Timing + assertion recorder shared by all runners."""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest
        self._t0 = None
        self._name = None

    def start(self, name: str):
        self._name, self._t0 = name, time.perf_counter()

    def stop(self):
        self.manifest.stage_seconds[self._name] = round(time.perf_counter() - self._t0, 3)

    def check(self, name: str, passed: bool, detail: str):
        self.manifest.assertions.append(Assertion(name, bool(passed), detail))

    def skip(self, name: str, reason: str):
        self.manifest.skipped.append({"stage": name, "reason": reason})


def _write_records(outdir: str, records: list) -> None:
    path_json = os.path.join(outdir, "records.json")
    with open(path_json, "w") as fh:
        json.dump(scans._jsonable(records), fh, indent=1)
    keys: list = []
    for row in records:
        for k in row:
            if k not in keys:
                keys.append(k)
    import csv as _csv
    with open(os.path.join(outdir, "records.csv"), "w", newline="") as fh:
        writer = _csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in records:
            writer.writerow({k: scans._csv_cell(row.get(k)) for k in keys})


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def cmd_sphere_projector(config: dict, outdir: str, st: _Stages) -> list:
    ctx = sph.SphereContext(config["dimension"], config["curvature"])
    tol = config["tolerances"]
    records = []

    st.start("algebra")
    rep = sph.projector_algebra_report(ctx, config["degrees_algebra"],
                                       config["resolution"])
    st.stop()
    st.check("projector-trace", rep["max_trace_rel_err"] <= tol["trace"],
             f"max trace rel err {rep['max_trace_rel_err']:.2e}")
    st.check("projector-orthogonality",
             rep["max_orthogonality_dev"] <= tol["orthogonality"],
             f"max pairwise deviation {rep['max_orthogonality_dev']:.2e}")

    st.start("parity")
    cosd = np.linspace(-0.99, 0.99, 113)
    worst = 0.0
    for k in range(0, config["degrees_algebra"] + 1):
        scale = sph.harmonic_dim(ctx, k) / ctx.omega
        res = np.max(np.abs(sph.zonal_projector(ctx, k, -cosd)
                            - (-1.0) ** k * sph.zonal_projector(ctx, k, cosd))) / scale
        worst = max(worst, float(res))
    st.stop()
    st.check("projector-parity", worst <= tol["parity"], f"max parity residual {worst:.2e}")

    st.start("sup_growth")
    sup_pairs = [(k, sph.harmonic_dim(ctx, k) / ctx.omega)
                 for k in config["sup_degrees"]]
    sup_fit = ne.slope_fit(sup_pairs)
    st.stop()
    lo, width = tol["sup_slope"]
    st.check("sup-growth-slope", abs(sup_fit.slope - lo) <= width,
             f"slope {sup_fit.slope:.4f} target {lo} +- {width}")
    records += [{"stage": "sup", "k": k, "value": v} for k, v in sup_pairs]

    st.start("asymptotics")
    k_asym = config["asymptotics_degree"]
    if k_asym < 16:
        st.stop()
        st.skip("asymptotics", "k below asymptotic threshold")
    else:
        arep = sph.projector_asymptotics_check(ctx, k_asym)
        st.stop()
        st.check("asymptotics-residual", arep.residual_max <= tol["asymptotics_residual"],
                 f"max reconstruction residual {arep.residual_max:.2e}")
        st.check("antipodal-identity", arep.antipodal_residual <= tol["antipodal"],
                 f"antipodal residual {arep.antipodal_residual:.2e}")
        with open(os.path.join(outdir, "asymptotics.json"), "w") as fh:
            fh.write(arep.to_json())

    st.start("norm_growth")
    spec = ne.MixedNormSpec(*config["exponent_pairs"][0])
    norm_pairs = []
    for k in config["norm_degrees"]:
        coeffs = np.zeros(k + 1, dtype=complex)
        coeffs[k] = 1.0
        op = ne.zonal_reduce_multiplier(ctx, coeffs, m_nodes=config["zonal_nodes"])
        est = ne.mixed_norm_power_iterate(op, spec, restarts=2, seed=config["seed"])
        norm_pairs.append((1 + k, est.value))
        records.append({"stage": "norm", "k": k, "value": est.value,
                        "iterations": est.iterations})
    norm_fit = ne.slope_fit(norm_pairs)
    st.stop()
    lo, width = tol["norm_slope"]
    st.check("projector-norm-slope", abs(norm_fit.slope - lo) <= width,
             f"slope {norm_fit.slope:.4f} target {lo} +- {width}")

    line_plot_svg(os.path.join(outdir, "growth.svg"),
                  [("sup |H_k|", [p[0] for p in sup_pairs], [p[1] for p in sup_pairs]),
                   ("norm estimate", [p[0] for p in norm_pairs],
                    [p[1] for p in norm_pairs])],
                  title="projector growth", xlabel="degree", ylabel="value",
                  logx=True, logy=True)
    return records


def cmd_sphere_resolvent(config: dict, outdir: str, st: _Stages) -> list:
    ctx = sph.SphereContext(config["dimension"], config["curvature"])
    tol = config["tolerances"]
    records = []

    st.start("uniformity")
    rep = scans.resolvent_uniformity_scan(
        ctx, sigmas=config["boundary_sigmas"],
        spec=ne.MixedNormSpec(*config["exponent_pairs"][0]),
        m_nodes=config["zonal_nodes"], seed=config["seed"],
        workers=config["workers"])
    st.stop()
    st.check("boundary-uniformity", rep.notes["boundary_ratio"] <= tol["boundary_ratio"],
             f"max/min ratio {rep.notes['boundary_ratio']:.3f}")
    st.check("pole-blowup", rep.notes["pole_contrast"] >= tol["pole_contrast"],
             f"pole/boundary contrast {rep.notes['pole_contrast']:.1f}")
    st.check("interior-no-blowup", rep.notes["interior_vs_boundary"] <= 1.0 + 1e-9,
             f"interior/boundary {rep.notes['interior_vs_boundary']:.3f}")
    records += [r.flat() for r in rep.records]
    rep.write_csv(os.path.join(outdir, "uniformity.csv"))

    boundary = [(r.point["zeta"].real, r.estimate) for r in rep.records
                if r.point["kind"] == "boundary"]
    line_plot_svg(os.path.join(outdir, "uniformity.svg"),
                  [("estimate", [b[0] for b in boundary], [b[1] for b in boundary])],
                  title="resolvent estimates along the region boundary",
                  xlabel="Re zeta", ylabel="estimate", logx=True)

    st.start("wave_identity")
    worst = 0.0
    d = np.linspace(0.2, 3.0, 57)
    for zr in config["wave_zetas"]:
        z = sph.SpectralParamZeta(complex(zr[0], zr[1]))
        K = sph.resolvent_truncation(z)
        window = {"kind": "gaussian", "width": K / 3.0}
        a = sph.resolvent_kernel(ctx, z, K=K, window=window).at_distance(d)
        b = sph.resolvent_via_wave(ctx, z, K=K, window=window).at_distance(d)
        rel = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
        worst = max(worst, rel)
        records.append({"stage": "wave", "zeta": complex(zr[0], zr[1]), "rel_err": rel})
    st.stop()
    st.check("wave-identity", worst <= tol["wave_identity"],
             f"max rel deviation {worst:.2e}")

    st.start("tail_multiplier")
    lam, mu = config["tail_lam"], config["tail_mu"]
    windows = default_windows()
    peak = lam * abs(sph.tail_multiplier(ctx, lam, mu, lam, windows))
    taus = [lam + delta for delta in config["tail_deltas"]]
    tail_pairs = []
    for tau in taus:
        val = lam * abs(sph.tail_multiplier(ctx, lam, mu, tau, windows))
        fitted_c = val * (1.0 + abs(lam - tau)) ** 3 / peak
        records.append({"stage": "tail", "tau": tau, "lam_abs_m": val,
                        "fitted_C3": fitted_c})
        tail_pairs.append((1.0 + abs(lam - tau), val))
    tail_fit = ne.slope_fit(tail_pairs)
    st.stop()
    st.check("tail-multiplier-decay", tail_fit.slope <= tol["tail_slope_max"],
             f"fitted tail slope {tail_fit.slope:.3f} (target <= {tol['tail_slope_max']})")
    return records


def cmd_sphere_scaling(config: dict, outdir: str, st: _Stages) -> list:
    ctx = sph.SphereContext(config["dimension"], 1.0)
    tol = config["tolerances"]
    records = []
    st.start("transport")
    res = scans.sphere_scaling_check(ctx, kappas=config["kappas"],
                                     spec=ne.MixedNormSpec(*config["exponent_pairs"][0]),
                                     zeta=complex(*config["zeta"]),
                                     m_nodes=config["zonal_nodes"],
                                     seed=config["seed"])
    st.stop()
    worst = max(res["deviations"].values())
    st.check("scaling-identities", worst <= tol["transport"],
             f"max identity deviation {worst:.2e}")
    for kappa, rep in res["reports"].items():
        records.append({"kappa": kappa, "s_ratio": rep.s_ratio,
                        "s_factor": rep.s_factor, "r_ratio": rep.r_ratio,
                        "r_factor": rep.r_factor,
                        "estimate_ratio": rep.estimate_ratio,
                        "deviation": res["deviations"][kappa]})
    records.append({"kappa": 1.0, "s_ratio": 1.0, "s_factor": 1.0,
                    "r_ratio": 1.0, "r_factor": 1.0, "estimate_ratio": 1.0,
                    "deviation": 0.0})
    return records


def cmd_hyp_stein_tomas(config: dict, outdir: str, st: _Stages) -> list:
    tol = config["tolerances"]
    st.start("scan")
    rep = scans.stein_tomas_scan(lams=config["lams"], T_values=config["T_values"],
                                 radii=config["radii"],
                                 lam_for_bands=config["lam_for_bands"],
                                 base_radius=config["base_radius"],
                                 m_nodes=config["radial_nodes"],
                                 seed=config["seed"], workers=config["workers"],
                                 lam_probe=config["lam_probe"])
    st.stop()
    st.check("band-projector-slope", rep.fit.slope <= tol["slope_max"],
             f"fitted slope {rep.fit.slope:.4f} (target <= {tol['slope_max']})")
    st.check("T-uniformity", rep.notes["T_band_ratio"] <= tol["T_band"],
             f"scaled T-band ratio {rep.notes['T_band_ratio']:.3f}")
    if rep.notes["R_instability_flag"]:
        st.skip("R-stability", f"R spread {rep.notes['R_spread']:.1%} flagged (> 20%)")
    rep.write_csv(os.path.join(outdir, "stein_tomas.csv"))
    slope_recs = [(r.point["lam"], r.extra["scaled"]) for r in rep.records
                  if r.point["kind"] == "slope"]
    line_plot_svg(os.path.join(outdir, "stein_tomas.svg"),
                  [("scaled estimate", [p[0] for p in slope_recs],
                    [p[1] for p in slope_recs])],
                  title="band projector growth", xlabel="lambda",
                  ylabel="T^(1/2) estimate", logx=True, logy=True)
    return [r.flat() for r in rep.records]


def cmd_hyp_resolvent(config: dict, outdir: str, st: _Stages) -> list:
    ctx = hyp.HyperbolicContext(3)
    tol = config["tolerances"]
    windows = default_windows()
    records = []

    st.start("all_zeta")
    rep = scans.h3_full_resolvent_scan(moduli=config["moduli"],
                                       n_phases=config["n_phases"],
                                       radius=config["base_radius"],
                                       m_nodes=config["radial_nodes"],
                                       seed=config["seed"], workers=config["workers"])
    st.stop()
    st.check("all-zeta-band", rep.notes["band_ratio"] <= tol["zeta_band"],
             f"estimate band ratio {rep.notes['band_ratio']:.3f}")
    st.check("curvature-transport",
             rep.notes["kappa_transport_deviation"] <= tol["transport"],
             f"transport deviation {rep.notes['kappa_transport_deviation']:.2e}")
    records += [r.flat() for r in rep.records]
    rep.write_csv(os.path.join(outdir, "all_zeta.csv"))

    st.start("plancherel")
    r_grid = np.linspace(0.1, 5.0, 50)
    worst = 0.0
    for zr in config["plancherel_z"]:
        z = complex(zr[0], zr[1])
        rec = hyp.resolvent_from_spectral_bands(z, r_grid)
        exact = hyp.h3_resolvent_kernel(z, r_grid)
        worst = max(worst, float(np.max(np.abs(rec - exact) / np.abs(exact))))
    st.stop()
    st.check("plancherel-consistency", worst <= tol["plancherel"],
             f"max rel deviation {worst:.2e}")

    st.start("reconstruction")
    lam, mu = config["recon_lam"], config["recon_mu"]
    k_max = config["recon_kmax"]
    r_grid = np.linspace(0.05, 2.0 ** k_max * 0.95, 160)
    recon = hyp.dyadic_sum_kernel(ctx, k_max, lam, mu, r_grid, windows)
    target = hyp.h3_resolvent_kernel(hyp.wave_z_parameter(lam, mu), r_grid)
    recon_err = float(np.max(np.abs(recon - target)) / np.max(np.abs(target)))
    st.stop()
    st.check("dyadic-reconstruction", recon_err <= tol["reconstruction"],
             f"max rel deviation {recon_err:.2e}")

    st.start("dyadic_decay")
    drep = scans.dyadic_decay_scan(ctx, ks=config["dyadic_ks"],
                                   lam=config["dyadic_lam"], mu=config["dyadic_mu"],
                                   windows=windows, seed=config["seed"],
                                   workers=config["workers"])
    st.stop()
    lo, width = tol["dyadic_slope"]
    st.check("dyadic-decay-slope", abs(drep.fit.slope - lo) <= width,
             f"slope {drep.fit.slope:.3f} target {lo} +- {width} "
             f"(decay weaker than claimed fails; stronger decay also reported here)")
    st.check("dyadic-sup-superpolynomial",
             drep.notes["sup_decay_slope"] <= -tol["sup_decay_order"],
             f"sup slope {drep.notes['sup_decay_slope']:.2f} "
             f"(target <= -{tol['sup_decay_order']})")
    records += [r.flat() for r in drep.records]
    drep.write_csv(os.path.join(outdir, "dyadic.csv"))
    line_plot_svg(os.path.join(outdir, "dyadic_decay.svg"),
                  [("norm estimate", [2.0 ** r.point["k"] for r in drep.records],
                    [r.estimate for r in drep.records]),
                   ("kernel sup", [2.0 ** r.point["k"] for r in drep.records],
                    [max(r.extra["kernel_sup"], 1e-300) for r in drep.records])],
                  title="dyadic piece decay", xlabel="2^k", ylabel="value",
                  logx=True, logy=True)

    st.start("s0_conformance")
    consts = []
    for lam_c in config["s0_lams"]:
        crep = hyp.s0_conformance_check(ctx, lam_c, config["recon_mu"], windows)
        consts.append(crep.amplitude_constant)
        records.append({"stage": "s0", "lam": lam_c,
                        "amplitude_constant": crep.amplitude_constant,
                        "small_r_constant": crep.small_r_constant,
                        "beyond_support": crep.beyond_support_max})
    st.stop()
    st.check("s0-amplitude-stability", max(consts) / min(consts) <= tol["s0_band"],
             f"amplitude constants {['%.4f' % c for c in consts]}")

    prof_r = np.linspace(0.05, 3.9, 400)
    prof = hyp.s0_kernel(ctx, config["s0_lams"][0], config["recon_mu"], prof_r, windows)
    line_plot_svg(os.path.join(outdir, "s0_profile.svg"),
                  [("|s0|", prof_r, np.maximum(np.abs(prof), 1e-300))],
                  title="local piece profile", xlabel="r", ylabel="|kernel|",
                  logy=True)
    return records


def cmd_osc_check(config: dict, outdir: str, st: _Stages) -> list:
    tol = config["tolerances"]
    records = []
    for n in config["dimensions"]:
        st.start(f"scan_n{n}")
        rep = scans.oscillatory_operator_check(lams=config["lams"], n=n,
                                               m_nodes=config["zonal_nodes"],
                                               seed=config["seed"],
                                               workers=config["workers"])
        st.stop()
        target = rep.notes["slope_target"] + tol["slope_margin"]
        st.check(f"oscillatory-slope-n{n}", rep.fit.slope <= target,
                 f"slope {rep.fit.slope:.4f} (target <= {target:.4f})")
        records += [dict(r.flat(), n=n) for r in rep.records]
        rep.write_csv(os.path.join(outdir, f"oscillatory_n{n}.csv"))
    series = []
    for n in config["dimensions"]:
        rows = [r for r in records if r["n"] == n]
        series.append((f"n={n}", [r["lam"] for r in rows],
                       [r["estimate"] for r in rows]))
    line_plot_svg(os.path.join(outdir, "oscillatory.svg"), series,
                  title="oscillatory operator decay", xlabel="lambda",
                  ylabel="estimate", logx=True, logy=True)
    return records


def cmd_report(run_dirs: list, outdir: str) -> int:
    if not run_dirs:
        print("usage error: report needs at least one run directory", file=sys.stderr)
        return 3
    manifests = []
    for d in run_dirs:
        path = os.path.join(d, "manifest.json")
        if not os.path.exists(path):
            print(f"missing manifest: {path}", file=sys.stderr)
            return 3
        with open(path) as fh:
            manifests.append(json.load(fh))
    seen = {}
    for m in manifests:
        exp = m["experiment"]
        if exp in seen and seen[exp] != m["config_hash"]:
            print(f"conflicting config hash for {exp}: {seen[exp]} vs {m['config_hash']}",
                  file=sys.stderr)
            return 3
        seen[exp] = m["config_hash"]
    merged = {
        "package_version": __version__,
        "runs": manifests,
        "summary": [
            {"experiment": m["experiment"], "assertion": a["name"],
             "passed": a["passed"], "detail": a["detail"]}
            for m in manifests for a in m["assertions"]
        ],
    }
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(merged, fh, indent=1)
    lines = ["curvlens consolidated report", ""]
    for row in merged["summary"]:
        status = "PASS" if row["passed"] else "FAIL"
        lines.append(f"[{status}] {row['experiment']} :: {row['assertion']} - {row['detail']}")
    text = "\n".join(lines)
    with open(os.path.join(outdir, "report.txt"), "w") as fh:
        fh.write(text + "\n")
    print(text)
    return 0 if all(r["passed"] for r in merged["summary"]) else 2


# ---------------------------------------------------------------------------
# command table and entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "sphere-projector": {
        "runner": cmd_sphere_projector,
        "defaults": {
            "dimension": 3, "curvature": 1.0,
            "exponent_pairs": [[1.2, 6.0]],
            "allow_closed_segment": False,
            "degrees_algebra": 12, "resolution": 24,
            "sup_degrees": [16, 23, 32, 45, 64, 91, 128, 181, 256],
            "norm_degrees": [8, 12, 16, 24, 32, 48, 64, 96],
            "asymptotics_degree": 64,
            "zonal_nodes": 512,
            "seed": 1234, "workers": 1,
            "tolerances": {"trace": 1e-8, "orthogonality": 1e-8, "parity": 1e-12,
                           "sup_slope": [2.0, 0.05], "norm_slope": [1.0, 0.15],
                           "asymptotics_residual": 0.05, "antipodal": 1e-10},
        },
    },
    "sphere-resolvent": {
        "runner": cmd_sphere_resolvent,
        "defaults": {
            "dimension": 3, "curvature": 1.0,
            "exponent_pairs": [[1.2, 6.0]],
            "allow_closed_segment": False,
            "boundary_sigmas": [5.0, 10.0, 20.0, 40.0],
            "wave_zetas": [[-5.0, 12.0], [-4.0, 0.0], [0.0, 2.0], [24.0, 10.0],
                           [-6.0, 2.5], [97.75, 30.0]],
            "tail_lam": 50.0, "tail_mu": 1.0,
            "tail_deltas": [10.0, 20.0, 30.0, 50.0, 70.0, 100.0],
            "zonal_nodes": 512,
            "seed": 1234, "workers": 1,
            "tolerances": {"boundary_ratio": 5.0, "pole_contrast": 50.0,
                           "wave_identity": 1e-4, "tail_slope_max": -2.5},
        },
    },
    "sphere-scaling": {
        "runner": cmd_sphere_scaling,
        "defaults": {
            "dimension": 3,
            "exponent_pairs": [[1.2, 6.0]],
            "allow_closed_segment": False,
            "kappas": [0.25, 4.0], "zeta": [-9.0, 0.0],
            "zonal_nodes": 256,
            "seed": 1234, "workers": 1,
            "tolerances": {"transport": 1e-10},
        },
    },
    "hyp-stein-tomas": {
        "runner": cmd_hyp_stein_tomas,
        "defaults": {
            "dimension": 3,
            "exponent_pairs": [],
            "lams": [4.0, 8.0, 16.0, 32.0, 64.0],
            "T_values": [1.0, 4.0, 16.0],
            "radii": [2.0, 4.0, 8.0],
            "lam_for_bands": 16.0, "base_radius": 4.0, "lam_probe": 0.05,
            "radial_nodes": 640,
            "seed": 1234, "workers": 1,
            "tolerances": {"slope_max": 0.30, "T_band": 2.0},
        },
    },
    "hyp-resolvent": {
        "runner": cmd_hyp_resolvent,
        "defaults": {
            "dimension": 3,
            "exponent_pairs": [[1.2, 6.0]],
            "allow_closed_segment": True,
            "moduli": [0.01, 1.0, 10.0, 100.0], "n_phases": 8,
            "base_radius": 4.0, "radial_nodes": 384,
            "plancherel_z": [[1.0, 0.0], [2.0, 0.0], [1.0, 0.5]],
            "recon_lam": 8.0, "recon_mu": 0.5, "recon_kmax": 3,
            "dyadic_ks": [1, 2, 3, 4, 5], "dyadic_lam": 8.0, "dyadic_mu": 0.01,
            "s0_lams": [20.0, 40.0, 80.0],
            "seed": 1234, "workers": 1,
            "tolerances": {"zeta_band": 3.0, "transport": 1e-10,
                           "plancherel": 1e-6, "reconstruction": 1e-6,
                           "dyadic_slope": [-1.0, 0.2], "sup_decay_order": 2.0,
                           "s0_band": 3.0},
        },
    },
    "osc-check": {
        "runner": cmd_osc_check,
        "defaults": {
            "dimension": 3,
            "exponent_pairs": [],
            "dimensions": [2, 3],
            "lams": [4.0, 8.0, 16.0, 32.0, 64.0],
            "zonal_nodes": 320,
            "seed": 1234, "workers": 1,
            "tolerances": {"slope_margin": 0.05},
        },
    },
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="curvlens",
        description="numerical experiments for constant-curvature spectral estimates")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
    pr = sub.add_parser("report")
    pr.add_argument("runs", nargs="*", help="run directories with manifest.json")
    pr.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    out_base = args.out or os.environ.get(ENV_OUT) or "curvlens-out"

    if args.command == "report":
        return cmd_report(args.runs, out_base)

    try:
        config = load_config(args.command, args.config, args.seed, args.workers)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3

    outdir = os.path.join(out_base, args.command)
    os.makedirs(outdir, exist_ok=True)
    manifest = RunManifest(experiment=args.command, config=config,
                           config_hash=config_hash(config),
                           package_version=__version__)
    stages = _Stages(manifest)
    try:
        records = COMMANDS[args.command]["runner"](config, outdir, stages)
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 4
    _write_records(outdir, records)
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(scans._jsonable(manifest.as_dict()), fh, indent=1)
    failed = [a for a in manifest.assertions if not a.passed]
    for a in manifest.assertions:
        print(f"[{'PASS' if a.passed else 'FAIL'}] {a.name}: {a.detail}")
    for s in manifest.skipped:
        print(f"[SKIP] {s['stage']}: {s['reason']}")
    if failed:
        print(f"{len(failed)} assertion(s) failed", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
