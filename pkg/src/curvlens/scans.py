"""Scan drivers: parameter sweeps producing norm estimates, fits and reports.

Each scan maps a quantitative claim (uniformity band, growth slope, dyadic
decay, blowup contrast) onto a list of power-iteration lower bounds plus a
summary fit.  Reports serialize to JSON and flatten to CSV for plotting.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hyperbolic_spectral as hyp
from . import norm_engine as ne
from . import sphere_spectral as sph
from .windows import WindowFamily, default_windows, smoothstep

__all__ = [
    "ScanRecord", "ScanReport", "zeta_boundary_path",
    "resolvent_uniformity_scan", "stein_tomas_scan", "dyadic_decay_scan",
    "oscillatory_operator_check", "h3_full_resolvent_scan",
    "sphere_scaling_check",
]


@dataclass
class ScanRecord:
    point: dict
    estimate: float
    iterations: int
    converged: bool
    witness_norms: dict
    extra: dict = field(default_factory=dict)

    def flat(self) -> dict:
        row = dict(self.point)
        row.update({"estimate": self.estimate, "iterations": self.iterations,
                    "converged": self.converged})
        row.update(self.extra)
        return row


@dataclass
class ScanReport:
    scan_id: str
    parameters: dict
    records: list
    fit: ne.SlopeFit | None = None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "scan_id": self.scan_id,
            "parameters": _jsonable(self.parameters),
            "records": [_jsonable(rec.flat()) for rec in self.records],
            "fit": None if self.fit is None else
                {"slope": self.fit.slope, "intercept": self.fit.intercept,
                 "half_width": self.fit.half_width},
            "notes": _jsonable(self.notes),
        }
        return json.dumps(payload, indent=1)

    def write_csv(self, path) -> None:
        rows = [rec.flat() for rec in self.records]
        keys: list = []
        for row in rows:
            for key in row:
                if key not in keys:
                    keys.append(key)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(row.get(k)) for k in keys})


def _csv_cell(v):
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, ne.SlopeFit):
        return {"slope": obj.slope, "intercept": obj.intercept,
                "half_width": obj.half_width}
    return obj


def _run_points(task, points, workers: int = 1):
    """Apply task over points with a deterministic ordered reduction."""
    if workers <= 1:
        return [task(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, points))


# ---------------------------------------------------------------------------
# sphere: resolvent uniformity along the region boundary + blowup probe
# ---------------------------------------------------------------------------

def zeta_boundary_path(sigmas) -> list:
    """Points zeta = sigma^2 + i sigma, on the boundary Re zeta = (Im zeta)^2."""
    return [complex(s * s, s) for s in sigmas]


def resolvent_uniformity_scan(ctx: sph.SphereContext, sigmas=(5.0, 10.0, 20.0, 40.0),
                              spec: ne.MixedNormSpec | None = None,
                              m_nodes: int = 512, restarts: int = 3,
                              seed: int = 7, workers: int = 1,
                              pole_degree: int = 20, pole_eps: float = 1e-4,
                              interior_zeta: complex = -100.0 + 0.0j) -> ScanReport:
    """Norm estimates along the uniformity-region boundary, an off-region
    pole probe showing blowup, and a deep-interior comparison point."""
    spec = spec or ne.MixedNormSpec(6.0 / 5.0, 6.0)

    def estimate_for(zeta: complex) -> tuple:
        zp = sph.SpectralParamZeta(zeta)
        K = sph.resolvent_truncation(zp)
        kern = sph.resolvent_kernel(ctx, zp, K=K,
                                    window={"kind": "gaussian", "width": K / 3.0})
        op = ne.zonal_reduce_multiplier(ctx, kern.coeffs, m_nodes=m_nodes)
        est = ne.mixed_norm_power_iterate(op, spec, restarts=restarts, seed=seed)
        return est, kern

    records = []
    for zeta, (est, kern) in zip(zeta_boundary_path(sigmas),
                                 _run_points(estimate_for, zeta_boundary_path(sigmas),
                                             workers)):
        records.append(ScanRecord(
            point={"zeta": zeta, "kind": "boundary"},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms,
            extra={"in_region": kern.meta["in_region"],
                   "spectral_distance": kern.meta["spectral_distance"]}))
    boundary_vals = [rec.estimate for rec in records]
    ratio = max(boundary_vals) / min(boundary_vals)

    pole_zeta = complex(sph.eigenvalue(ctx, pole_degree) ** 2, pole_eps)
    est_pole, kern_pole = estimate_for(pole_zeta)
    records.append(ScanRecord(
        point={"zeta": pole_zeta, "kind": "pole-probe"},
        estimate=est_pole.value, iterations=est_pole.iterations,
        converged=est_pole.converged, witness_norms=est_pole.witness_norms,
        extra={"in_region": kern_pole.meta["in_region"],
               "spectral_distance": kern_pole.meta["spectral_distance"]}))

    est_int, kern_int = estimate_for(interior_zeta)
    records.append(ScanRecord(
        point={"zeta": interior_zeta, "kind": "interior"},
        estimate=est_int.value, iterations=est_int.iterations,
        converged=est_int.converged, witness_norms=est_int.witness_norms,
        extra={"in_region": kern_int.meta["in_region"],
               "spectral_distance": kern_int.meta["spectral_distance"]}))

    notes = {
        "boundary_ratio": ratio,
        "pole_contrast": est_pole.value / max(boundary_vals),
        "interior_vs_boundary": est_int.value / max(boundary_vals),
        "exponents": {"r": spec.r, "s": spec.s},
    }
    return ScanReport("sphere-resolvent-uniformity",
                      {"sigmas": list(sigmas), "m_nodes": m_nodes,
                       "pole_degree": pole_degree, "pole_eps": pole_eps},
                      records, fit=None, notes=notes)


# ---------------------------------------------------------------------------
# hyperbolic: band projector growth (restriction-type estimate)
# ---------------------------------------------------------------------------

def stein_tomas_scan(lams=(4.0, 8.0, 16.0, 32.0, 64.0), T_values=(1.0, 4.0, 16.0),
                     radii=(2.0, 4.0, 8.0), lam_for_bands: float = 16.0,
                     base_radius: float = 4.0, m_nodes: int = 640,
                     mu_nodes: int = 96, restarts: int = 3, seed: int = 11,
                     workers: int = 1, lam_probe: float = 0.05) -> ScanReport:
    """T^{1/2}-scaled L^2 -> L^4 lower bounds for band projectors on H^3 balls.

    Slope series in lam at T = 1 on the base ball; T-uniformity band at
    lam_for_bands; ball-radius stability diagnostic; a lam -> 0 probe is
    recorded without assertion.
    """
    spec = ne.MixedNormSpec(2.0, 4.0)

    def estimate_for(point):
        lam, T, R = point
        m = min(2048, max(m_nodes, int(4 * lam * R)))
        op = ne.hyperbolic_band_operator(lam, T, R, m_nodes=m, mu_nodes=mu_nodes)
        est = ne.mixed_norm_power_iterate(op, spec, restarts=restarts, seed=seed)
        return est

    records = []
    slope_pairs = []
    slope_points = [(lam, 1.0, base_radius) for lam in lams]
    for point, est in zip(slope_points, _run_points(estimate_for, slope_points, workers)):
        lam, T, R = point
        scaled = math.sqrt(T) * est.value
        records.append(ScanRecord(
            point={"lam": lam, "T": T, "R": R, "kind": "slope"},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms, extra={"scaled": scaled}))
        slope_pairs.append((lam, scaled))
    fit = ne.slope_fit(slope_pairs)

    band_vals = []
    for T in T_values:
        # a width-1/T band has extremizers spread over radius ~ T; the ball
        # must contain them for the T-uniformity to be visible
        R_T = max(base_radius, 4.0 * T)
        est = estimate_for((lam_for_bands, T, R_T))
        scaled = math.sqrt(T) * est.value
        band_vals.append(scaled)
        records.append(ScanRecord(
            point={"lam": lam_for_bands, "T": T, "R": R_T, "kind": "T-band"},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms, extra={"scaled": scaled}))

    r_vals = []
    for R in radii:
        est = estimate_for((lam_for_bands, 1.0, R))
        r_vals.append(est.value)
        records.append(ScanRecord(
            point={"lam": lam_for_bands, "T": 1.0, "R": R, "kind": "R-stability"},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms, extra={"scaled": est.value}))

    est_probe = estimate_for((lam_probe, 1.0, base_radius))
    records.append(ScanRecord(
        point={"lam": lam_probe, "T": 1.0, "R": base_radius, "kind": "small-lam-probe"},
        estimate=est_probe.value, iterations=est_probe.iterations,
        converged=est_probe.converged, witness_norms=est_probe.witness_norms,
        extra={"scaled": est_probe.value}))

    r_spread = (max(r_vals) - min(r_vals)) / max(r_vals)
    notes = {
        "slope_target": 0.25,
        "T_band_ratio": max(band_vals) / min(band_vals),
        "R_spread": r_spread,
        "R_instability_flag": bool(r_spread > 0.2),
        "small_lam_probe": {"lam": lam_probe, "estimate": est_probe.value},
    }
    return ScanReport("hyperbolic-stein-tomas",
                      {"lams": list(lams), "T_values": list(T_values),
                       "radii": list(radii), "m_nodes": m_nodes},
                      records, fit=fit, notes=notes)


# ---------------------------------------------------------------------------
# hyperbolic: dyadic piece decay
# ---------------------------------------------------------------------------

def dyadic_decay_scan(ctx: hyp.HyperbolicContext, ks=(1, 2, 3, 4, 5),
                      lam: float = 8.0, mu: float = 0.01,
                      spec: ne.MixedNormSpec | None = None,
                      windows: WindowFamily | None = None,
                      m_nodes: int = 384, m_chord: int = 48,
                      restarts: int = 3, seed: int = 3,
                      workers: int = 1) -> ScanReport:
    """Norm decay of the dyadic wave pieces S_k on their supporting balls.

    Estimates the (r, s) norm of S_k on B_{2^{k+1}}, fits the decay slope
    against 2^{-k}, and records the L^2 -> L^4 ingredient and kernel sup
    bounds for cross-checks.
    """
    spec = spec or ne.MixedNormSpec(6.0 / 5.0, 6.0)
    if not spec.on_closed_segment(ctx.n):
        raise ValueError("exponent pair outside the closed dyadic-decay segment")
    windows = windows or default_windows()
    spec24 = ne.MixedNormSpec(2.0, 4.0)

    def build(k: int):
        # spectral route: S_k = m_k(P); the multiplier concentrates at
        # |tau - lam| <~ 2^{-k}, so a narrow mu-window captures it while the
        # radial grid resolves phi_tau on the supporting ball
        r_max = 2.0 ** (k + 1)
        delta = 46.0 * 2.0 ** (-k) + 2.0
        mu_lo, mu_hi = max(0.0, lam - delta), lam + delta
        m_rad = min(1024, max(m_nodes, int(3.2 * (mu_hi * r_max))))
        mult = lambda tau: hyp.sk_multiplier(ctx, k, lam, mu, tau, windows)
        return ne.hyperbolic_spectral_operator(
            mult, mu_lo, mu_hi, r_max, m_nodes=m_rad, mu_nodes=512,
            descriptor={"reduction": "radial-spectral", "piece": f"s{k}"})

    records = []
    pairs = []
    ops = _run_points(build, list(ks), workers)
    for k, op in zip(ks, ops):
        est = ne.mixed_norm_power_iterate(op, spec, restarts=restarts, seed=seed)
        est24 = ne.mixed_norm_power_iterate(op, spec24, restarts=restarts, seed=seed)
        prof = hyp.sk_profile(ctx, k, lam, mu, windows)
        rgrid = np.linspace(2.0 ** (k - 1) * 1.001, 2.0 ** (k + 1) * 0.999, 400)
        sup = float(np.max(np.abs(prof(rgrid))))
        ingredient = est24.value * 2.0 ** (-k / 2.0) * lam ** ((ctx.n + 3) / (2.0 * (ctx.n + 1)))
        extra = {"estimate_2_4": est24.value, "ingredient_2_4": ingredient,
                 "kernel_sup": sup}
        if k <= 2:
            # cross-check the spectral route against the jet-kernel route
            kern = lambda d: hyp.sk_kernel(ctx, k, lam, mu, d, windows)
            op_kern = ne.radial_reduce_ball(ctx.n, 2.0 ** (k + 1), kern,
                                            m_nodes=m_nodes,
                                            m_chord=max(m_chord, int(6 * lam * 2 ** (k + 1))))
            est_kern = ne.mixed_norm_power_iterate(op_kern, spec,
                                                   restarts=restarts, seed=seed)
            extra["kernel_route_estimate"] = est_kern.value
        records.append(ScanRecord(
            point={"k": k, "lam": lam, "mu": mu},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms, extra=extra))
        pairs.append((2.0 ** k, est.value))
    fit = ne.slope_fit(pairs)

    sups = [rec.extra["kernel_sup"] for rec in records]
    sup_fit = ne.slope_fit([(2.0 ** k, s) for k, s in zip(ks, sups)])
    notes = {
        "slope_target": -1.0,
        "sup_decay_slope": sup_fit.slope,
        "ingredient_band": max(r.extra["ingredient_2_4"] for r in records)
                           / min(r.extra["ingredient_2_4"] for r in records),
        "exponents": {"r": spec.r, "s": spec.s},
    }
    return ScanReport("hyperbolic-dyadic-decay",
                      {"ks": list(ks), "lam": lam, "mu": mu, "m_nodes": m_nodes},
                      records, fit=fit, notes=notes)


# ---------------------------------------------------------------------------
# oscillatory integral operators with distance phase
# ---------------------------------------------------------------------------

def _distance_bump(delta: float, width: float = 0.2):
    hi = math.pi - delta

    def amplitude(d):
        d = np.asarray(d, dtype=float)
        return smoothstep((d - delta) / width) * smoothstep((hi - d) / width)

    return amplitude


def oscillatory_operator_check(lams=(4.0, 8.0, 16.0, 32.0, 64.0), n: int = 2,
                               p: float | None = None, q: float | None = None,
                               delta: float = 0.3, m_nodes: int = 320,
                               restarts: int = 3, seed: int = 5,
                               workers: int = 1) -> ScanReport:
    """Decay of ||I_lam||_{L^p -> L^q} for the geodesic-phase oscillatory
    operator with a smooth zonal amplitude supported in d in [delta, pi-delta].

    Defaults to the Carleson-Sjolin pairs q = (n+1)/(n-1) p' used in the
    interpolation argument; the fitted slope is compared against -n/q.
    """
    if p is None or q is None:
        if n == 2:
            p, q = 2.0, 6.0
        elif n == 3:
            p, q = 1.5, 6.0
        else:
            raise ValueError("defaults only shipped for n in {2, 3}")
    ctx = sph.SphereContext(n)
    spec = ne.MixedNormSpec(p, q)
    amplitude = _distance_bump(delta)

    def build(lam: float):
        kern = lambda d: amplitude(d) * np.exp(1j * lam * d)
        m_chord = max(64, int(3 * lam))
        return ne.zonal_reduce_kernel(ctx, kern, m_nodes=m_nodes, m_chord=m_chord)

    records = []
    pairs = []
    ops = _run_points(build, list(lams), workers)
    for lam, op in zip(lams, ops):
        est = ne.mixed_norm_power_iterate(op, spec, restarts=restarts, seed=seed)
        records.append(ScanRecord(
            point={"lam": lam, "n": n, "p": p, "q": q},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms))
        pairs.append((lam, est.value))
    fit = ne.slope_fit(pairs)
    notes = {"slope_target": -n / q, "exponents": {"p": p, "q": q}, "delta": delta}
    return ScanReport(f"oscillatory-decay-n{n}",
                      {"lams": list(lams), "n": n, "p": p, "q": q,
                       "m_nodes": m_nodes},
                      records, fit=fit, notes=notes)


# ---------------------------------------------------------------------------
# hyperbolic: closed-form H^3 resolvent over all spectral parameters
# ---------------------------------------------------------------------------

def h3_full_resolvent_scan(moduli=(0.01, 1.0, 10.0, 100.0), n_phases: int = 8,
                           spec: ne.MixedNormSpec | None = None,
                           radius: float = 4.0, radii_stability=(2.0, 4.0, 8.0),
                           m_nodes: int = 384, m_chord: int = 48,
                           restarts: int = 3, seed: int = 13, workers: int = 1,
                           kappa_check: float = 4.0) -> ScanReport:
    """Lower-bound norms of the closed-form H^3 resolvent over zeta spanning
    four orders of magnitude and all phases, including |zeta| < 1.

    Also records the curvature-transport identity (exact change of variables)
    and the |zeta| >= 1 vs Re sqrt(-zeta)-parameterisation flags.
    """
    spec = spec or ne.MixedNormSpec(6.0 / 5.0, 6.0)
    phases = [2.0 * math.pi * (j + 0.5) / n_phases for j in range(n_phases)]
    zetas = [rho * cmath.exp(1j * phi) for rho in moduli for phi in phases]

    def build(zeta: complex):
        z = cmath.sqrt(-zeta)
        kern = lambda d: hyp.h3_resolvent_kernel(z, d)
        chord = max(m_chord, int(2.5 * abs(z) * radius))
        op = ne.radial_reduce_ball(3, radius, kern, m_nodes=m_nodes, m_chord=chord)
        return z, op

    records = []
    built = _run_points(build, zetas, workers)
    for zeta, (z, op) in zip(zetas, built):
        est = ne.mixed_norm_power_iterate(op, spec, restarts=restarts, seed=seed)
        lam_equiv = abs(z.imag)
        records.append(ScanRecord(
            point={"zeta": zeta, "R": radius},
            estimate=est.value, iterations=est.iterations, converged=est.converged,
            witness_norms=est.witness_norms,
            extra={"re_z": z.real, "lam_equiv": lam_equiv,
                   "param_gap_flag": bool(abs(zeta) >= 1.0 > lam_equiv)}))
    vals = [rec.estimate for rec in records]
    band_ratio = max(vals) / min(vals)

    # ball-radius stability at a representative zeta
    zeta0 = zetas[len(phases) // 2]
    stability = {}
    for R in radii_stability:
        z = cmath.sqrt(-zeta0)
        op = ne.radial_reduce_ball(3, R, lambda d: hyp.h3_resolvent_kernel(z, d),
                                   m_nodes=m_nodes, m_chord=m_chord)
        stability[R] = ne.mixed_norm_power_iterate(op, spec, restarts=restarts,
                                                   seed=seed).value

    transport_dev = _h3_transport_deviation(zeta0, spec, radius, kappa_check,
                                            m_nodes, m_chord, seed)
    notes = {
        "band_ratio": band_ratio,
        "radius_stability": stability,
        "kappa_transport_deviation": transport_dev,
        "exponents": {"r": spec.r, "s": spec.s},
    }
    return ScanReport("h3-all-zeta-resolvent",
                      {"moduli": list(moduli), "n_phases": n_phases,
                       "radius": radius, "m_nodes": m_nodes},
                      records, fit=None, notes=notes)


def _h3_transport_deviation(zeta: complex, spec: ne.MixedNormSpec, radius: float,
                            kappa: float, m_nodes: int, m_chord: int,
                            seed: int) -> float:
    """Exact curvature change of variables: the estimate at curvature -kappa
    equals the curvature -1 estimate times kappa^{n/(2r)-n/(2s)-1}."""
    n = 3
    z = cmath.sqrt(-zeta)
    op1 = ne.radial_reduce_ball(n, radius, lambda d: hyp.h3_resolvent_kernel(z, d),
                                m_nodes=m_nodes, m_chord=m_chord)
    est1 = ne.mixed_norm_power_iterate(op1, spec, restarts=2, seed=seed)
    sk = math.sqrt(kappa)
    zk = sk * z  # kernel of the curvature -kappa resolvent at distance d:
    # kappa^{(n-2)/2} K_1(sqrt(kappa) d), in the kappa-scaled ball of radius R/sqrt(kappa)
    kern_k = lambda d: kappa ** ((n - 2) / 2.0) * hyp.h3_resolvent_kernel(zk / sk, sk * d)
    opk = ne.radial_reduce_ball(n, radius / sk, kern_k, m_nodes=m_nodes,
                                m_chord=m_chord, kappa=kappa)
    witness = est1.witness  # transported witness: same samples at scaled radii
    num = ne.lp_norm(opk.apply(witness), opk.codomain_weights, spec.s)
    den = ne.lp_norm(witness, opk.domain_weights, spec.r)
    est_k = num / den
    # the kernel scaling already carries the kappa^{-1} of the resolvent
    factor = kappa ** (n / (2.0 * spec.r) - n / (2.0 * spec.s) - 1.0)
    return abs(est_k / (est1.value * factor) - 1.0)


def sphere_scaling_check(ctx: sph.SphereContext, kappas=(0.25, 4.0),
                         spec: ne.MixedNormSpec | None = None,
                         zeta: complex = -9.0 + 0.0j, m_nodes: int = 256,
                         seed: int = 1) -> dict:
    """Transport identities for the sphere: norm ratios and the combined
    estimate equality, all exact changes of variables (1e-10 assertable)."""
    spec = spec or ne.MixedNormSpec(6.0 / 5.0, 6.0)
    zp = sph.SpectralParamZeta(zeta)
    K = sph.resolvent_truncation(zp)
    kern = sph.resolvent_kernel(ctx, zp, K=K,
                                window={"kind": "gaussian", "width": K / 3.0})
    op = ne.zonal_reduce_multiplier(ctx, kern.coeffs, m_nodes=m_nodes)
    est = ne.mixed_norm_power_iterate(op, spec, restarts=2, seed=seed)
    u = op.apply(est.witness)         # resolvent image of the witness
    f = est.witness                   # forward data
    results = {"kappa_1_estimate": est.value, "deviations": {}}
    for kappa in kappas:
        rep = sph.scaling_transport(ctx, u, op.domain_weights, kappa,
                                    s=spec.s, r=spec.r, image=f)
        results["deviations"][kappa] = rep.max_deviation()
        results.setdefault("reports", {})[kappa] = rep
    return results
