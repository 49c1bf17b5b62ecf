"""Spectral projectors, multiplier kernels and resolvents on the n-sphere.

The shifted Laplacian has square root P with eigenvalues lam_k = k + (n-1)/2
on degree-k spherical harmonics; the degree-k projector kernel is the zonal
function

    H_k(cos d) = (d_k / omega_n) * C_k^{(n-1)/2}(cos d) / C_k^{(n-1)/2}(1),

and every operator in scope is a multiplier sum  sum_k m(lam_k) H_k.  This
module builds those kernels, the damped-wave representation of the resolvent,
and the asymptotics / locality / scaling checks that certify them.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .amplitudes import AmplitudeExtraction, extract_pair_amplitudes
from .special_functions import gauss_jacobi_rule, sphere_area
from .windows import WindowFamily, default_windows, gaussian_degree_window

__all__ = [
    "SphereContext", "SpectralParamZeta", "ZonalKernel", "SpectrumHit",
    "eigenvalue", "scaled_eigenvalue", "harmonic_dim", "zonal_projector",
    "zonal_basis_matrix", "multiplier_kernel", "resolvent_kernel",
    "resolvent_truncation", "zonal_coefficient_sum", "local_resolvent_kernel",
    "wave_multiplier", "wave_kernel", "resolvent_via_wave", "tail_multiplier",
    "projector_asymptotics_check", "local_resolvent_check", "scaling_transport",
    "projector_algebra_report", "damped_time_rule",
]


class SpectrumHit(ValueError):
    """Spectral parameter indistinguishable from an eigenvalue of P^2."""


@dataclass(frozen=True)
class SphereContext:
    """Dimension and curvature of the round sphere under study."""

    n: int = 3
    kappa: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("sphere dimension must be >= 2")
        if self.kappa <= 0:
            raise ValueError("curvature must be positive")

    @property
    def alpha(self) -> float:
        return (self.n - 1) / 2.0

    @property
    def shift(self) -> float:
        """kappa * ((n-1)/2)^2, the spectral shift making eigenvalues arithmetic."""
        return self.kappa * ((self.n - 1) / 2.0) ** 2

    @property
    def omega(self) -> float:
        return sphere_area(self.n)


def eigenvalue(ctx: SphereContext, k: int) -> float:
    """lam_k = k + (n-1)/2 for the curvature-1 normalisation."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return k + (ctx.n - 1) / 2.0


def scaled_eigenvalue(ctx: SphereContext, k: int) -> float:
    """Eigenvalue of sqrt(-Delta_kappa + shift): sqrt(kappa) * lam_k."""
    return math.sqrt(ctx.kappa) * eigenvalue(ctx, k)


def harmonic_dim(ctx: SphereContext, k: int) -> int:
    """dim of degree-k spherical harmonics: binom(n+k, n) - binom(n+k-2, n)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    n = ctx.n
    return math.comb(n + k, n) - (math.comb(n + k - 2, n) if n + k - 2 >= 0 else 0)


def _projector_scales(ctx: SphereContext, kmax: int) -> np.ndarray:
    """d_k / (omega_n * C_k^alpha(1)) for k = 0..kmax."""
    alpha = ctx.alpha
    out = np.empty(kmax + 1)
    c1 = 1.0
    for k in range(kmax + 1):
        if k >= 1:
            # C_k(1)/C_{k-1}(1) = (k + 2 alpha - 1)/k
            c1 *= (k + 2.0 * alpha - 1.0) / k
        out[k] = harmonic_dim(ctx, k) / (ctx.omega * c1)
    return out


def zonal_projector(ctx: SphereContext, k: int, cosd) -> np.ndarray:
    """Kernel H_k of projection onto degree-k harmonics at cos(distance) = cosd."""
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    return zonal_coefficient_sum(ctx, coeffs, cosd)


def zonal_coefficient_sum(ctx: SphereContext, coeffs: np.ndarray, cosd) -> np.ndarray:
    """sum_k coeffs[k] * H_k(cosd), streaming the Gegenbauer recurrence."""
    t = np.asarray(cosd, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValueError("cosd outside [-1, 1]")
    t = np.clip(t, -1.0, 1.0)
    coeffs = np.asarray(coeffs)
    kmax = len(coeffs) - 1
    scales = _projector_scales(ctx, kmax)
    alpha = ctx.alpha
    acc = np.zeros(t.shape, dtype=np.result_type(coeffs.dtype, np.float64))
    ckm2 = np.ones_like(t)
    acc = acc + coeffs[0] * scales[0] * ckm2
    if kmax >= 1:
        ckm1 = 2.0 * alpha * t
        acc = acc + coeffs[1] * scales[1] * ckm1
        for k in range(2, kmax + 1):
            ck = (2.0 * (k + alpha - 1.0) * t * ckm1 - (k + 2.0 * alpha - 2.0) * ckm2) / k
            acc = acc + coeffs[k] * scales[k] * ck
            ckm2, ckm1 = ckm1, ck
    return acc


def zonal_basis_matrix(ctx: SphereContext, kmax: int, cosd: np.ndarray) -> np.ndarray:
    """Columns Y_k(theta) = sqrt(d_k/omega_n) C_k(cos theta)/C_k(1), L^2-normalised.

    The restriction of sum_k c_k H_k to zonal functions about the pole is
    exactly B diag(c) B^T against the polar measure, with B this matrix.
    """
    t = np.asarray(cosd, dtype=float)
    scales = _projector_scales(ctx, kmax)
    dks = np.array([harmonic_dim(ctx, k) for k in range(kmax + 1)], dtype=float)
    # sqrt(d_k/omega)/C_k(1) = scales / sqrt(d_k/omega)
    col_norm = scales / np.sqrt(dks / ctx.omega)
    alpha = ctx.alpha
    B = np.empty((t.shape[0], kmax + 1))
    ckm2 = np.ones_like(t)
    B[:, 0] = col_norm[0] * ckm2
    if kmax >= 1:
        ckm1 = 2.0 * alpha * t
        B[:, 1] = col_norm[1] * ckm1
        for k in range(2, kmax + 1):
            ck = (2.0 * (k + alpha - 1.0) * t * ckm1 - (k + 2.0 * alpha - 2.0) * ckm2) / k
            B[:, k] = col_norm[k] * ck
            ckm2, ckm1 = ckm1, ck
    return B


@dataclass(frozen=True)
class SpectralParamZeta:
    """Spectral parameter zeta with its principal square root lam + i mu."""

    zeta: complex

    @property
    def root(self) -> complex:
        return cmath.sqrt(complex(self.zeta))

    @property
    def lam(self) -> float:
        return self.root.real

    @property
    def mu(self) -> float:
        return self.root.imag

    @property
    def in_region(self) -> bool:
        """Re zeta <= (Im zeta)^2, boundary inclusive."""
        z = complex(self.zeta)
        return z.real <= z.imag ** 2 + 1e-12 * max(1.0, abs(z))


@dataclass(frozen=True)
class ZonalKernel:
    """A multiplier kernel sum_{k<=K} coeffs[k] H_k on the sphere.

    ``window`` records any per-degree damping already folded into coeffs, so
    comparisons between kernels are always like for like.
    """

    context: SphereContext
    coeffs: np.ndarray
    window: dict | None = None
    meta: dict = field(default_factory=dict)

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, cosd) -> np.ndarray:
        return zonal_coefficient_sum(self.context, self.coeffs, cosd)

    def at_distance(self, d) -> np.ndarray:
        return self(np.cos(np.asarray(d, dtype=float)))

    @property
    def parity(self) -> int | None:
        """(-1)^k when supported on a single degree k, else None."""
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        if len(nz) == 1:
            return -1 if nz[0] % 2 else 1
        return None

    def profile_csv(self, path, d: np.ndarray) -> None:
        vals = self.at_distance(d)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "re", "im"])
            for di, v in zip(np.asarray(d), np.atleast_1d(vals)):
                writer.writerow([repr(float(di)), repr(float(np.real(v))),
                                 repr(float(np.imag(v)))])


def _resolve_window(window, kmax: int) -> tuple[np.ndarray | None, dict | None]:
    if window is None:
        return None, None
    if isinstance(window, dict):
        if window.get("kind") != "gaussian":
            raise ValueError(f"unknown window kind {window.get('kind')!r}")
        width = float(window["width"])
        return gaussian_degree_window(kmax, width), {"kind": "gaussian", "width": width}
    arr = np.asarray(window, dtype=float)
    if arr.shape != (kmax + 1,):
        raise ValueError("window array must have length K+1")
    return arr, {"kind": "array"}


def multiplier_kernel(ctx: SphereContext, m, K: int, window=None) -> ZonalKernel:
    """Kernel of m(P) truncated at degree K, with optional Gaussian degree window."""
    if K < 1:
        raise ValueError("truncation must be >= 1")
    lam = np.array([eigenvalue(ctx, k) for k in range(K + 1)])
    coeffs = np.asarray([m(l) for l in lam], dtype=complex)
    warr, wdesc = _resolve_window(window, K)
    if warr is not None:
        coeffs = coeffs * warr
    meta = {}
    tail = abs(coeffs[-1]) * harmonic_dim(ctx, K) / ctx.omega
    scale = float(np.sum(np.abs(coeffs) * np.array(
        [harmonic_dim(ctx, k) for k in range(K + 1)]) / ctx.omega))
    if scale > 0 and tail > 1e-8 * scale:
        meta["tail_warning"] = f"last-degree term is {tail / scale:.2e} of kernel scale"
    return ZonalKernel(ctx, coeffs, window=wdesc, meta=meta)


DEFAULT_TRUNCATION_FLOOR = 64


def resolvent_truncation(zeta: SpectralParamZeta) -> int:
    """Degree cutoff K = max(4 * Re sqrt(zeta), 64)."""
    return max(int(math.ceil(4.0 * zeta.lam)), DEFAULT_TRUNCATION_FLOOR)


def resolvent_kernel(ctx: SphereContext, zeta: SpectralParamZeta | complex,
                     K: int | None = None, window=None) -> ZonalKernel:
    """Kernel of the shifted-Laplacian resolvent: sum_k (zeta - lam_k^2)^{-1} H_k.

    Raises SpectrumHit when zeta is within 1e-12 of some lam_k^2; records the
    distance to the spectrum and region membership in the kernel metadata.
    """
    if not isinstance(zeta, SpectralParamZeta):
        zeta = SpectralParamZeta(complex(zeta))
    if K is None:
        K = resolvent_truncation(zeta)
    lam = np.array([eigenvalue(ctx, k) for k in range(K + 1)])
    denom = complex(zeta.zeta) - lam ** 2
    dist = float(np.min(np.abs(denom)))
    if dist < 1e-12:
        hit = int(np.argmin(np.abs(denom)))
        raise SpectrumHit(f"zeta within {dist:.1e} of eigenvalue lam_{hit}^2")
    coeffs = 1.0 / denom
    warr, wdesc = _resolve_window(window, K)
    if warr is not None:
        coeffs = coeffs * warr
    dks = np.array([harmonic_dim(ctx, k) for k in range(K + 1)], dtype=float)
    scale = float(np.sum(np.abs(coeffs) * dks) / ctx.omega)
    # crude tail estimate over one more octave of degrees
    ktail = np.arange(K + 1, 2 * K + 65)
    lamt = ktail + (ctx.n - 1) / 2.0
    dkt = (2.0 / math.factorial(ctx.n - 1)) * ktail ** (ctx.n - 1)
    with np.errstate(divide="ignore"):
        tail_terms = dkt / ctx.omega / np.maximum(np.abs(lamt ** 2 - abs(zeta.zeta)), 1e-30)
    if warr is not None:
        tail_terms = tail_terms * math.exp(-float(K / max(wdesc.get("width", K / 3.0), 1e-9)) ** 2) \
            if wdesc.get("kind") == "gaussian" else tail_terms
    tail = float(np.sum(tail_terms))
    meta = {
        "zeta": complex(zeta.zeta),
        "spectral_distance": dist,
        "in_region": zeta.in_region,
        "tail_estimate": tail,
    }
    if scale > 0 and tail > 1e-8 * scale:
        meta["tail_warning"] = f"estimated truncation tail {tail / scale:.2e} of kernel scale"
    return ZonalKernel(ctx, coeffs, window=wdesc, meta=meta)


def wave_multiplier(ctx: SphereContext, t: float, K: int, window) -> np.ndarray:
    """Degree coefficients of the windowed wave kernel cos(tP): w_k cos(t lam_k)."""
    warr, _ = _resolve_window(window if window is not None
                              else {"kind": "gaussian", "width": K / 3.0}, K)
    lam = np.array([eigenvalue(ctx, k) for k in range(K + 1)])
    return warr * np.cos(t * lam)


def wave_kernel(ctx: SphereContext, t: float, K: int, window=None) -> ZonalKernel:
    """Windowed kernel of cos(tP); a degree window is mandatory (the raw series
    is only a distribution)."""
    if window is None:
        window = {"kind": "gaussian", "width": K / 3.0}
    coeffs = wave_multiplier(ctx, t, K, window).astype(complex)
    _, wdesc = _resolve_window(window, K)
    return ZonalKernel(ctx, coeffs, window=wdesc, meta={"time": t})


def damped_time_rule(t_max: float, max_freq: float, points_per_panel: int = 16):
    """Composite Gauss-Legendre rule on [0, t_max] resolving e^{i max_freq t}."""
    nodes_per_unit = max(48.0, 3.2 * max_freq)
    panels = max(1, int(math.ceil(t_max * nodes_per_unit / points_per_panel)))
    base = gauss_jacobi_rule(points_per_panel, 0.0, 0.0)
    edges = np.linspace(0.0, t_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t = (mid[:, None] + half[:, None] * base.nodes[None, :]).ravel()
    w = (half[:, None] * base.weights[None, :]).ravel()
    return t, w


def resolvent_via_wave(ctx: SphereContext, zeta: SpectralParamZeta | complex,
                       t_max: float | None = None, K: int | None = None,
                       window=None, points_per_panel: int = 16) -> ZonalKernel:
    """Resolvent kernel from the damped wave integral

        sgn(mu)/(i (lam + i mu)) * int_0^inf e^{i sgn(mu) lam t - |mu| t} cos(tP) dt,

    lam + i mu = principal sqrt(zeta).  Agreement with resolvent_kernel (same
    truncation and window) is the correctness contract for both.
    """
    if not isinstance(zeta, SpectralParamZeta):
        zeta = SpectralParamZeta(complex(zeta))
    lam, mu = zeta.lam, zeta.mu
    if mu == 0.0:
        raise ValueError("Im sqrt(zeta) = 0: undamped wave integral is rejected")
    required = 30.0 / abs(mu)
    if t_max is None:
        t_max = required
    if t_max * abs(mu) < 30.0 - 1e-9:
        raise ValueError(
            f"t_max {t_max:.3g} gives insufficient damping; need t_max >= {required:.3g}")
    if K is None:
        K = resolvent_truncation(zeta)
    if window is None:
        window = {"kind": "gaussian", "width": K / 3.0}
    warr, wdesc = _resolve_window(window, K)

    lam_k = np.array([eigenvalue(ctx, k) for k in range(K + 1)])
    t, w = damped_time_rule(t_max, lam + float(lam_k[-1]), points_per_panel)
    s = 1.0 if mu > 0 else -1.0
    damped = np.exp((1j * s * lam - abs(mu)) * t) * w
    integrals = np.cos(np.outer(lam_k, t)) @ damped
    pref = s / (1j * (lam + 1j * mu))
    coeffs = pref * integrals * warr
    meta = {"zeta": complex(zeta.zeta), "t_max": t_max, "time_nodes": len(t)}
    return ZonalKernel(ctx, coeffs.astype(complex), window=wdesc, meta=meta)


def tail_multiplier(ctx: SphereContext, lam: float, mu: float, tau: float,
                    windows: WindowFamily | None = None,
                    t_max: float | None = None) -> complex:
    """Value of the non-local multiplier

        m(tau) = sgn(mu)/(i(lam+i mu)) int_0^inf (1 - rho(t)) e^{i sgn(mu) lam t - |mu| t} cos(t tau) dt

    with rho the even unit cutoff (1 on |t|<=1/2, supported in [-1,1]).
    """
    if windows is None:
        windows = default_windows()
    if abs(mu) < 1e-12:
        raise ValueError("mu must be nonzero")
    if t_max is None:
        t_max = max(8.0, 34.0 / abs(mu))
    t, w = damped_time_rule(t_max, lam + tau)
    mask = t > 0.5  # 1 - rho vanishes below
    t, w = t[mask], w[mask]
    s = 1.0 if mu > 0 else -1.0
    integrand = (1.0 - windows.rho(t)) * np.exp((1j * s * lam - abs(mu)) * t) * np.cos(tau * t)
    return complex(s / (1j * (lam + 1j * mu)) * np.sum(integrand * w))


def projector_algebra_report(ctx: SphereContext, kmax: int, resolution: int) -> dict:
    """Trace and pairwise-orthogonality deviations of the discretized H_k.

    Compositions H_k o H_j use the full product grid for the middle integral;
    the Hilbert-Schmidt norm of the zonal error kernel is then an exact
    one-dimensional integral over a polar arc.  All integrands are polynomial
    of degree within the rules' exactness, so deviations are pure roundoff.
    """
    from .special_functions import gauss_jacobi_rule, sphere_grid

    grid = sphere_grid(ctx.n, resolution)
    arc = gauss_jacobi_rule(2 * resolution, (ctx.n - 2) / 2.0, (ctx.n - 2) / 2.0)
    cos_pole = np.clip(grid.nodes[:, 0], -1.0, 1.0)          # z . e0
    sin_pole_sq = 1.0 - cos_pole ** 2
    # y(theta) in the (e0, e1) plane: z . y = z0 cos + z1 sin
    ct, st = arc.nodes, np.sqrt(1.0 - arc.nodes ** 2)
    cos_zy = np.clip(cos_pole[:, None] * ct[None, :]
                     + grid.nodes[:, 1][:, None] * st[None, :], -1.0, 1.0)
    del sin_pole_sq

    from .special_functions import gegenbauer_all
    scales = _projector_scales(ctx, kmax)
    geg_pole = gegenbauer_all(kmax, ctx.alpha, cos_pole)
    geg_arc = gegenbauer_all(kmax, ctx.alpha, ct)
    geg_zy = gegenbauer_all(kmax, ctx.alpha, cos_zy)

    trace_errs = []
    for k in range(kmax + 1):
        dk = harmonic_dim(ctx, k)
        tr = float(grid.weights.sum()) * dk / ctx.omega
        trace_errs.append(abs(tr - dk) / dk)

    max_dev = 0.0
    wz = grid.weights
    for k in range(kmax + 1):
        vk = scales[k] * geg_pole[k] * wz
        for j in range(kmax + 1):
            comp = vk @ (scales[j] * geg_zy[j])
            target = (scales[k] * geg_arc[k]) if j == k else 0.0
            err = comp - target
            hs = math.sqrt(ctx.omega * sphere_area(ctx.n - 1)
                           * float((arc.weights * np.abs(err) ** 2).sum()))
            dev = hs / math.sqrt(max(harmonic_dim(ctx, k), harmonic_dim(ctx, j)))
            max_dev = max(max_dev, dev)
    return {"max_trace_rel_err": max(trace_errs),
            "max_orthogonality_dev": max_dev,
            "kmax": kmax, "resolution": resolution}


# ---------------------------------------------------------------------------
# asymptotics and locality reports
# ---------------------------------------------------------------------------

@dataclass
class AsymptoticsReport:
    """Conformance of H_k to its two-phase oscillatory representation."""

    k: int
    lam: float
    sup_ratio: float
    residual_max: float
    residual_median: float
    antipodal_residual: float
    derivative_constants: list
    ill_conditioned: bool
    extraction: AmplitudeExtraction

    def to_json(self) -> str:
        payload = {
            "k": self.k, "lambda": self.lam, "sup_ratio": self.sup_ratio,
            "residuals": [self.residual_max, self.residual_median],
            "antipodal_residual": self.antipodal_residual,
            "derivative_constants": self.derivative_constants,
            "ill_conditioned": self.ill_conditioned,
            "antipodal_phase_includes_frequency": True,
        }
        return json.dumps(payload, indent=1)


def projector_asymptotics_check(ctx: SphereContext, k: int,
                                d_grid: np.ndarray | None = None) -> AsymptoticsReport:
    """Reconstruct the +- amplitudes of H_k and report representation residuals.

    The modulation model divides out the (sin d)^{-(n-1)/2} envelope before
    solving the quarter-period pair system, which keeps the extraction
    conditioned down to d ~ 1/lam.  Reconstruction is scored at held-out
    midpoints against exact kernel values, relative to the local envelope.
    """
    lam = eigenvalue(ctx, k)
    if 1.0 / lam >= 3.0 * math.pi / 4.0:
        raise ValueError("degree too small for the asymptotic range")
    p = (ctx.n - 1) / 2.0
    offset = math.pi / (2.0 * lam)
    if d_grid is None:
        d_grid = np.linspace(1.0 / lam, 3.0 * math.pi / 4.0 - offset, 400)
    d_grid = np.asarray(d_grid, dtype=float)
    usable = d_grid + offset <= 3.0 * math.pi / 4.0 + 1e-12
    ill = bool(np.any(~usable))
    d = d_grid[usable]

    def modulation(x):
        return zonal_projector(ctx, k, np.cos(x)) * np.sin(x) ** p / lam ** p

    ext = extract_pair_amplitudes(modulation(d), modulation(d + offset), lam, d, offset)
    ill = ill or ext.ill_conditioned

    mid = d + offset / 2.0
    recon = ext.reconstruct(mid) * lam ** p / np.sin(mid) ** p
    exact = zonal_projector(ctx, k, np.cos(mid))
    envelope = ext.envelope_bound * lam ** p / np.sin(mid) ** p
    rel = np.abs(recon - exact) / np.maximum(envelope, 1e-300)
    residual_max = float(np.max(rel))
    residual_median = float(np.median(rel))

    sup_ratio = (harmonic_dim(ctx, k) / ctx.omega) / (1.0 + k) ** (ctx.n - 1)

    # antipodal identity: H_k(pi - d) = (-1)^k H_k(d), exact Gegenbauer parity
    dstar = d[(d >= 1.0 / lam) & (d <= 3.0 * math.pi / 4.0)]
    hk_far = zonal_projector(ctx, k, np.cos(math.pi - dstar))
    hk_near = zonal_projector(ctx, k, np.cos(dstar))
    scale = harmonic_dim(ctx, k) / ctx.omega
    antipodal = float(np.max(np.abs(hk_far - (-1.0) ** k * hk_near)) / scale)

    # finite-difference estimates of |d^j/dr^j a_pm| * r^j, j = 0..2
    a_plus = ext.b_plus / np.sin(d) ** p
    consts = []
    for j in range(3):
        deriv = a_plus.copy()
        x = d.copy()
        for _ in range(j):
            deriv = np.diff(deriv) / np.diff(x)
            x = 0.5 * (x[:-1] + x[1:])
        consts.append(float(np.max(np.abs(deriv) * x ** j)))

    return AsymptoticsReport(k=k, lam=lam, sup_ratio=float(sup_ratio),
                             residual_max=residual_max, residual_median=residual_median,
                             antipodal_residual=antipodal,
                             derivative_constants=consts,
                             ill_conditioned=ill, extraction=ext)


@dataclass
class LocalResolventReport:
    """Oscillatory-amplitude conformance of the time-localised resolvent piece."""

    lam: float
    mu: float
    amplitude_constant: float       # max |a_pm| d^{(n-1)/2} / lam^{(n-3)/2}
    small_d_constant: float         # max |kernel| d^{n-2} on d <= 1/lam
    far_field_max: float            # max |kernel| beyond the time support
    kernel_scale: float
    ill_conditioned: bool

    def to_json(self) -> str:
        return json.dumps({
            "lambda": self.lam, "mu": self.mu,
            "amplitude_constant": self.amplitude_constant,
            "small_d_constant": self.small_d_constant,
            "far_field_max": self.far_field_max,
            "kernel_scale": self.kernel_scale,
            "ill_conditioned": self.ill_conditioned,
        }, indent=1)


def local_resolvent_kernel(ctx: SphereContext, lam: float, mu: float,
                           windows: WindowFamily | None = None,
                           K: int | None = None) -> ZonalKernel:
    """Kernel of the rho-localised damped wave integral (support d <= 1).

    The degree coefficients only decay like 1/|lam - lam_k| (half-line time
    integral), so a sharp truncation rings; a shifted Gaussian degree window,
    identically one on the physical band k <= 2 lam + 40, removes the ringing
    without touching the amplitudes under test.
    """
    if windows is None:
        windows = default_windows()
    if K is None:
        K = 4 * int(math.ceil(lam)) + 640
    s = 1.0 if mu >= 0 else -1.0
    lam_k = np.array([eigenvalue(ctx, k) for k in range(K + 1)])
    t, w = damped_time_rule(1.0, lam + float(lam_k[-1]))
    profile = windows.rho(t) * np.exp((1j * s * lam - abs(mu)) * t) * w
    integrals = np.cos(np.outer(lam_k, t)) @ profile
    k0 = 2.0 * lam + 40.0
    kk = np.arange(K + 1, dtype=float)
    degree_window = np.where(kk <= k0, 1.0,
                             np.exp(-(3.0 * (kk - k0) / max(K - k0, 1.0)) ** 2))
    pref = s / (1j * (lam + 1j * mu))
    return ZonalKernel(ctx, (pref * integrals * degree_window).astype(complex),
                       window={"kind": "shifted-gaussian", "flat_to": k0},
                       meta={"lam": lam, "mu": mu, "localised": True})


def local_resolvent_check(ctx: SphereContext, lam: float, mu: float,
                          windows: WindowFamily | None = None,
                          d_grid: np.ndarray | None = None) -> LocalResolventReport:
    """Check the locality and stationary-phase amplitude bounds of the
    time-localised resolvent piece at frequency lam."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    kern = local_resolvent_kernel(ctx, lam, mu, windows)
    p = (ctx.n - 1) / 2.0
    offset = math.pi / (2.0 * lam)
    if d_grid is None:
        d_grid = np.linspace(1.2 / lam, 0.9 - offset, 200)
    d = np.asarray(d_grid, dtype=float)

    def modulation(x):
        return kern.at_distance(x) * np.sin(x) ** p / lam ** p

    ext = extract_pair_amplitudes(modulation(d), modulation(d + offset), lam, d, offset)
    a_abs = np.maximum(np.abs(ext.b_plus), np.abs(ext.b_minus)) / np.sin(d) ** p * lam ** p
    amp_const = float(np.max(a_abs * d ** p / lam ** ((ctx.n - 3) / 2.0)))

    d_small = np.linspace(0.3 / lam, 0.95 / lam, 24)
    vals_small = np.abs(kern.at_distance(d_small))
    small_const = float(np.max(vals_small * d_small ** (ctx.n - 2)))

    d_far = np.linspace(1.3, math.pi - 1e-3, 64)
    far_max = float(np.max(np.abs(kern.at_distance(d_far))))
    scale = float(np.max(np.abs(kern.at_distance(np.linspace(0.05, 1.0, 200)))))

    return LocalResolventReport(lam=lam, mu=mu, amplitude_constant=amp_const,
                                small_d_constant=small_const, far_field_max=far_max,
                                kernel_scale=scale, ill_conditioned=ext.ill_conditioned)


# ---------------------------------------------------------------------------
# curvature scaling transport
# ---------------------------------------------------------------------------

@dataclass
class ScalingReport:
    """Exact change-of-variables identities between curvature 1 and kappa."""

    kappa: float
    s: float
    r: float
    s_ratio: float
    s_factor: float
    r_ratio: float | None
    r_factor: float | None
    estimate_ratio: float | None
    estimate_factor: float | None

    def max_deviation(self) -> float:
        devs = [abs(self.s_ratio / self.s_factor - 1.0)]
        if self.r_ratio is not None:
            devs.append(abs(self.r_ratio / self.r_factor - 1.0))
        if self.estimate_ratio is not None:
            devs.append(abs(self.estimate_ratio / self.estimate_factor - 1.0))
        return max(devs)


def scaling_transport(ctx: SphereContext, u: np.ndarray, weights: np.ndarray,
                      kappa: float, s: float, r: float,
                      image: np.ndarray | None = None) -> ScalingReport:
    """Transport samples u (and optionally a shifted-resolvent image) from the
    curvature-1 grid to curvature kappa and verify the norm identities.

    The transported function u_kappa(x) = u(sqrt(kappa) x) takes the same
    values at the rescaled nodes while the volume weights pick up kappa^{-n/2},
    so every identity here is exact up to roundoff:

        ||u||_{L^s(dV_kappa)} = kappa^{-n/(2s)} ||u||_{L^s(dV_1)}
        ||u||_{L^r(dV_1)}     = kappa^{n/(2r)} kappa^{-1} ||kappa * image_kappa||... (resolvent image)
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    u = np.asarray(u)
    weights = np.asarray(weights, dtype=float)
    n = ctx.n
    wk = weights * kappa ** (-n / 2.0)

    def norm(vals, w, p):
        return float((w * np.abs(vals) ** p).sum() ** (1.0 / p))

    s_ratio = norm(u, wk, s) / norm(u, weights, s)
    s_factor = kappa ** (-n / (2.0 * s))

    r_ratio = r_factor = None
    est_ratio = est_factor = None
    if image is not None:
        image = np.asarray(image)
        # forward operator scales by kappa: F_kappa = kappa * F_1 at nodes
        f_kappa = kappa * image
        r_ratio = norm(image, weights, r) / norm(f_kappa, wk, r)
        r_factor = kappa ** (n / (2.0 * r)) * kappa ** (-1.0)
        est_1 = norm(u, weights, s) / norm(image, weights, r)
        est_k = norm(u, wk, s) / norm(f_kappa, wk, r)
        est_ratio = est_k / est_1
        est_factor = kappa ** (n / (2.0 * r) - n / (2.0 * s) - 1.0)
    return ScalingReport(kappa=kappa, s=s, r=r, s_ratio=s_ratio, s_factor=s_factor,
                         r_ratio=r_ratio, r_factor=r_factor,
                         estimate_ratio=est_ratio, estimate_factor=est_factor)
