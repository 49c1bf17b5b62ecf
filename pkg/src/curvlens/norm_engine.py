"""Discretized integral operators and mixed (L^r, L^s) norm lower bounds.

Operator norms are certified from below by a nonlinear power method: iterate
f <- normalize_r(J_{r'}(T* J_s(T f))) with J_p the duality map
|f|^{p-1} sgn f.  Each objective ||T f_m||_s / ||f_m||_r is a genuine lower
bound witnessed by stored samples, and the sequence is nondecreasing, so the
final value is the best certified bound over the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special_functions import QuadratureRule, gauss_jacobi_rule, sphere_area
from .sphere_spectral import SphereContext, zonal_basis_matrix

__all__ = [
    "MixedNormSpec", "NormEstimate", "SlopeFit",
    "lp_norm", "duality_map", "mixed_norm_power_iterate", "slope_fit",
    "refinement_diagnostic",
    "DenseOperator", "FactoredOperator", "diagonal_cap_average",
    "sphere_polar_rule", "ball_radial_rule",
    "zonal_reduce_multiplier", "zonal_reduce_kernel", "radial_reduce_ball",
    "hyperbolic_band_operator", "hyperbolic_spectral_operator",
    "sphere_full_grid_operator",
]


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponent pair (r, s) with the scaling/admissibility classification."""

    r: float
    s: float

    def __post_init__(self):
        if not (self.r > 1 and self.s > 1):
            raise ValueError("exponents must lie in (1, inf]")

    def admissible(self, n: int) -> bool:
        """n(1/r - 1/s) = 2 and min(|1/r - 1/2|, |1/s - 1/2|) > 1/(2n)."""
        rin = 0.0 if math.isinf(self.r) else 1.0 / self.r
        sin_ = 0.0 if math.isinf(self.s) else 1.0 / self.s
        scaling = abs(n * (rin - sin_) - 2.0) < 1e-12
        gap = min(abs(rin - 0.5), abs(sin_ - 0.5)) > 1.0 / (2.0 * n) + 1e-12
        return scaling and gap

    def on_closed_segment(self, n: int) -> bool:
        """Scaling relation with 2n/(n+3) <= r <= 2n/(n+1) (endpoints allowed)."""
        rin = 0.0 if math.isinf(self.r) else 1.0 / self.r
        sin_ = 0.0 if math.isinf(self.s) else 1.0 / self.s
        scaling = abs(n * (rin - sin_) - 2.0) < 1e-12
        return scaling and (2.0 * n / (n + 3) - 1e-12 <= self.r <= 2.0 * n / (n + 1) + 1e-12)

    @property
    def r_dual(self) -> float:
        return self.r / (self.r - 1.0)


def lp_norm(f: np.ndarray, weights, p: float) -> float:
    """(sum w |f|^p)^{1/p}; p = inf gives max |f|.  Stable for large p."""
    if isinstance(weights, QuadratureRule):
        weights = weights.weights
    f = np.asarray(f)
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(f)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    m = float(a.max()) if a.size else 0.0
    if m == 0.0:
        return 0.0
    return m * float(np.sum(np.asarray(weights) * (a / m) ** p)) ** (1.0 / p)


def duality_map(f: np.ndarray, p: float) -> np.ndarray:
    """J_p(f) = |f|^{p-1} sgn(f), componentwise, 0 -> 0; complex-compatible.

    Satisfies the weighted pairing identity <J_p(f), f> = ||f||_p^p.  For very
    large p, rescale the argument first (the power iteration normalizes by the
    sup before calling this).
    """
    if not (1.0 < p < math.inf):
        raise ValueError("duality map needs p in (1, inf); apply the proxy "
                         "exponent policy upstream for endpoints")
    f = np.asarray(f)
    a = np.abs(f)
    with np.errstate(invalid="ignore", divide="ignore"):
        phase = np.where(a > 0, f / np.where(a > 0, a, 1.0), 0.0)
    return a ** (p - 1.0) * phase


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass
class _OperatorBase:
    """Common surface: weighted application, adjoint, init construction."""

    domain_weights: np.ndarray
    codomain_weights: np.ndarray
    domain_coordinate: np.ndarray   # polar angle or radius per node, for bumps
    descriptor: dict = field(default_factory=dict)

    def apply(self, f: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint_apply(self, h: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def default_inits(self, restarts: int, rng: np.random.Generator):
        """One pole-concentrated bump, one narrow bump, then seeded noise."""
        coord = np.asarray(self.domain_coordinate, dtype=float)
        span = float(coord.max() - coord.min()) or 1.0
        base = coord - coord.min()
        inits = [np.exp(-((base / (span / 8.0)) ** 2)).astype(complex),
                 np.exp(-((base / (span / 64.0)) ** 2)).astype(complex)]
        while len(inits) < restarts:
            inits.append(rng.standard_normal(len(coord))
                         + 1j * rng.standard_normal(len(coord)))
        return inits[:restarts]


@dataclass
class DenseOperator(_OperatorBase):
    """Kernel matrix against domain quadrature: (Tf)_i = sum_j M_ij w_j f_j."""

    matrix: np.ndarray = None

    def apply(self, f):
        return self.matrix @ (self.domain_weights * f)

    def adjoint_apply(self, h):
        return np.conj(self.matrix).T @ (self.codomain_weights * h)


@dataclass
class FactoredOperator(_OperatorBase):
    """T = B diag(c) B^T against the domain weights, with real factor B.

    Exact zonal reduction of spectral-multiplier kernels: columns of B are
    the radial eigenfunctions sampled at the nodes.
    """

    factor: np.ndarray = None       # (N, K) real
    multiplier: np.ndarray = None   # (K,) complex

    def apply(self, f):
        return self.factor @ (self.multiplier * (self.factor.T @ (self.domain_weights * f)))

    def adjoint_apply(self, h):
        return self.factor @ (np.conj(self.multiplier) * (self.factor.T @ (self.codomain_weights * h)))

    def as_dense(self) -> np.ndarray:
        return (self.factor * self.multiplier) @ self.factor.T


def diagonal_cap_average(kernel_scale: float, power: float, n: int, w_i: float) -> float:
    """Self-interaction entry for a d^{-power} kernel model: the analytic
    average of the model over an equivalent-volume cap around the node."""
    if power >= n:
        raise ValueError("cap average needs power < n")
    area = sphere_area(n - 1)
    rho = (n * w_i / area) ** (1.0 / n)
    integral = kernel_scale * area * rho ** (n - power) / (n - power)
    return integral / w_i


# ---------------------------------------------------------------------------
# power iteration
# ---------------------------------------------------------------------------

def sigma_sup(f: np.ndarray) -> float:
    m = float(np.max(np.abs(f))) if np.asarray(f).size else 0.0
    return m if m > 0 else 1.0


@dataclass
class NormEstimate:
    """Certified lower bound for an (L^r -> L^s) operator norm."""

    value: float
    iterations: int
    restarts: int
    converged: bool
    history: list
    witness: np.ndarray
    witness_norms: dict
    meta: dict = field(default_factory=dict)


def mixed_norm_power_iterate(T: _OperatorBase, spec: MixedNormSpec,
                             inits=None, restarts: int = 4, tol: float = 1e-6,
                             max_iter: int = 200, seed: int = 0) -> NormEstimate:
    """Nonlinear power iteration for a lower bound of ||T||_{L^r -> L^s}.

    Every restart produces a nondecreasing objective sequence; the estimate is
    the best final objective with its witness stored.  Restarts that hit
    non-finite values are aborted and recorded, the others continue.
    """
    r, s = spec.r, spec.s
    if not (1.0 < r < math.inf and 1.0 < s < math.inf):
        raise ValueError("power iteration needs finite exponents in (1, inf); "
                         "use a proxy exponent for s = inf")
    rng = np.random.default_rng(seed)
    if inits is None:
        inits = T.default_inits(restarts, rng)
    w_dom, w_cod = T.domain_weights, T.codomain_weights
    best = None
    aborted = 0
    for f0 in inits:
        nrm = lp_norm(f0, w_dom, r)
        if nrm == 0.0:
            aborted += 1
            continue
        f = np.asarray(f0, dtype=complex) / nrm
        history = []
        converged = False
        for _ in range(max_iter):
            g = T.apply(f)
            sigma = lp_norm(g, w_cod, s)
            if not np.isfinite(sigma):
                history = None
                break
            witness = f
            history.append(sigma)
            if len(history) >= 2 and history[-1] - history[-2] <= tol * abs(history[-2]):
                converged = True
                break
            # sup-normalise before each duality map: J_p is positively
            # homogeneous, and the huge powers would overflow otherwise
            h = duality_map(g / sigma_sup(g), s)
            u = T.adjoint_apply(h)
            usup = sigma_sup(u)
            if usup == 0.0 or not np.isfinite(usup):
                history = None
                break
            fnew = duality_map(u / usup, spec.r_dual)
            nrm = lp_norm(fnew, w_dom, r)
            if nrm == 0.0 or not np.isfinite(nrm):
                history = None
                break
            f = fnew / nrm
        if history is None:
            aborted += 1
            continue
        candidate = NormEstimate(
            value=history[-1], iterations=len(history), restarts=len(inits),
            converged=converged, history=history, witness=witness,
            witness_norms={"domain_r": 1.0, "image_s": history[-1]},
            meta={"aborted_restarts": aborted})
        if best is None or candidate.value > best.value:
            best = candidate
    if best is None:
        raise RuntimeError("all power-iteration restarts aborted")
    best.meta["aborted_restarts"] = aborted
    return best


# ---------------------------------------------------------------------------
# zonal / radial reductions
# ---------------------------------------------------------------------------

def sphere_polar_rule(n: int, m: int) -> QuadratureRule:
    """Quadrature in the polar angle theta with the full zonal measure
    omega_{n-1} (sin theta)^{n-1} d theta, nodes reported as theta."""
    base = gauss_jacobi_rule(m, (n - 2) / 2.0, (n - 2) / 2.0)
    theta = np.arccos(base.nodes[::-1])
    w = base.weights[::-1] * sphere_area(n - 1)
    return QuadratureRule(theta, w, domain="polar", total_measure=sphere_area(n),
                          meta={"n": n, "cos_nodes": base.nodes[::-1]})


def ball_radial_rule(n: int, r_max: float, m: int, kappa: float = 1.0) -> QuadratureRule:
    """Radial rule on the geodesic ball with measure
    omega_{n-1} (sinh(sqrt(kappa) r)/sqrt(kappa))^{n-1} dr."""
    base = gauss_jacobi_rule(m, 0.0, 0.0)
    half = 0.5 * r_max
    r = half * (base.nodes + 1.0)
    sk = math.sqrt(kappa)
    w = half * base.weights * (np.sinh(sk * r) / sk) ** (n - 1) * sphere_area(n - 1)
    return QuadratureRule(r, w, domain="radial", meta={"n": n, "r_max": r_max,
                                                       "kappa": kappa})


def zonal_reduce_multiplier(ctx: SphereContext, coeffs: np.ndarray,
                            m_nodes: int = 512) -> FactoredOperator:
    """Exact zonal reduction of sum_k coeffs[k] H_k: B diag(coeffs) B^T with
    B the L^2-normalised zonal harmonics at the polar nodes.

    The reduction is exact on the zonal subspace (the image of a zonal
    function under a zonal kernel is zonal), so its norm estimates are valid
    lower bounds for the full operator norm.
    """
    rule = sphere_polar_rule(ctx.n, m_nodes)
    B = zonal_basis_matrix(ctx, len(coeffs) - 1, rule.meta["cos_nodes"])
    return FactoredOperator(domain_weights=rule.weights, codomain_weights=rule.weights,
                            domain_coordinate=rule.nodes,
                            descriptor={"reduction": "zonal-spectral",
                                        "n": ctx.n, "nodes": m_nodes},
                            factor=B, multiplier=np.asarray(coeffs, dtype=complex))


def _chord_rule(n: int, m_chord: int):
    """Rule for integrating over the angle between directions on S^{n-1}:
    int_{S^{n-1}} F(<w0, w>) dw = omega_{n-2} * int F(u) (1-u^2)^{(n-3)/2} du."""
    rule = gauss_jacobi_rule(m_chord, (n - 3) / 2.0, (n - 3) / 2.0)
    return rule.nodes, rule.weights * sphere_area(n - 2)


def _sphere_chord_distance(theta_i: np.ndarray, theta_j: np.ndarray,
                           u: np.ndarray) -> np.ndarray:
    """d(x, y) for polar angles theta_i, theta_j and direction cosine u,
    via 1 - cos d = (1-u) sin sin' + 2 sin^2((theta-theta')/2) (no cancellation)."""
    st_i, st_j = np.sin(theta_i), np.sin(theta_j)
    z = ((1.0 - u[None, None, :]) * (st_i[:, None, None] * st_j[None, :, None])
         + 2.0 * np.sin(0.5 * (theta_i[:, None, None] - theta_j[None, :, None])) ** 2)
    z = np.clip(z, 0.0, 2.0)
    return 2.0 * np.arcsin(np.sqrt(0.5 * z))


def _hyperbolic_chord_distance(r_i: np.ndarray, r_j: np.ndarray,
                               u: np.ndarray, sk: float = 1.0) -> np.ndarray:
    """Geodesic distance on H^n from radii and direction cosine, via
    cosh d - 1 = 2 sinh^2((r-r')/2) + sinh sinh' (1-u); stable at large radii."""
    sh_i, sh_j = np.sinh(sk * r_i), np.sinh(sk * r_j)
    y = (2.0 * np.sinh(0.5 * sk * (r_i[:, None, None] - r_j[None, :, None])) ** 2
         + (sh_i[:, None, None] * sh_j[None, :, None]) * (1.0 - u[None, None, :]))
    y = np.maximum(y, 0.0)
    small = y < 1e-8
    d = np.where(small, np.sqrt(2.0 * y), np.arccosh(1.0 + y))
    return d / sk


def _blocked_chord_matrix(coords, distance_fn, kernel_of_d, wu, block_elems: float = 2e6):
    """Angular chord average of a kernel, built in row blocks to bound memory."""
    m = len(coords)
    n_chord = len(wu)
    M = np.empty((m, m), dtype=complex)
    rows = max(1, int(block_elems / (m * n_chord)))
    for lo in range(0, m, rows):
        hi = min(lo + rows, m)
        d = distance_fn(coords[lo:hi], coords)
        kv = kernel_of_d(d.ravel()).reshape(d.shape)
        M[lo:hi] = (kv * wu[None, None, :]).sum(axis=2)
    if np.max(np.abs(M.imag)) == 0.0:
        M = M.real
    return M


def zonal_reduce_kernel(ctx: SphereContext, kernel_of_d, m_nodes: int = 256,
                        m_chord: int = 64) -> DenseOperator:
    """Zonal reduction of a general zonal kernel K(d) on S^n: the angular
    integral of the kernel is precomputed per node pair by chord quadrature."""
    rule = sphere_polar_rule(ctx.n, m_nodes)
    theta = rule.nodes
    u, wu = _chord_rule(ctx.n, m_chord)
    M = _blocked_chord_matrix(theta, lambda a, b: _sphere_chord_distance(a, b, u),
                              kernel_of_d, wu) / sphere_area(ctx.n - 1)
    # angular average folded in; domain weights already carry omega_{n-1}
    return DenseOperator(domain_weights=rule.weights, codomain_weights=rule.weights,
                         domain_coordinate=theta,
                         descriptor={"reduction": "zonal-chord", "n": ctx.n,
                                     "nodes": m_nodes, "chord_nodes": m_chord,
                                     "diagonal_policy": "chord-quadrature"},
                         matrix=M)


def radial_reduce_ball(n: int, r_max: float, kernel_of_d, m_nodes: int = 384,
                       m_chord: int = 64, kappa: float = 1.0) -> DenseOperator:
    """Radial reduction of a radial kernel K(d) on the hyperbolic ball B_{r_max}."""
    rule = ball_radial_rule(n, r_max, m_nodes, kappa)
    u, wu = _chord_rule(n, m_chord)
    sk = math.sqrt(kappa)
    M = _blocked_chord_matrix(rule.nodes,
                              lambda a, b: _hyperbolic_chord_distance(a, b, u, sk),
                              kernel_of_d, wu) / sphere_area(n - 1)
    return DenseOperator(domain_weights=rule.weights, codomain_weights=rule.weights,
                         domain_coordinate=rule.nodes,
                         descriptor={"reduction": "radial-chord", "n": n,
                                     "r_max": r_max, "nodes": m_nodes,
                                     "chord_nodes": m_chord, "kappa": kappa,
                                     "diagonal_policy": "chord-quadrature"},
                         matrix=M)


def hyperbolic_spectral_operator(multiplier_of_mu, mu_lo: float, mu_hi: float,
                                 r_max: float, m_nodes: int = 384,
                                 mu_nodes: int = 256,
                                 descriptor: dict | None = None) -> FactoredOperator:
    """Radial reduction of m(P) on the H^3 ball B_{r_max}:
    Phi diag(m(mu) dnu(mu) w_mu) Phi^T over a Gauss-Legendre mu-grid."""
    from .hyperbolic_spectral import plancherel_density, spherical_function_matrix
    rule = ball_radial_rule(3, r_max, m_nodes)
    base = gauss_jacobi_rule(mu_nodes, 0.0, 0.0)
    half = 0.5 * (mu_hi - mu_lo)
    mu = mu_lo + half * (base.nodes + 1.0)
    wmu = half * base.weights
    Phi = spherical_function_matrix(mu, rule.nodes).T
    mult = np.asarray(multiplier_of_mu(mu), dtype=complex) * plancherel_density(mu) * wmu
    return FactoredOperator(domain_weights=rule.weights, codomain_weights=rule.weights,
                            domain_coordinate=rule.nodes,
                            descriptor=descriptor or {"reduction": "radial-spectral",
                                                      "mu_range": (mu_lo, mu_hi)},
                            factor=Phi, multiplier=mult)


def hyperbolic_band_operator(lam: float, T: float, r_max: float,
                             m_nodes: int = 384, mu_nodes: int = 96) -> FactoredOperator:
    """Radial reduction of the H^3 band projector 1_{[lam, lam+1/T]}(P) on
    B_{r_max}: Phi diag(dnu * w_mu) Phi^T with Phi the spherical functions."""
    from .hyperbolic_spectral import plancherel_density, spherical_function_matrix
    rule = ball_radial_rule(3, r_max, m_nodes)
    base = gauss_jacobi_rule(mu_nodes, 0.0, 0.0)
    half = 0.5 / T
    mu = lam + half * (base.nodes + 1.0)
    wmu = half * base.weights
    Phi = spherical_function_matrix(mu, rule.nodes).T  # (m_nodes, mu_nodes)
    return FactoredOperator(domain_weights=rule.weights, codomain_weights=rule.weights,
                            domain_coordinate=rule.nodes,
                            descriptor={"reduction": "radial-spectral", "lam": lam,
                                        "T": T, "r_max": r_max},
                            factor=Phi,
                            multiplier=(plancherel_density(mu) * wmu).astype(complex))


def sphere_full_grid_operator(ctx: SphereContext, grid: QuadratureRule,
                              kernel_of_cosd) -> DenseOperator:
    """Dense operator on a full sphere product grid from a zonal kernel."""
    nodes = grid.nodes
    gram = np.clip(nodes @ nodes.T, -1.0, 1.0)
    M = kernel_of_cosd(gram.ravel()).reshape(gram.shape)
    theta = np.arccos(np.clip(nodes[:, 0], -1.0, 1.0))
    return DenseOperator(domain_weights=grid.weights, codomain_weights=grid.weights,
                         domain_coordinate=theta,
                         descriptor={"reduction": "none", "n": ctx.n,
                                     "points": len(grid)},
                         matrix=M)


def refinement_diagnostic(build_op, spec: MixedNormSpec, m_coarse: int,
                          m_fine: int, tolerance: float = 0.02,
                          seed: int = 0, restarts: int = 2) -> dict:
    """Estimates at two grid resolutions; a fine-grid regression beyond the
    quadrature tolerance is flagged (refinement should not lose norm)."""
    est_c = mixed_norm_power_iterate(build_op(m_coarse), spec,
                                     restarts=restarts, seed=seed)
    est_f = mixed_norm_power_iterate(build_op(m_fine), spec,
                                     restarts=restarts, seed=seed)
    drop = (est_c.value - est_f.value) / max(est_c.value, 1e-300)
    return {"coarse": est_c.value, "fine": est_f.value,
            "regression": max(drop, 0.0), "flagged": bool(drop > tolerance)}


# ---------------------------------------------------------------------------
# slope fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    half_width: float


def slope_fit(pairs) -> SlopeFit:
    """Least-squares slope of log y against log x with a residual-based
    confidence half-width (2 standard errors)."""
    pairs = [(float(x), float(y)) for x, y in pairs]
    if len(pairs) < 3:
        raise ValueError("slope fit needs at least 3 pairs")
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx < 1e-20:
        raise ValueError("degenerate abscissas")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(pairs) - 2, 1)
    se = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    return SlopeFit(slope=float(slope), intercept=float(intercept),
                    half_width=2.0 * se)
