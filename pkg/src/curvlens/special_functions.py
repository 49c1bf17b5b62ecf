"""Gegenbauer polynomials, Gauss-Jacobi quadrature and product grids.

Everything downstream (zonal kernels, mixed-norm estimates, spectral
integrals) reduces to evaluating Gegenbauer polynomials on [-1, 1] and to
integrating against weights of the form (1-t)^a (1+t)^b, (sin theta)^{n-1}
or (sinh r)^{n-1}.  This module owns those primitives.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureRule",
    "GegenbauerParams",
    "QuadratureError",
    "gegenbauer_eval",
    "gegenbauer_all",
    "gegenbauer_at_one",
    "gauss_jacobi_rule",
    "gauss_legendre_interval",
    "jacobi_weight_moment",
    "sphere_area",
    "sphere_grid",
    "ball_grid",
]

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-14


class QuadratureError(RuntimeError):
    """Raised when a quadrature rule cannot be constructed."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and strictly positive weights for a fixed integration domain.

    ``nodes`` is (N,) for 1-D rules and (N, d) for grids embedded in d
    coordinates (unit vectors for spheres, r*direction for geodesic balls).
    ``total_measure`` records the closed-form measure of the domain when one
    is known, so weight-sum checks do not have to recompute it.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: str = "interval"
    total_measure: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 1 or nodes.shape[0] != weights.shape[0]:
            raise ValueError("nodes and weights must agree in length")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def weight_sum(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values: np.ndarray) -> complex | float:
        values = np.asarray(values)
        return (self.weights * values).sum()

    def to_csv(self, path) -> None:
        """One node per row: coordinate(s)..., weight."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for node, w in zip(np.atleast_2d(self.nodes.T).T, self.weights):
                row = list(np.atleast_1d(node)) + [w]
                writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class GegenbauerParams:
    """Degree, weight parameter and argument for one polynomial evaluation."""

    degree: int
    alpha: float
    argument: float

    def validate(self) -> None:
        if self.degree < 0:
            raise ValueError("degree must be a nonnegative integer")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if abs(self.argument) > 1.0 + 1e-15:
            raise ValueError(f"argument {self.argument} outside [-1, 1]")


def gegenbauer_all(kmax: int, alpha: float, t: np.ndarray) -> np.ndarray:
    """All Gegenbauer values C_k^alpha(t) for k = 0..kmax, shape (kmax+1, *t.shape).

    Forward three-term recurrence
        k C_k = 2 (k + alpha - 1) t C_{k-1} - (k + 2 alpha - 2) C_{k-2},
    which is stable on [-1, 1] for alpha > 0.
    """
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape, dtype=float)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2.0 * alpha * t
    for k in range(2, kmax + 1):
        out[k] = (2.0 * (k + alpha - 1.0) * t * out[k - 1]
                  - (k + 2.0 * alpha - 2.0) * out[k - 2]) / k
    return out


def gegenbauer_eval(params: GegenbauerParams) -> float:
    """C_k^alpha(t) by the forward recurrence; exact for k <= 1."""
    params.validate()
    t = np.clip(params.argument, -1.0, 1.0)
    return float(gegenbauer_all(params.degree, params.alpha, np.asarray(t))[params.degree])


def gegenbauer_at_one(k: int, alpha: float) -> float:
    """C_k^alpha(1) = Gamma(k + 2 alpha) / (Gamma(2 alpha) k!), via lgamma."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return math.exp(math.lgamma(k + 2.0 * alpha) - math.lgamma(2.0 * alpha)
                    - math.lgamma(k + 1.0))


def _jacobi_value(m: int, a: float, b: float, x: np.ndarray) -> np.ndarray:
    """P_m^{(a,b)}(x), vectorised three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if m == 0:
        return np.ones_like(x)
    pn2 = np.ones_like(x)
    p = 0.5 * (a - b + (a + b + 2.0) * x)
    apb = a + b
    for k in range(2, m + 1):
        a1 = 2.0 * k * (k + apb) * (2.0 * k + apb - 2.0)
        a2 = (2.0 * k + apb - 1.0) * (a * a - b * b)
        a3 = (2.0 * k + apb - 2.0) * (2.0 * k + apb - 1.0) * (2.0 * k + apb)
        a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + apb)
        p, pn2 = ((a2 + a3 * x) * p - a4 * pn2) / a1, p
    return p


def _jacobi_and_derivative(m: int, a: float, b: float, x: np.ndarray):
    """P_m^{(a,b)}(x) and d/dx P_m^{(a,b)}(x) = (m+a+b+1)/2 P_{m-1}^{(a+1,b+1)}(x)."""
    p = _jacobi_value(m, a, b, x)
    if m == 0:
        return p, np.zeros_like(p)
    dp = 0.5 * (m + a + b + 1.0) * _jacobi_value(m - 1, a + 1.0, b + 1.0, x)
    return p, dp


def gauss_jacobi_rule(m: int, a: float, b: float) -> QuadratureRule:
    """m-point Gauss-Jacobi rule for the weight (1-t)^a (1+t)^b on [-1, 1].

    Nodes are the roots of P_m^{(a,b)}, found by Newton iteration from
    Chebyshev seeds (all roots in parallel, 100-iteration cap, 1e-14
    residual target).  Exact for polynomials of degree <= 2m-1.
    """
    if m < 1:
        raise ValueError("node count must be >= 1")
    if a <= -1.0 or b <= -1.0:
        raise ValueError("Jacobi parameters must exceed -1")
    k = np.arange(m)
    x = -np.cos((2.0 * k + 1.0) * np.pi / (2.0 * m))
    converged = False
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _jacobi_and_derivative(m, a, b, x)
        # Newton with deflation against the other current approximants keeps
        # the iterates separated even for strongly asymmetric (a, b).
        if m > 1:
            diff = x[:, None] - x[None, :]
            np.fill_diagonal(diff, np.inf)
            s = (1.0 / diff).sum(axis=1)
        else:
            s = 0.0
        delta = p / (dp - p * s)
        x = x - delta
        if np.max(np.abs(delta)) < NEWTON_TOL:
            converged = True
            break
    if not converged:
        worst = int(np.argmax(np.abs(delta)))
        raise QuadratureError(
            f"Jacobi root finder stalled at node {worst} of {m}, "
            f"(a, b) = ({a}, {b}): residual {abs(delta[worst]):.3e}")
    x = np.sort(x)
    if np.any(np.abs(x) >= 1.0) or (m > 1 and np.min(np.diff(x)) < 1e-14):
        bad = int(np.argmin(np.diff(x))) if m > 1 else 0
        raise QuadratureError(f"Jacobi nodes collapsed near index {bad}")
    _, dp = _jacobi_and_derivative(m, a, b, x)
    logc = ((a + b + 1.0) * math.log(2.0) + math.lgamma(a + m + 1.0)
            + math.lgamma(b + m + 1.0) - math.lgamma(a + b + m + 1.0)
            - math.lgamma(m + 1.0))
    w = math.exp(logc) / ((1.0 - x * x) * dp * dp)
    measure = math.exp((a + b + 1.0) * math.log(2.0) + math.lgamma(a + 1.0)
                       + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0))
    return QuadratureRule(x, w, domain="interval", total_measure=measure,
                          meta={"a": a, "b": b})


def gauss_legendre_interval(m: int, lo: float, hi: float) -> QuadratureRule:
    """Gauss-Legendre rule mapped onto [lo, hi]."""
    base = gauss_jacobi_rule(m, 0.0, 0.0)
    half = 0.5 * (hi - lo)
    return QuadratureRule(lo + half * (base.nodes + 1.0), half * base.weights,
                          domain="interval", total_measure=hi - lo)


def jacobi_weight_moment(j: int, a: float, b: float) -> float:
    """Closed-form moment  int_{-1}^{1} t^j (1-t)^a (1+t)^b dt.

    Expands t^j = 2^{-j} ((1+t) - (1-t))^j so each term is a Beta integral;
    the binomial coefficients cancel against the Beta denominators, so the
    alternating sum stays benign.
    """
    total = 0.0
    for i in range(j + 1):
        logterm = ((a + b + 1.0) * math.log(2.0)
                   + math.lgamma(a + j - i + 1.0) + math.lgamma(b + i + 1.0)
                   - math.lgamma(a + b + j + 2.0)
                   + math.lgamma(j + 1.0) - math.lgamma(i + 1.0) - math.lgamma(j - i + 1.0))
        total += (-1.0) ** (j - i) * math.exp(logterm)
    return total


def sphere_area(n: int) -> float:
    """Surface measure of the unit n-sphere: 2 pi^{(n+1)/2} / Gamma((n+1)/2).

    n = 0 is allowed (two points, measure 2); it closes the chord-integral
    recursion for zonal reductions on S^2.
    """
    if n < 0:
        raise ValueError("dimension must be >= 0")
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def _circle_rule(m: int) -> QuadratureRule:
    """Uniform (trapezoid) rule on S^1, exact for trig degree < m."""
    phi = 2.0 * np.pi * np.arange(m) / m
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    w = np.full(m, 2.0 * np.pi / m)
    return QuadratureRule(nodes, w, domain="sphere", total_measure=2.0 * np.pi,
                          meta={"n": 1})


def sphere_grid(n: int, resolution: int) -> QuadratureRule:
    """Product quadrature grid on S^n with nodes as unit vectors in R^{n+1}.

    Gauss-Jacobi in each polar angle (weight (1 - t^2)^{(p-1)/2} after
    t = cos theta, where p is the sin-power of that angle) times the uniform
    rule in the final azimuth.  With ``resolution`` polar nodes per angle and
    2*resolution azimuth points the rule is exact for polynomials of ambient
    degree <= 2*resolution - 1, and the weight sum reproduces sphere_area(n)
    to roundoff.
    """
    if n == 1:
        return _circle_rule(max(resolution, 4))
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported sphere dimension n={n}")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")

    # polar angles theta_1..theta_{n-1} carry sin-powers n-1, n-2, ..., 1
    polar = [gauss_jacobi_rule(resolution, (p - 1) / 2.0, (p - 1) / 2.0)
             for p in range(n - 1, 0, -1)]
    az = 2 * resolution
    phi = 2.0 * np.pi * np.arange(az) / az
    wphi = 2.0 * np.pi / az

    grids = np.meshgrid(*[r.nodes for r in polar], phi, indexing="ij")
    wgrids = np.meshgrid(*[r.weights for r in polar],
                         np.full(az, wphi), indexing="ij")
    cosr = [g.ravel() for g in grids[:-1]]
    sinr = [np.sqrt(1.0 - c * c) for c in cosr]
    phir = grids[-1].ravel()

    coords = []
    running = np.ones_like(phir)
    for c, s in zip(cosr, sinr):
        coords.append(running * c)
        running = running * s
    coords.append(running * np.cos(phir))
    coords.append(running * np.sin(phir))
    nodes = np.stack(coords, axis=1)

    w = np.ones_like(phir)
    for wg in wgrids:
        w = w * wg.ravel()
    return QuadratureRule(nodes, w, domain="sphere",
                          total_measure=sphere_area(n),
                          meta={"n": n, "resolution": resolution})


def ball_grid(n: int, r_max: float, resolution: int, kappa: float = 1.0) -> QuadratureRule:
    """Product rule on the geodesic ball of radius r_max in hyperbolic n-space.

    Radial Gauss-Legendre nodes carrying the (sinh(sqrt(kappa) r)/sqrt(kappa))^{n-1}
    volume factor, crossed with a sphere_grid(n-1) direction rule.  Nodes are
    stored as r * direction in R^n; no node sits at r = 0 (every kernel in
    scope is singular or needs a limit there).
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported ball dimension n={n}")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    radial = gauss_legendre_interval(resolution, 0.0, r_max)
    sk = math.sqrt(kappa)
    rw = radial.weights * (np.sinh(sk * radial.nodes) / sk) ** (n - 1)
    directions = sphere_grid(n - 1, resolution)

    r = np.repeat(radial.nodes, len(directions))
    u = np.tile(directions.nodes, (len(radial), 1))
    w = np.repeat(rw, len(directions)) * np.tile(directions.weights, len(radial))
    nodes = r[:, None] * u
    return QuadratureRule(nodes, w, domain="ball",
                          meta={"n": n, "r_max": r_max, "resolution": resolution,
                                "kappa": kappa})
