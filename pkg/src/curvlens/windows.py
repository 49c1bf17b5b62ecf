"""Smooth cutoffs and the dyadic window family, with closed-form jets.

All windows are built from one C-infinity smoothstep
    S(x) = e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)}),   S = 0 for x <= 0, 1 for x >= 1,
so every member has exact jets (no numeric differentiation) and genuinely
flat clamps outside its transition band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, jet_where

__all__ = ["WindowFamily", "JetWindow", "smoothstep", "default_windows",
           "gaussian_degree_window"]

_LOG2 = np.log(2.0)
_CLIP = 1e-3  # smoothstep argument clamp; S and all jets vanish to fp zero there


def _smoothstep_jet(xj: Jet) -> Jet:
    """Jet of S at xj; xj values assumed already inside (0, 1)."""
    a = (-(xj.reciprocal())).exp()
    b = (-((1.0 - xj).reciprocal())).exp()
    return a / (a + b)


def smoothstep(x) -> np.ndarray:
    """Scalar/array smoothstep value: 0 below 0, 1 above 1, C^inf between."""
    x = np.asarray(x, dtype=float)
    inner = np.clip(x, _CLIP, 1.0 - _CLIP)
    with np.errstate(under="ignore"):
        a = np.exp(-1.0 / inner)
        b = np.exp(-1.0 / (1.0 - inner))
        s = a / (a + b)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, s))


@dataclass(frozen=True)
class JetWindow:
    """A window with value and jet evaluation.

    ``builder`` maps a variable Jet (base points anywhere on the line) to the
    window's Jet; clamped regions carry exactly constant jets.
    """

    name: str
    builder: object
    support: tuple

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(self.jet(t, 0).value)

    def jet(self, t, order: int) -> Jet:
        t = np.asarray(t, dtype=float)
        return self.builder(Jet.variable(t, order))


def _transition(tj: Jet, lo: float, hi: float, rising: bool) -> Jet:
    """Smoothstep in t between lo and hi (constant jets outside), on log-free axis."""
    t = np.asarray(tj.value, dtype=float)
    width = hi - lo
    safe = Jet([np.clip(t, lo + _CLIP * width, hi - _CLIP * width)] + tj.coeffs[1:])
    with np.errstate(under="ignore"):
        s = _smoothstep_jet((safe - lo) * (1.0 / width))
    if not rising:
        s = 1.0 - s
    flat_lo = Jet.constant(0.0 if rising else 1.0, tj.order, like=t)
    flat_hi = Jet.constant(1.0 if rising else 0.0, tj.order, like=t)
    return jet_where(t <= lo, flat_lo, jet_where(t >= hi, flat_hi, s))


def _g0(tj: Jet) -> Jet:
    """Dyadic generator: 1 for t <= 1, 0 for t >= 2, smoothstep in log2 t between.

    Using the logarithmic axis makes beta(t) = g0(t) - g0(2t) an exact
    telescoping partition: sum_j beta(2^-j t) = 1 for every t > 0.
    """
    t = np.asarray(tj.value, dtype=float)
    order = tj.order
    safe = Jet([np.clip(t, 1.0 + _CLIP, 2.0 - _CLIP)] + tj.coeffs[1:])
    with np.errstate(under="ignore"):
        u = safe.log() * (1.0 / _LOG2)
        s = 1.0 - _smoothstep_jet(u)
    one = Jet.constant(1.0, order, like=t)
    zero = Jet.constant(0.0, order, like=t)
    return jet_where(t <= 1.0, one, jet_where(t >= 2.0, zero, s))


@dataclass(frozen=True)
class WindowFamily:
    """The cutoff collection used by every kernel decomposition.

    beta   : Littlewood-Paley bump, support (1/2, 2), sum_j beta(2^-j t) = 1;
    beta0  : 1 - sum_{j>=0} beta(2^-j t), identically 1 near 0, support [0, 1];
    rho    : even cutoff, 1 on |t| <= 1/2, support [-1, 1];
    eta    : even cutoff, 1 on |t| <= 1/4, support [-1/2, 1/2];
    chi    : even cutoff, 1 on |t| <= 1, support [-2, 2].
    """

    beta: JetWindow = field(default=None)
    beta0: JetWindow = field(default=None)
    rho: JetWindow = field(default=None)
    eta: JetWindow = field(default=None)
    chi: JetWindow = field(default=None)

    def partition_residual(self, t: np.ndarray, j_lo: int = -40, j_hi: int = 60) -> float:
        """max |sum_j beta(2^-j t) - 1| over the grid (t > 0)."""
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for j in range(j_lo, j_hi + 1):
            total += self.beta(t * 2.0 ** (-j))
        return float(np.max(np.abs(total - 1.0)))

    def beta0_partition_residual(self, t: np.ndarray, j_hi: int = 60) -> float:
        """max |beta0(t) + sum_{j=0..j_hi} beta(2^-j t) - 1| over the grid."""
        t = np.asarray(t, dtype=float)
        total = self.beta0(t).astype(float).copy()
        for j in range(0, j_hi + 1):
            total += self.beta(t * 2.0 ** (-j))
        return float(np.max(np.abs(total - 1.0)))


def default_windows() -> WindowFamily:
    beta = JetWindow("beta", lambda tj: _g0(tj) - _g0(tj * 2.0), (0.5, 2.0))
    beta0 = JetWindow("beta0", lambda tj: _g0(tj * 2.0), (0.0, 1.0))

    def even(builder):
        # evenness: evaluate at |t|; jets only requested for t > 0 in practice
        def wrapped(tj: Jet) -> Jet:
            t = np.asarray(tj.value, dtype=float)
            flipped = Jet([np.abs(t)] + [c * np.sign(t) ** (j + 1)
                                         for j, c in enumerate(tj.coeffs[1:])])
            return builder(flipped)
        return wrapped

    rho = JetWindow("rho", even(lambda tj: _transition(tj, 0.5, 1.0, rising=False)),
                    (-1.0, 1.0))
    eta = JetWindow("eta", even(lambda tj: _transition(tj, 0.25, 0.5, rising=False)),
                    (-0.5, 0.5))
    chi = JetWindow("chi", even(lambda tj: _transition(tj, 1.0, 2.0, rising=False)),
                    (-2.0, 2.0))
    return WindowFamily(beta=beta, beta0=beta0, rho=rho, eta=eta, chi=chi)


def gaussian_degree_window(kmax: int, width: float) -> np.ndarray:
    """exp(-(k/width)^2) for k = 0..kmax; suppresses truncation ringing."""
    k = np.arange(kmax + 1, dtype=float)
    return np.exp(-((k / width) ** 2))
