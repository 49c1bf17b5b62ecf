"""Extraction of e^{+-i lambda d} amplitudes from sampled oscillatory kernels.

Kernels in scope look like  envelope(d) * (b_+(d) e^{i lam d} + b_-(d) e^{-i lam d})
with b_+- varying on an O(1) scale once the geometric envelope (a power of
sin d or sinh d) is divided out.  Solving the 2x2 system from a sample pair a
quarter period apart then recovers b_+- with O(offset) accuracy uniformly in
d, which is what the conformance checks need near d ~ 1/lam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AmplitudeExtraction", "extract_pair_amplitudes"]


@dataclass(frozen=True)
class AmplitudeExtraction:
    """Per-pair modulation amplitudes b_+- extracted at base points d."""

    d: np.ndarray
    offset: float
    lam: float
    b_plus: np.ndarray
    b_minus: np.ndarray
    ill_conditioned: bool

    def reconstruct(self, t: np.ndarray) -> np.ndarray:
        """Modulation b_+ e^{i lam t} + b_- e^{-i lam t} at points t (one per pair)."""
        t = np.asarray(t, dtype=float)
        return (self.b_plus * np.exp(1j * self.lam * t)
                + self.b_minus * np.exp(-1j * self.lam * t))

    @property
    def envelope_bound(self) -> np.ndarray:
        return np.abs(self.b_plus) + np.abs(self.b_minus)


def extract_pair_amplitudes(mod_base: np.ndarray, mod_offset: np.ndarray,
                            lam: float, d: np.ndarray, offset: float,
                            cond_floor: float = 0.1) -> AmplitudeExtraction:
    """Solve for (b_+, b_-) from modulation samples at d and d + offset.

    mod_base/mod_offset are kernel values already divided by the geometric
    envelope.  Flags the extraction ill-conditioned when |sin(lam*offset)|
    drops below ``cond_floor`` (phase pair near-degenerate).
    """
    d = np.asarray(d, dtype=float)
    m1 = np.asarray(mod_base, dtype=complex)
    m2 = np.asarray(mod_offset, dtype=complex)
    e = np.exp(1j * lam * d)
    q = np.exp(1j * lam * offset)
    det = 1.0 / q - q  # -2i sin(lam * offset)
    ill = bool(abs(np.sin(lam * offset)) < cond_floor)
    b_plus = (m1 / (e * q) - m2 / e) / det
    b_minus = (m2 * e - m1 * e * q) / det
    return AmplitudeExtraction(d=d, offset=offset, lam=lam,
                               b_plus=b_plus, b_minus=b_minus,
                               ill_conditioned=ill)
