"""Truncated Taylor jets for exact nested differentiation.

The hyperbolic kernel formulas apply (1/sinh t * d/dt) several times to
window-times-exponential profiles.  Finite differencing those would wreck the
superpolynomial decay checks, so profiles are evaluated in jet arithmetic:
a Jet stores Taylor coefficients c_0..c_order at a base point, coefficients
may be numpy arrays, and all operations are exact truncations.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Jet", "JetOrderError", "jet_where"]


class JetOrderError(ValueError):
    """Requested a derivative beyond the carried jet order."""


class Jet:
    """Taylor polynomial c_0 + c_1 h + ... + c_order h^order at a base point.

    Coefficients are scalars or numpy arrays (one jet per grid point).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = list(coeffs)
        if not self.coeffs:
            raise ValueError("a jet needs at least the value coefficient")

    @classmethod
    def variable(cls, t, order: int) -> "Jet":
        t = np.asarray(t)
        one = np.ones_like(t) if t.ndim else 1.0
        zero = np.zeros_like(t) if t.ndim else 0.0
        coeffs = [t, one] + [zero] * (order - 1)
        return cls(coeffs[: order + 1])

    @classmethod
    def constant(cls, value, order: int, like=None) -> "Jet":
        if like is not None:
            value = value * np.ones_like(like)
            zero = np.zeros_like(like)
        else:
            zero = value * 0
        return cls([value] + [zero] * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative_value(self, j: int):
        """j-th derivative of the underlying function at the base point."""
        if j > self.order:
            raise JetOrderError(f"jet of order {self.order} cannot give derivative {j}")
        return self.coeffs[j] * math.factorial(j)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1])

    def derivative(self) -> "Jet":
        """Jet of the derivative function; drops one order."""
        if self.order == 0:
            raise JetOrderError("jet order insufficient for another derivative")
        return Jet([(j + 1) * self.coeffs[j + 1] for j in range(self.order)])

    # -- ring operations -------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return Jet([self.coeffs[j] + other.coeffs[j] for j in range(n + 1)])
        out = list(self.coeffs)
        out[0] = out[0] + other
        return Jet(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return Jet([
                sum(self.coeffs[i] * other.coeffs[j - i] for i in range(j + 1))
                for j in range(n + 1)
            ])
        return Jet([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet([c / other for c in self.coeffs])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- analytic functions ----------------------------------------------
    def _compose(self, derivs) -> "Jet":
        """f(self) given derivs[j] = f^(j)(value); nilpotent-series composition."""
        n = self.order
        zero = self.coeffs[0] * 0
        tilde = Jet([zero] + self.coeffs[1:])
        out = Jet.constant(derivs[0] + zero, n)
        power = Jet.constant(1.0 + zero, n)
        for j in range(1, n + 1):
            power = power * tilde
            out = out + power * (derivs[j] / math.factorial(j))
        return out

    def reciprocal(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs = [((-1.0) ** j) * math.factorial(j) / a0 ** (j + 1)
                  for j in range(self.order + 1)]
        return self._compose(derivs)

    def exp(self) -> "Jet":
        e = np.exp(self.coeffs[0])
        return self._compose([e] * (self.order + 1))

    def log(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs = [np.log(a0)]
        derivs += [((-1.0) ** (j - 1)) * math.factorial(j - 1) / a0 ** j
                   for j in range(1, self.order + 1)]
        return self._compose(derivs)

    def sin(self) -> "Jet":
        s, c = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = [s, c, -s, -c]
        return self._compose([cycle[j % 4] for j in range(self.order + 1)])

    def cos(self) -> "Jet":
        s, c = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = [c, -s, -c, s]
        return self._compose([cycle[j % 4] for j in range(self.order + 1)])

    def sinh(self) -> "Jet":
        s, c = np.sinh(self.coeffs[0]), np.cosh(self.coeffs[0])
        return self._compose([s if j % 2 == 0 else c for j in range(self.order + 1)])

    def cosh(self) -> "Jet":
        s, c = np.sinh(self.coeffs[0]), np.cosh(self.coeffs[0])
        return self._compose([c if j % 2 == 0 else s for j in range(self.order + 1)])

    def __repr__(self):
        return f"Jet({self.coeffs!r})"


def jet_where(mask, a: Jet, b: Jet) -> Jet:
    """Elementwise select between two array-coefficient jets."""
    n = min(a.order, b.order)
    return Jet([np.where(mask, a.coeffs[j], b.coeffs[j]) for j in range(n + 1)])
