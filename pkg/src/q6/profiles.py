"""Closed-form solutions, the cylindrical change of variables, the radial
vector field and its conserved energy.

A state is the 6-vector ``(v, v', v'', v''', v'''', v''''')``; arrays of
states are laid out with shape ``(6, m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from q6.constants import DimensionalConstants

# reversor of the radial ODE: t -> -t flips the odd derivatives
REVERSOR = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class CylState:
    t: float
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (6,):
            raise ValueError(f"state must have 6 components, got shape {y.shape}")
        object.__setattr__(self, "y", y)


def fowler_forward(u: Callable[[float], float], n: int, t):
    """Cylindrical value e^{(6-n)t/2} u(e^{-t}) of a radial function u(r)."""
    t = np.asarray(t, dtype=float)
    return np.exp(0.5 * (6 - n) * t) * u(np.exp(-t))


def fowler_inverse(v: Callable[[float], float], n: int, r):
    """Inverse transform: r^{(6-n)/2} v(-ln r)."""
    r = np.asarray(r, dtype=float)
    return r ** (0.5 * (6 - n)) * v(-np.log(r))


def signed_power(x, a):
    return np.sign(x) * np.abs(x) ** a


def ode_rhs(c: DimensionalConstants, y: np.ndarray) -> np.ndarray:
    """First-order form of -v6 + K4 v4 - K2 v2 + K0 v = cn v^q.

    Works on a single state (6,) or a batch (6, m).  The nonlinearity is
    extended oddly to v < 0.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite state passed to ode_rhs")
    v6 = c.K4 * y[4] - c.K2 * y[2] + c.K0 * y[0] - c.cn * signed_power(y[0], c.q)
    return np.concatenate([y[1:], v6[None] if np.ndim(v6) else [v6]], axis=0)


def _cosh_power_terms(a: float, order: int) -> list[list[tuple[float, float, int]]]:
    # d^k/dt^k cosh^a as sums of coef * cosh^p * sinh^q
    terms = [[(1.0, a, 0)]]
    for _ in range(order):
        acc: dict[tuple[float, int], float] = {}
        for coef, p, q in terms[-1]:
            if p != 0:
                key = (p - 1, q + 1)
                acc[key] = acc.get(key, 0.0) + coef * p
            if q != 0:
                key = (p + 1, q - 1)
                acc[key] = acc.get(key, 0.0) + coef * q
        terms.append([(cf, p, q) for (p, q), cf in acc.items() if cf != 0.0])
    return terms


def cosh_power_derivatives(a: float, t, order: int = 6) -> np.ndarray:
    """Rows k = 0..order of d^k/dt^k cosh(t)^a, evaluated analytically."""
    t = np.asarray(t, dtype=float)
    ch, sh = np.cosh(t), np.sinh(t)
    out = []
    for row in _cosh_power_terms(a, order):
        val = np.zeros_like(t)
        for coef, p, q in row:
            val = val + coef * ch**p * sh**q
        out.append(val)
    return np.array(out)


def spherical_state(c: DimensionalConstants, t) -> np.ndarray:
    """cosh(t)^{(6-n)/2} and its first five derivatives."""
    return cosh_power_derivatives(-c.gamma_n, t, 5)


def cylinder_state(c: DimensionalConstants) -> np.ndarray:
    return np.array([c.eps_star, 0, 0, 0, 0, 0], dtype=float)


def hamiltonian_radial(c: DimensionalConstants, y) -> np.ndarray | float:
    y = np.asarray(y, dtype=float)
    v, v1, v2, v3, v4, v5 = y
    h = (
        0.5 * v3**2
        + 0.5 * c.K4 * v2**2
        + 0.5 * c.K2 * v1**2
        - 0.5 * c.K0 * v**2
        + v5 * v1
        - v4 * v2
        - c.K4 * v3 * v1
    )
    return h + nonlinear_potential(c, v)


def nonlinear_potential(c: DimensionalConstants, v):
    """F(v) = cn (n-6)/(2n) |v|^{2n/(n-6)}."""
    return c.cn * (c.n - 6) / (2 * c.n) * np.abs(v) ** c.two_sharp


def potential_G(c: DimensionalConstants, v):
    return nonlinear_potential(c, v) - 0.5 * c.K0 * np.asarray(v) ** 2


def ode_residual(c: DimensionalConstants, y: np.ndarray, v6: np.ndarray) -> np.ndarray:
    """Pointwise residual of the radial ODE given states and sixth derivatives."""
    v = y[0]
    return -v6 + c.K4 * y[4] - c.K2 * y[2] + c.K0 * v - c.cn * signed_power(v, c.q)


class AnalyticProfile:
    """A radial profile given by a closed form for v and its derivatives.

    ``derivs(t)`` must return an array of shape (7, m): v and its first six
    derivatives.  ``period`` is None for non-periodic profiles.
    """

    def __init__(self, derivs: Callable[[np.ndarray], np.ndarray], span, period=None, name=""):
        self._derivs = derivs
        self.span = (float(span[0]), float(span[1]))
        self.period = period
        self.name = name

    def evaluate(self, t) -> np.ndarray:
        return np.asarray(self._derivs(np.atleast_1d(np.asarray(t, dtype=float))))[:6]

    def sixth_derivative(self, t) -> np.ndarray:
        return np.asarray(self._derivs(np.atleast_1d(np.asarray(t, dtype=float))))[6]

    def sample(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Uniform periodic grid (endpoint excluded) when periodic, closed grid otherwise."""
        t0, t1 = self.span
        if self.period is not None:
            t = t0 + self.period * np.arange(m) / m
        else:
            t = np.linspace(t0, t1, m)
        return t, self.evaluate(t)

    @classmethod
    def spherical(cls, c: DimensionalConstants, span=(-5.0, 5.0)):
        return cls(lambda t: cosh_power_derivatives(-c.gamma_n, t, 6), span, None, "spherical")

    @classmethod
    def cylinder(cls, c: DimensionalConstants, period: float = 1.0):
        def derivs(t):
            out = np.zeros((7, t.size))
            out[0] = c.eps_star
            return out

        return cls(derivs, (0.0, period), period, "cylinder")

    @classmethod
    def cosine(cls, mean: float, amp: float, period: float):
        """mean + amp cos(2 pi t / period), a smoke-test non-solution."""
        w = 2 * math.pi / period

        def derivs(t):
            out = np.empty((7, t.size))
            for k in range(7):
                # d^k cos(wt) = w^k cos(wt + k pi/2)
                out[k] = amp * w**k * np.cos(w * t + k * math.pi / 2)
            out[0] += mean
            return out

        return cls(derivs, (0.0, period), period, "cosine")


def residual_on_profile(c: DimensionalConstants, profile, m: int = 1000) -> float:
    """Max ODE residual over ``m`` sample points of a profile."""
    t, y = profile.sample(m)
    v6 = profile.sixth_derivative(t)
    return float(np.max(np.abs(ode_residual(c, y, v6))))
