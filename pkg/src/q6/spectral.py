"""Linearization about radial solutions, projected on spherical harmonics.

The mode-j Jacobi equation is written as

    psi6 + c4 psi4 + c3 psi3 + c2 psi2 + c1 psi1 + (c0 + potential_scale * v^p) psi = 0

with p = 12/(n-6).  Two coefficient sets are available:

``form="factorized"`` (default)
    The cylinder operator on the j-th eigenspace factors as
    prod_k (-d_t^2 + mu_k(j)) with sqrt(mu_k) = j + (n+2)/2, j + (n-2)/2,
    j + (n-6)/2.  This form annihilates the translation Jacobi field of the
    spherical solution in mode 1.
``form="substituted"``
    Direct substitution Delta_theta -> -lambda_j into the angular operator
    built from J0..J3, L0.  Kept for comparison only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from q6.constants import DimensionalConstants, sphere_eigendata


@dataclass(frozen=True)
class ModeOperator:
    j: int
    lambda_j: float
    c4: float
    c3: float
    c2: float
    c1: float
    c0_const: float
    potential_scale: float
    form: str = "factorized"

    @property
    def symmetric(self) -> bool:
        return self.c3 == 0 and self.c1 == 0

    def char_poly(self, potential: float = 0.0) -> np.ndarray:
        """Coefficients (highest first) of z^6 + c4 z^4 + ... for a frozen potential value."""
        return np.array([1.0, 0.0, self.c4, self.c3, self.c2, self.c1, self.c0_const + self.potential_scale * potential])

    def companion(self, potential: float = 0.0) -> np.ndarray:
        N = np.zeros((6, 6))
        N[np.arange(5), np.arange(1, 6)] = 1.0
        N[5] = [-(self.c0_const + self.potential_scale * potential), -self.c1, -self.c2, -self.c3, -self.c4, 0.0]
        return N

    def symbol(self, omega) -> np.ndarray:
        """Fourier symbol of prod_k(-d^2 + mu_k) (factorized form only): prod(omega^2 + mu_k)."""
        w2 = np.asarray(omega, dtype=float) ** 2
        return -(-w2**3 + self.c4 * w2**2 - self.c2 * w2 + self.c0_const)


def mode_operator(c: DimensionalConstants, j: int, form: str = "factorized") -> ModeOperator:
    if j < 0:
        raise ValueError(f"mode index must be >= 0, got {j}")
    lam, _ = sphere_eigendata(c.n, j)
    if form == "factorized":
        roots = [(j + (c.n + 2) / 2) ** 2, (j + (c.n - 2) / 2) ** 2, (j + (c.n - 6) / 2) ** 2]
        s1 = sum(roots)
        s2 = roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2]
        s3 = roots[0] * roots[1] * roots[2]
        return ModeOperator(j, lam, -s1, 0.0, s2, 0.0, -s3, c.cn_hat, form)
    if form == "substituted":
        # P_rad + P_ang with Delta -> -lam, Delta^2 -> lam^2, Delta^3 -> -lam^3
        return ModeOperator(
            j, lam,
            c4=-c.K4 - 2 * lam,
            c3=c.J3 * lam,
            c2=c.K2 - c.J2 * lam + 3 * lam**2,
            c1=c.J1 * lam,
            c0_const=-c.K0 - c.J0 * lam - c.L0 * lam**2 - lam**3,
            potential_scale=c.cn_hat,
            form=form,
        )
    raise ValueError(f"unknown form {form!r}")


def closed_form_coefficients(c: DimensionalConstants, j: int) -> dict:
    """Alternative closed-form coefficient list for the projected equation,
    kept for the comparison table."""
    lam, _ = sphere_eigendata(c.n, j)
    return {
        "c4": -c.K4 + 2 * lam,
        "c3": lam * c.J3,
        "c2": c.K2 + 2 * c.J2 * lam,
        "c1": lam * c.J1,
        "c0_const": -c.K0 + c.J0 * lam - c.L0 * lam**2 + lam**3,
    }


def coefficient_comparison(c: DimensionalConstants, jmax: int) -> list[dict]:
    rows = []
    for j in range(jmax + 1):
        fac = mode_operator(c, j, "factorized")
        sub = mode_operator(c, j, "substituted")
        disp = closed_form_coefficients(c, j)
        for name in ("c4", "c3", "c2", "c1", "c0_const"):
            rows.append({"j": j, "coefficient": name, "factorized": getattr(fac, name),
                         "substituted": getattr(sub, name), "displayed": disp[name]})
    return rows


@dataclass
class IndicialResult:
    j: int
    roots_z: np.ndarray
    roots_rho: np.ndarray | None = None
    beta_cyl: float | None = None
    T_cyl: float | None = None
    beta_max_im_rho: float | None = None


def indicial_cubic(c: DimensionalConstants) -> np.ndarray:
    """rho^3 - K4 rho^2 + K2 rho + 12 K0/(n-6), coefficients highest first."""
    const = float(c.exact["K0"] * 12 / (c.n - 6))
    return np.array([1.0, -c.K4, c.K2, const])


def cylinder_indicial(c: DimensionalConstants, j: int = 0, form: str = "factorized") -> IndicialResult:
    if j < 0:
        raise ValueError(f"mode index must be >= 0, got {j}")
    pot = c.eps_star**c.p
    if j == 0:
        rho = np.roots(indicial_cubic(c))
        # polish the real root: the frequency of small orbits hinges on it
        neg = [r.real for r in rho if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and r.real < 0]
        if len(neg) != 1:
            raise RuntimeError(f"expected one negative real root of the indicial cubic, got {rho}")
        r0 = neg[0]
        coeffs = indicial_cubic(c)
        for _ in range(5):
            f = np.polyval(coeffs, r0)
            df = np.polyval(np.polyder(coeffs), r0)
            r0 -= f / df
        z = np.concatenate([np.sqrt(rho.astype(complex)), -np.sqrt(rho.astype(complex))])
        beta = math.sqrt(-r0)
        return IndicialResult(0, np.sort_complex(z), rho, beta, 2 * math.pi / beta,
                              float(np.max(rho.imag)))
    op = mode_operator(c, j, form)
    z = np.roots(op.char_poly(pot))
    return IndicialResult(j, np.sort_complex(z))


@dataclass
class MonodromyResult:
    j: int
    T: float
    M: np.ndarray
    multipliers: np.ndarray
    exponents: np.ndarray
    det_M: float
    flags: list = field(default_factory=list)
    translation_residual: float | None = None
    translation_backward_error: float | None = None
    nearest_to_one: float | None = None

    @property
    def min_abs_real(self) -> float:
        return float(np.min(np.abs(self.exponents.real)))

    @property
    def min_abs_imag(self) -> float:
        return float(np.min(np.abs(self.exponents.imag)))


def _potential_fn(c, v):
    return np.abs(v) ** c.p


def _fundamental_pieces(c, op: ModeOperator, y0, T, tol, max_dt, frozen_potential=None, reseed=None):
    """Fundamental matrices over consecutive sub-intervals of [0, T].

    The orbit state is carried along so the coefficients come from the same
    trajectory; each piece starts from the identity.  ``reseed(t)`` restarts
    the orbit state at each node, which keeps thin-neck orbits from drifting
    off along their unstable directions.
    """
    k = max(1, int(math.ceil(T / max_dt)))
    dt = T / k
    base = op.companion(0.0)
    ps = op.potential_scale

    def rhs(t, z):
        phi = z[6:].reshape(6, 6)
        if frozen_potential is None:
            from q6.profiles import ode_rhs

            y = z[:6]
            dy = ode_rhs(c, y)
            pot = _potential_fn(c, y[0])
        else:
            dy = np.zeros(6)
            pot = frozen_potential
        dphi = base @ phi
        dphi[5] -= ps * pot * phi[0]
        return np.concatenate([dy, dphi.ravel()])

    y = np.asarray(y0, dtype=float)
    pieces, states = [], [y]
    for i in range(k):
        if reseed is not None and i > 0:
            y = reseed(i * dt)
        z0 = np.concatenate([y, np.eye(6).ravel()])
        sol = solve_ivp(rhs, (0.0, dt), z0, method="DOP853", rtol=tol, atol=tol)
        if sol.status != 0:
            raise RuntimeError(sol.message)
        z = sol.y[:, -1]
        y = z[:6]
        pieces.append(z[6:].reshape(6, 6))
        states.append(y)
    return pieces, states


def monodromy(c: DimensionalConstants, orbit, j: int, form: str = "factorized", tol: float = 1e-12,
              max_dt: float = 0.25) -> MonodromyResult:
    """Monodromy of the mode-j Jacobi system along ``orbit`` over one period.

    ``orbit`` may be a DelaunayOrbit or a float (a cylinder of that length).
    det(M) is the product of the piece determinants, each well conditioned.
    """
    op = mode_operator(c, j, form)
    if isinstance(orbit, (int, float)):
        T = float(orbit)
        pieces, _ = _fundamental_pieces(c, op, np.zeros(6), T, tol, max_dt, frozen_potential=c.eps_star**c.p)
        y0 = None
    else:
        T = orbit.period
        y0 = orbit.profile.evaluate(0.0)[:, 0]
        pieces, states = _fundamental_pieces(
            c, op, y0, T, tol, max_dt, reseed=lambda t: orbit.profile.evaluate(t)[:, 0]
        )
    M = np.eye(6)
    det = 1.0
    for P in pieces:
        M = P @ M
        det *= np.linalg.det(P)
    mult = np.linalg.eigvals(M)
    expo = np.log(mult.astype(complex)) / T
    res = MonodromyResult(j, T, M, mult, expo, float(det))
    mags = np.abs(mult)
    if mags.max() / max(mags.min(), 1e-300) > 1e12:
        res.flags.append("IllConditioned")
    res.nearest_to_one = float(np.min(np.abs(mult - 1.0)))
    if y0 is not None and j == 0:
        # d/dt of the orbit state solves the mode-0 Jacobi system: each piece
        # must carry it to the next node, and M must fix it
        from q6.profiles import ode_rhs

        k = len(pieces)
        ws = [ode_rhs(c, orbit.profile.evaluate(T * i / k)[:, 0]) for i in range(k)] + [None]
        ws[-1] = ws[0]
        res.translation_residual = max(
            float(np.linalg.norm(P @ a - b) / np.linalg.norm(b)) for P, a, b in zip(pieces, ws[:-1], ws[1:])
        )
        w = ws[0]
        res.translation_backward_error = float(
            np.linalg.norm(M @ w - w) / (np.linalg.norm(M, 2) * np.linalg.norm(w))
        )
    return res


def frozen_monodromy_exact(c: DimensionalConstants, j: int, T: float, form: str = "factorized") -> np.ndarray:
    op = mode_operator(c, j, form)
    return expm(op.companion(c.eps_star**c.p) * T)


@dataclass
class MorseResult:
    index: int
    near_zero: int
    eigenvalues: np.ndarray
    scale: float
    tol_zero: float


def _jacobi_pencil(c, v, period, j):
    """Symmetric matrix I - A^{-1/2} V A^{-1/2} congruent to the Jacobi operator
    A - V on the period circle, A = prod(-d^2 + mu_k) by Fourier collocation."""
    op = mode_operator(c, j, "factorized")
    N = v.size
    omega = 2 * math.pi * np.fft.fftfreq(N, d=period / N)
    a = op.symbol(omega)
    if np.any(a <= 0):
        raise ValueError("non-positive leading symbol; operator is not positive")
    Fm = np.fft.fft(np.eye(N), axis=0)
    Ainv_half = np.real(np.fft.ifft(Fm / np.sqrt(a)[:, None], axis=0))
    Ainv_half = 0.5 * (Ainv_half + Ainv_half.T)
    V = op.potential_scale * _potential_fn(c, v)
    H = np.eye(N) - Ainv_half @ (V[:, None] * Ainv_half)
    return 0.5 * (H + H.T), a, omega


def morse_index_periodic(c: DimensionalConstants, v: np.ndarray, period: float, j: int = 0,
                         rel_zero: float = 1e-6) -> MorseResult:
    """Negative directions of the second variation on the period circle.

    ``v`` are samples of a period-``period`` profile on the uniform grid
    t_k = k period / N.  The count is taken on the pencil normalized by the
    positive leading part, which has the same inertia (Sylvester) and a
    bounded spectrum, so the zero threshold is meaningful.
    """
    v = np.asarray(v, dtype=float)
    if v.size < 256:
        raise ValueError("gridN must be >= 256")
    H, _, _ = _jacobi_pencil(c, v, period, j)
    ev = np.linalg.eigvalsh(H)
    scale = float(np.max(np.abs(ev)))
    tz = rel_zero * scale
    return MorseResult(int(np.sum(ev < -tz)), int(np.sum(np.abs(ev) <= tz)), ev, scale, tz)


def jacobi_rayleigh(c: DimensionalConstants, v: np.ndarray, w: np.ndarray, period: float, j: int = 0) -> float:
    """<w, (A - V) w> / <w, A w> for samples w on the same grid as v."""
    op = mode_operator(c, j, "factorized")
    N = v.size
    omega = 2 * math.pi * np.fft.fftfreq(N, d=period / N)
    a = op.symbol(omega)
    wh = np.fft.fft(w)
    Aw_energy = float(np.sum(a * np.abs(wh) ** 2) / N)
    Vw = float(np.sum(op.potential_scale * _potential_fn(c, v) * w**2))
    return (Aw_energy - Vw) / Aw_energy


def orbit_morse(c: DimensionalConstants, orbit, j: int = 0, gridN: int = 256, repeats: int = 1,
                periodicity_tol: float = 1e-5):
    if orbit.diagnostics.get("periodicity_defect", 0.0) > periodicity_tol:
        raise ValueError("profile is not periodic to the required tolerance")
    L = repeats * orbit.period
    t = L * np.arange(gridN) / gridN
    y = orbit.profile.evaluate(t)
    return morse_index_periodic(c, y[0], L, j), jacobi_rayleigh(c, y[0], y[1], L, j)


class DegenerateSign(ValueError):
    pass


def nodal_count(w: np.ndarray, zero_tol: float = 1e-12) -> int:
    """Number of maximal sign-definite arcs of a sampled periodic function.

    Samples with |w| <= zero_tol * max|w| are treated as nodes and skipped.
    """
    w = np.asarray(w, dtype=float)
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale < 1e-12:
        raise DegenerateSign("function vanishes identically")
    s = np.sign(w[np.abs(w) > zero_tol * scale])
    changes = int(np.sum(s != np.roll(s, 1)))
    return max(1, changes)
