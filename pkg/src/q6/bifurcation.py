"""Period function, solution counting per cylinder length, and the sixth-order
Yamabe quotient along the Delaunay family."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from q6.constants import DimensionalConstants
from q6.delaunay import NoConvergence, Tolerances, continue_family, shoot_period
from q6.spectral import cylinder_indicial, orbit_morse


class WitnessNotFound(RuntimeError):
    pass


class NonPositiveProfile(ValueError):
    pass


def sphere_volume(k: int) -> float:
    """Volume of the unit k-sphere in R^{k+1}."""
    return 2 * math.exp(0.5 * (k + 1) * math.log(math.pi) - gammaln(0.5 * (k + 1)))


def cosh_power_integral(n: int) -> float:
    """Closed form of the integral of cosh(t)^{-n} over the real line."""
    return math.exp(0.5 * math.log(math.pi) + gammaln(0.5 * n) - gammaln(0.5 * (n + 1)))


def cosh_power_quadrature(n: int) -> float:
    # truncate where the integrand drops below 1e-16
    L = (16 * math.log(10) + n * math.log(2)) / n + 1.0
    val, _ = integrate.quad(lambda t: math.cosh(t) ** (-n), 0.0, L, epsabs=1e-17, epsrel=1e-13, limit=200)
    return 2 * val


@dataclass
class SphereReference:
    n: int
    omega_n: float
    omega_nm1: float
    cosh_integral: float
    reference: float
    reference_quadrature: float

    @property
    def identity_residual(self) -> float:
        return abs(self.omega_nm1 * self.cosh_integral - self.omega_n) / self.omega_n

    @property
    def relative_gap(self) -> float:
        return abs(self.reference - self.reference_quadrature) / self.reference


def sphere_reference(c: DimensionalConstants) -> SphereReference:
    n = c.n
    wn, wn1 = sphere_volume(n), sphere_volume(n - 1)
    ci = cosh_power_quadrature(n)
    return SphereReference(n, wn, wn1, ci, c.Qn * wn ** (6 / n), c.Qn * (wn1 * ci) ** (6 / n))


def _periodic_samples(profile, N):
    T = profile.period
    t = T * np.arange(N) / N
    return T, profile.evaluate(t)


def yamabe_quotient_radial(c: DimensionalConstants, profile, N: int = 1024) -> float:
    """Sixth-order Yamabe quotient of a T-periodic radial profile on S^1_T x S^{n-1}.

    The numerator uses the periodic integration by parts
    int v(-P v) = int (v''')^2 + K4 (v'')^2 + K2 (v')^2 + K0 v^2,
    with the trapezoid rule on the uniform periodic grid.
    """
    if profile.period is None:
        raise ValueError("profile must be periodic")
    T, y = _periodic_samples(profile, N)
    v = y[0]
    if np.any(v <= 0):
        raise NonPositiveProfile("the Yamabe quotient needs a positive profile")
    w = sphere_volume(c.n - 1)
    dt = T / N
    energy = np.sum(y[3] ** 2 + c.K4 * y[2] ** 2 + c.K2 * y[1] ** 2 + c.K0 * v**2) * dt
    vol = np.sum(v**c.two_sharp) * dt
    return (2 / (c.n - 6)) * w * energy / (w * vol) ** ((c.n - 6) / c.n)


def yamabe_shortcut(c: DimensionalConstants, profile, N: int = 1024) -> float:
    """Qn (omega_{n-1} int v^{2n/(n-6)})^{6/n}: the quotient on exact solutions."""
    T, y = _periodic_samples(profile, N)
    vol = np.sum(y[0] ** c.two_sharp) * T / N
    return c.Qn * (sphere_volume(c.n - 1) * vol) ** (6 / c.n)


def cylinder_quotient(c: DimensionalConstants, T: float) -> float:
    return c.Qn * (sphere_volume(c.n - 1) * T * c.eps_star**c.two_sharp) ** (6 / c.n)


@dataclass
class PeriodTable:
    orbits: list
    failures: list
    T_cyl: float

    @property
    def epsilons(self):
        return np.array([o.epsilon for o in self.orbits])

    @property
    def periods(self):
        return np.array([o.period for o in self.orbits])

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.periods) > 0))


def period_function(c: DimensionalConstants, eps_grid, tol: Tolerances | None = None) -> PeriodTable:
    fam = continue_family(c, eps_grid, tol)
    return PeriodTable(fam.orbits, fam.failures, cylinder_indicial(c, 0).T_cyl)


def count_from_length(T: float, T_cyl: float) -> int:
    """kappa with (kappa-1) T_cyl < T <= kappa T_cyl."""
    if T <= 0:
        raise ValueError("T must be positive")
    return max(1, int(math.ceil(T / T_cyl - 1e-12)))


@dataclass
class Witness:
    kind: str
    ell: int
    period: float
    epsilon: float
    defect: float
    orbit: object = None


@dataclass
class CountResult:
    T: float
    count: int
    witnesses: list
    failures: list = field(default_factory=list)


def count_solutions(c: DimensionalConstants, T: float, tol: Tolerances | None = None,
                    seed_orbits=None) -> CountResult:
    """Constant-Q metrics on S^1_T x S^{n-1}: the cylinder plus, for each
    ell = 1..kappa-1, the Delaunay orbit of fundamental period T/ell."""
    tol = tol or Tolerances()
    T_cyl = cylinder_indicial(c, 0).T_cyl
    kappa = count_from_length(T, T_cyl)
    witnesses = [Witness("cylinder", 0, T, c.eps_star, 0.0)]
    failures = []
    if kappa > 1:
        seeds = list(seed_orbits or [])
        if not seeds:
            seeds = continue_family(c, np.linspace(0.99, 0.05, 12) * c.eps_star, tol).orbits
        # shortest target first so each solve continues from the previous one
        for ell in range(kappa - 1, 0, -1):
            target = T / ell
            try:
                o = shoot_period(c, target, seeds, tol)
                seeds.append(o)
                witnesses.append(Witness("delaunay", ell, target, o.epsilon,
                                         o.diagnostics["periodicity_defect"], o))
            except (NoConvergence, ValueError) as exc:
                failures.append({"ell": ell, "period": target, "error": str(exc)})
        witnesses = [witnesses[0]] + sorted(witnesses[1:], key=lambda w: w.ell)
    return CountResult(T, kappa, witnesses, failures)


@dataclass
class BifurcationRow:
    epsilon: float
    period: float
    hamiltonian: float
    yamabe_quotient: float
    gap_to_sphere: float
    morse_index_mode0: int
    flag: str = ""


def theorem1_diagnostics(c: DimensionalConstants, family, N: int = 1024, gridN: int = 256):
    """Per-orbit quotient and gap to the sphere value; the returned summary
    records strict positivity of every gap and monotone decrease."""
    ref = sphere_reference(c).reference
    rows = []
    for o in family:
        q = yamabe_quotient_radial(c, o.profile, N)
        try:
            idx = orbit_morse(c, o, 0, gridN)[0].index
        except ValueError:
            idx = -1
        rows.append(BifurcationRow(o.epsilon, o.period, o.hamiltonian, q, ref - q, idx, o.flag))
    gaps = np.array([r.gap_to_sphere for r in rows])
    nonmono = [i for i in range(1, len(rows)) if not gaps[i] < gaps[i - 1]]
    for i in nonmono:
        rows[i].flag = ";".join(filter(None, [rows[i].flag, "gap-not-decreasing"]))
    summary = {
        "sphere_reference": ref,
        "all_below_sphere": bool(np.all(gaps > 0)),
        "non_monotone_pairs": nonmono,
        "last_relative_gap": float(gaps[-1] / ref) if len(gaps) else float("nan"),
    }
    return rows, summary
