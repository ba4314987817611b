"""Dimensional constants for the sixth-order constant Q-curvature problem.

Everything is evaluated in exact rational arithmetic first (``fractions``)
and only then converted to floats, so identity checks can be exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class DimensionalConstants:
    n: int
    K0: float
    K2: float
    K4: float
    J0: float
    J1: float
    J2: float
    J3: float
    L0: float
    Qn: float
    cn: float
    cn_hat: float
    eps_star: float
    lambda1: float
    lambda2: float
    lambda3: float
    a_n: float
    b_n: float
    c_einstein: float
    A_n: float
    B_n: float
    C_n: float
    gamma_n: float
    two_sharp: float
    exact: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def q(self) -> float:
        """Exponent of the nonlinearity, (n+6)/(n-6)."""
        return (self.n + 6) / (self.n - 6)

    @property
    def p(self) -> float:
        """Exponent of the linearized potential, 12/(n-6)."""
        return 12 / (self.n - 6)

    @property
    def hamiltonian_cyl(self) -> float:
        return -3.0 * self.K0 * self.eps_star**2 / self.n

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "exact"}
        return out


def _exact(n: int) -> dict:
    F = Fraction
    lam1 = F(n - 6, 2) ** 2
    lam2 = F(n - 2, 2) ** 2
    lam3 = F(n + 2, 2) ** 2
    K4_val = F(3 * n**2 - 12 * n + 44, 4)
    K2_val = F(3 * n**4 - 24 * n**3 + 72 * n**2 - 96 * n + 304, 16)
    # a 2^-8 prefactor (K0_alt) is inconsistent with K4, K2; use the product of roots
    K0 = lam1 * lam2 * lam3
    Qn = F(n * (n**4 - 20 * n**2 + 64), 32)
    cn = F(n - 6, 2) * Qn
    nn1 = n * (n - 1)
    return dict(
        lambda1=lam1,
        lambda2=lam2,
        lambda3=lam3,
        K4=K4_val,
        K2=K2_val,
        K0=K0,
        K0_alt=F((n - 6) ** 2 * (n - 2) ** 2 * (n + 2) ** 2, 256),
        J0=F(3 * n**4 - 18 * n**3 - 192 * n**2 + 1864 * n - 3952, 8),
        J1=F(3 * n**3 + 3 * n**2 - 244 * n + 620, 2),
        J2=F(2 * n**2 + 13 * n - 68),
        J3=F(2 * (n + 1)),
        L0=F(3 * n**2 - 12 * n - 20, 4),
        Qn=Qn,
        cn=cn,
        cn_hat=F(n + 6, n - 6) * cn,
        a_n=F((n - 6) * (n + 4), 4 * nn1),
        b_n=F((n - 4) * (n + 2), 4 * nn1),
        c_einstein=F(n - 2, 4 * (n - 1)),
        A_n=F(3 * n**2 - 6 * n - 32, 4 * nn1),
        B_n=F(3 * n**4 - 12 * n**3 - 52 * n**2 + 128 * n + 192, 16 * nn1**2),
        C_n=F((n**4 - 20 * n**2 + 64) * (n - 6), 64 * n**2 * (n - 1) ** 3),
        gamma_n=F(n - 6, 2),
        two_sharp=F(2 * n, n - 6),
    )


def build_constants(n: int) -> DimensionalConstants:
    if isinstance(n, bool) or int(n) != n:
        raise TypeError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n <= 6:
        raise ValueError(f"n must be >= 7 (got n={n}); the critical exponent 2n/(n-6) is undefined")
    ex = _exact(n)
    flt = {k: float(v) for k, v in ex.items() if k != "K0_alt"}
    # equilibrium of K0 v = cn v^{(n+6)/(n-6)}
    eps_star = (flt["K0"] / flt["cn"]) ** ((n - 6) / 12)
    return DimensionalConstants(n=n, eps_star=eps_star, exact=ex, **flt)


def identity_residuals(c: DimensionalConstants) -> dict:
    """Residuals of every structural identity the constants must satisfy."""
    ex = c.exact
    n = c.n
    l1, l2, l3 = ex["lambda1"], ex["lambda2"], ex["lambda3"]
    nn1 = n * (n - 1)
    R = nn1
    cn_prod = Fraction((n - 6) * (n - 4) * (n - 2) * n * (n + 2) * (n + 4), 64)
    eq = c.K0 * c.eps_star - c.cn * c.eps_star**c.q
    return {
        "K4_vieta": float(ex["K4"] - (l1 + l2 + l3)),
        "K2_vieta": float(ex["K2"] - (l1 * l2 + l1 * l3 + l2 * l3)),
        "K0_vieta": float(ex["K0"] - l1 * l2 * l3),
        "cn_product": float(ex["cn"] - cn_prod),
        "cn_einstein": float(ex["cn"] - ex["a_n"] * ex["b_n"] * ex["c_einstein"] * R**3),
        "a_n_sphere": float(ex["a_n"] * nn1 - Fraction((n - 6) * (n + 4), 4)),
        "b_n_sphere": float(ex["b_n"] * nn1 - Fraction((n - 4) * (n + 2), 4)),
        "c_sphere": float(ex["c_einstein"] * nn1 - Fraction(n * (n - 2), 4)),
        "A_n_sum": float(ex["A_n"] - (ex["a_n"] + ex["b_n"] + ex["c_einstein"])),
        "C_n_product": float(ex["C_n"] - ex["a_n"] * ex["b_n"] * ex["c_einstein"]),
        "equilibrium_rel": abs(eq) / (c.K0 * c.eps_star),
    }


def sphere_eigendata(n: int, j: int) -> tuple[float, int]:
    """Eigenvalue j(j+n-2) of -Laplacian on S^{n-1} and its multiplicity."""
    if j < 0:
        raise ValueError(f"spherical harmonic degree must be >= 0, got {j}")
    if n < 7:
        raise ValueError(f"n must be >= 7, got {n}")
    lam = j * (j + n - 2)
    if j == 0:
        return float(lam), 1
    mult = (2 * j + n - 2) * math.factorial(j + n - 3) // (math.factorial(n - 2) * math.factorial(j))
    return float(lam), mult
