import math

import numpy as np
import pytest
import sympy as sp

from q6.delaunay import BlowUp, StepFailure, integrate
from q6.profiles import (
    AnalyticProfile,
    CylState,
    cosh_power_derivatives,
    cylinder_state,
    fowler_forward,
    fowler_inverse,
    hamiltonian_radial,
    ode_rhs,
    residual_on_profile,
    spherical_state,
)

T = sp.symbols("t", real=True)


def sym_sphere(n):
    return sp.cosh(T) ** sp.Rational(6 - n, 2)


def sym_hamiltonian(c, v):
    d = [sp.diff(v, T, k) for k in range(6)]
    K0, K2, K4, cn = (sp.Rational(c.exact[k].numerator, c.exact[k].denominator) for k in ("K0", "K2", "K4", "cn"))
    n = c.n
    return (sp.Rational(1, 2) * d[3] ** 2 + K4 / 2 * d[2] ** 2 + K2 / 2 * d[1] ** 2 - K0 / 2 * d[0] ** 2
            + d[5] * d[1] - d[4] * d[2] - K4 * d[3] * d[1]
            + cn * sp.Rational(n - 6, 2 * n) * d[0] ** sp.Rational(2 * n, n - 6))


def test_fowler_homogeneous_maps_to_one():
    n = 10
    u = lambda r: r ** ((6 - n) / 2)
    assert np.allclose(fowler_forward(u, n, np.linspace(-3, 3, 7)), 1.0)


def test_fowler_sphere_maps_to_cosh_power():
    n = 10
    u = lambda r: ((1 + r**2) / 2) ** ((6 - n) / 2)
    t = np.linspace(-4, 4, 17)
    assert np.allclose(fowler_forward(u, n, t), np.cosh(t) ** ((6 - n) / 2), rtol=1e-13)


def test_fowler_constant():
    assert fowler_forward(lambda r: np.ones_like(r), 10, 1.0) == pytest.approx(math.exp(-2))


def test_fowler_inverse_round_trip():
    n = 10
    v = lambda t: 1 + 0.3 * np.cos(t)
    r = np.array([0.1, 0.5, 1.0, 2.0])
    u = lambda rr: fowler_inverse(v, n, rr)
    assert np.allclose(fowler_forward(u, n, -np.log(r)), v(-np.log(r)))


def test_ode_rhs_equilibrium_and_zero(c10):
    assert ode_rhs(c10, cylinder_state(c10))[5] == pytest.approx(0.0, abs=1e-12)
    assert np.all(ode_rhs(c10, np.zeros(6)) == 0)


def test_ode_rhs_rejects_nonfinite(c10):
    with pytest.raises(ValueError):
        ode_rhs(c10, np.array([np.nan, 0, 0, 0, 0, 0]))


def test_ode_rhs_sphere_sixth_derivative_symbolic(c10):
    v = sym_sphere(10)
    exact = [float(sp.diff(v, T, k).subs(T, 0)) for k in range(7)]
    y0 = spherical_state(c10, 0.0)
    assert np.allclose(y0, exact[:6], atol=1e-14)
    assert ode_rhs(c10, y0)[5] == pytest.approx(exact[6], rel=1e-14)


@pytest.mark.parametrize("n", [7, 10, 13])
def test_cosh_power_derivatives_against_sympy(n):
    a = sp.Rational(6 - n, 2)
    ts = [-2.0, -0.3, 0.0, 0.7, 3.0]
    num = cosh_power_derivatives(float(a), np.array(ts), 6)
    for k in range(7):
        f = sp.lambdify(T, sp.diff(sp.cosh(T) ** a, T, k))
        assert np.allclose(num[k], [f(t) for t in ts], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("n", [8, 10, 12])
def test_sphere_solves_ode_symbolically(n):
    from q6.constants import build_constants

    c = build_constants(n)
    v = sym_sphere(n)
    K0, K2, K4, cn = (sp.Rational(c.exact[k].numerator, c.exact[k].denominator) for k in ("K0", "K2", "K4", "cn"))
    res = -sp.diff(v, T, 6) + K4 * sp.diff(v, T, 4) - K2 * sp.diff(v, T, 2) + K0 * v - cn * v ** sp.Rational(n + 6, n - 6)
    for t0 in (0, sp.Rational(2, 5), sp.Rational(13, 10)):
        assert abs(float(res.subs(T, t0).evalf(40))) < 1e-25


def test_hamiltonian_symbolic_sphere_zero(c10):
    h = sym_hamiltonian(c10, sym_sphere(10))
    for t0 in (0, sp.Rational(1, 2), 2):
        assert abs(float(h.subs(T, t0).evalf(40))) < 1e-25


def test_hamiltonian_symbolic_cylinder(c10):
    es = sp.Rational(2304, 5040) ** sp.Rational(1, 3)
    h = sym_hamiltonian(c10, es + 0 * T)
    assert sp.simplify(h - sp.Rational(-3 * 2304, 10) * es**2) == 0
    assert hamiltonian_radial(c10, cylinder_state(c10)) == pytest.approx(float(h), rel=1e-12)


def test_hamiltonian_zero_state(c10):
    assert hamiltonian_radial(c10, np.zeros(6)) == 0.0


def test_spherical_state(c10):
    y = spherical_state(c10, 0.0)
    assert y[0] == 1.0 and y[1] == y[3] == y[5] == 0.0
    assert spherical_state(c10, 1.0)[0] == pytest.approx(0.41997, abs=5e-6)
    t = 20.0
    assert spherical_state(c10, t)[0] == pytest.approx(2.0**c10.gamma_n * math.exp(-c10.gamma_n * t), rel=1e-12)


def test_spherical_hamiltonian_vanishes(c10):
    t = np.linspace(-5, 5, 201)
    h = hamiltonian_radial(c10, spherical_state(c10, t))
    assert np.max(np.abs(h)) < 1e-8


def test_residual_on_closed_forms(c10):
    assert residual_on_profile(c10, AnalyticProfile.spherical(c10), 1000) <= 1e-8
    assert residual_on_profile(c10, AnalyticProfile.cylinder(c10, 2.0), 1000) <= 1e-12


def test_residual_on_non_solution_is_large(c10):
    assert residual_on_profile(c10, AnalyticProfile.cosine(1.0, 0.5, 2.5), 200) > 1.0


def test_residual_on_delaunay(c10, orbit_half):
    # sixth derivative comes from differencing the dense output
    assert residual_on_profile(c10, orbit_half.profile, 1000) <= 1e-6


def test_cylstate_shape():
    with pytest.raises(ValueError):
        CylState(0.0, np.zeros(5))


def test_integrate_cylinder_is_constant(c10):
    prof = integrate(c10, cylinder_state(c10), (0.0, 10.0))
    _, y = prof.sample(101)
    assert np.max(np.abs(y[0] - c10.eps_star)) <= 1e-12
    assert prof.hamiltonian_drift <= 1e-12


def test_integrate_sphere_high_precision(c10):
    prof = integrate(c10, spherical_state(c10, 0.0), (0.0, 5.0), method="taylor-mp")
    y = prof.evaluate(5.0)[:, 0]
    assert np.allclose(y, spherical_state(c10, 5.0), atol=1e-8, rtol=0)


def test_integrate_sphere_double_precision_short_span(c10):
    prof = integrate(c10, spherical_state(c10, 0.0), (0.0, 2.0))
    assert prof.evaluate(2.0)[0, 0] == pytest.approx(math.cosh(2.0) ** -2, abs=1e-6)


def test_integrate_escape(c10):
    with pytest.raises((BlowUp, StepFailure)):
        integrate(c10, [c10.eps_star, 1.0, 0, 0, 0, 0], (0.0, 50.0))
