import numpy as np
import pytest

from q6.delaunay import (
    NoConvergence,
    Tolerances,
    continue_family,
    cross_check_period,
    period_of,
    shoot_delaunay,
    shoot_period,
    sphere_distance,
)
from q6.profiles import ode_residual
from q6.spectral import cylinder_indicial


def test_half_neck_orbit_invariants(c10, orbit_half):
    o = orbit_half
    assert o.flag == ""
    assert o.defect_norm <= 1e-9
    y0 = o.profile.evaluate(0.0)[:, 0]
    assert y0[0] == pytest.approx(o.epsilon, rel=1e-12)
    assert np.max(np.abs(y0[[1, 3, 5]])) <= 1e-9
    d = o.diagnostics
    assert d["necksize_rel_err"] <= 1e-8
    assert d["periodicity_defect"] <= 1e-6
    assert c10.hamiltonian_cyl < o.hamiltonian < 0
    assert 0 < d["min_v"] and np.isfinite(d["max_v"])


@pytest.mark.parametrize("frac", [0.8, 0.65])
def test_forward_flow_closes_after_one_period(c10, frac):
    # thinner necks amplify rounding past 1e-6 within one period
    chk = cross_check_period(c10, shoot_delaunay(c10, frac * c10.eps_star))
    assert chk["checked"]
    assert chk["mismatch"] <= 1e-6
    assert chk["rel_diff"] <= 1e-8


def test_hamiltonian_constant_along_orbit(c10, orbit_half):
    assert orbit_half.diagnostics["hamiltonian_drift"] <= 1e-8 * abs(c10.hamiltonian_cyl)


def test_residual_a_posteriori(c10, orbit_half):
    t = np.linspace(0.1, orbit_half.period - 0.1, 300)
    y = orbit_half.profile.evaluate(t)
    res = ode_residual(c10, y, orbit_half.profile.sixth_derivative(t))
    assert np.max(np.abs(res)) <= 1e-6


def test_near_cylinder_period(c10, orbit_near):
    T_cyl = cylinder_indicial(c10).T_cyl
    assert abs(period_of(orbit_near) - T_cyl) / T_cyl <= 0.01


def test_single_point_grid(c10):
    fam = continue_family(c10, [0.99 * c10.eps_star])
    assert len(fam) == 1
    assert fam.orbits[0].period == pytest.approx(cylinder_indicial(c10).T_cyl, rel=0.01)


def test_period_is_twice_first_turning_time(orbit_half):
    # the symmetric solver's unknown tau is the first positive zero of v'
    o = orbit_half
    t = np.linspace(0.02, o.tau - 0.02, 200)
    assert np.all(o.profile.evaluate(t)[1] > 0)
    assert o.profile.evaluate(o.tau)[1, 0] == pytest.approx(0.0, abs=1e-9)
    assert o.period == 2 * o.tau


@pytest.mark.parametrize("bad", [1.0, 1.2, 0.0, -0.1])
def test_rejects_eps_outside_family(c10, bad):
    with pytest.raises(ValueError):
        shoot_delaunay(c10, bad * c10.eps_star)


def test_sweep_to_020_is_monotone(c10):
    fam = continue_family(c10, np.linspace(0.99, 0.2, 20) * c10.eps_star)
    assert len(fam) == 20 and not fam.failures
    assert np.all(np.diff([o.period for o in fam]) > 0)


def test_thin_necks_approach_sphere(c10, sweep20):
    dist = [sphere_distance(c10, o) for o in sweep20]
    assert np.all(np.diff(dist) < 0)
    assert dist[-1] < 0.01


def test_grid_validation(c10):
    with pytest.raises(ValueError):
        continue_family(c10, [0.3, 0.5])
    with pytest.raises(ValueError):
        continue_family(c10, [0.5 * c10.eps_star, c10.eps_star])


def test_guess_direct_solve(c10, orbit_half):
    o = shoot_delaunay(c10, orbit_half.epsilon, guess=(orbit_half.eps2, orbit_half.eps4))
    assert o.period == pytest.approx(orbit_half.period, rel=1e-9)


def test_shoot_period_hits_target(c10, sweep20):
    o = shoot_period(c10, 4.0, sweep20.orbits)
    assert o.period == 4.0
    assert o.flag == ""
    eps = [s.epsilon for s in sweep20]
    per = [s.period for s in sweep20]
    # bracketed by the sweep on the decreasing branch
    k = np.searchsorted(per, 4.0)
    assert eps[k] < o.epsilon < eps[k - 1]


def test_shoot_period_needs_seeds(c10):
    with pytest.raises(ValueError):
        shoot_period(c10, 3.0, [])


def test_newton_budget_exhaustion(c10):
    with pytest.raises(NoConvergence):
        shoot_delaunay(c10, 0.3 * c10.eps_star, guess=(50.0, -900.0), tol=Tolerances(max_newton=2))
