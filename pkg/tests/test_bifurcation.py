import math

import numpy as np
import pytest
from scipy.special import gamma

from q6.bifurcation import (
    NonPositiveProfile,
    count_from_length,
    count_solutions,
    cosh_power_integral,
    cosh_power_quadrature,
    cylinder_quotient,
    period_function,
    sphere_reference,
    sphere_volume,
    theorem1_diagnostics,
    yamabe_quotient_radial,
    yamabe_shortcut,
)
from q6.constants import build_constants
from q6.profiles import AnalyticProfile
from q6.spectral import cylinder_indicial


def test_sphere_volumes_gamma_oracle():
    for k in range(1, 16):
        assert sphere_volume(k) == pytest.approx(2 * math.pi ** ((k + 1) / 2) / gamma((k + 1) / 2), rel=1e-14)
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(9) == pytest.approx(25.5016, abs=1e-4)
    assert sphere_volume(10) == pytest.approx(20.7251, abs=1e-4)


@pytest.mark.parametrize("n", range(7, 16))
def test_cosh_integral_closed_form_vs_quadrature(n):
    assert cosh_power_quadrature(n) == pytest.approx(cosh_power_integral(n), rel=1e-12)


@pytest.mark.parametrize("n", range(7, 16))
def test_sphere_identity(n):
    assert sphere_reference(build_constants(n)).identity_residual <= 1e-10


def test_sphere_reference_value(c10):
    ref = sphere_reference(c10)
    assert ref.cosh_integral == pytest.approx(0.81269, abs=1e-5)
    assert ref.reference == pytest.approx(2520 * 20.7251**0.6, rel=5e-3)
    assert ref.relative_gap <= 1e-10


def test_cylinder_quotient_closed_form(c10):
    T = 2.0
    es = c10.eps_star
    w = sphere_volume(9)
    n = 10
    raw = (2 / (n - 6)) * c10.K0 * es**2 * w * T / (w * T * es ** (2 * n / (n - 6))) ** ((n - 6) / n)
    assert cylinder_quotient(c10, T) == pytest.approx(raw, rel=1e-13)
    prof = AnalyticProfile.cylinder(c10, T)
    assert yamabe_quotient_radial(c10, prof) == pytest.approx(raw, rel=1e-13)


def test_quotient_shortcut_on_orbit(c10, orbit_half):
    q = yamabe_quotient_radial(c10, orbit_half.profile)
    assert q == pytest.approx(yamabe_shortcut(c10, orbit_half.profile), rel=1e-6)
    assert q < sphere_reference(c10).reference


def test_quotient_of_non_solution(c10):
    T = cylinder_indicial(c10).T_cyl
    q = yamabe_quotient_radial(c10, AnalyticProfile.cosine(1.0, 0.5, T))
    assert np.isfinite(q) and q > 0


def test_quotient_rejects_sign_change(c10):
    with pytest.raises(NonPositiveProfile):
        yamabe_quotient_radial(c10, AnalyticProfile.cosine(0.2, 0.5, 3.0))


@pytest.mark.parametrize("T,k", [(0.3, 1), (1.0, 1), (1.0000001, 2), (2.0, 2), (2.5, 3), (3.0, 3)])
def test_count_from_length(T, k):
    assert count_from_length(T, 1.0) == k


@pytest.mark.parametrize("kappa", [1, 2, 3, 4])
def test_count_boundary_lower_cell(c10, kappa):
    T_cyl = cylinder_indicial(c10).T_cyl
    assert count_from_length(kappa * T_cyl, T_cyl) == kappa


def test_count_short_circle(c10):
    res = count_solutions(c10, 0.5 * cylinder_indicial(c10).T_cyl)
    assert res.count == 1
    assert [w.kind for w in res.witnesses] == ["cylinder"]


def test_count_two_and_a_half(c10, sweep20):
    T_cyl = cylinder_indicial(c10).T_cyl
    T = 2.5 * T_cyl
    res = count_solutions(c10, T, seed_orbits=sweep20.orbits)
    assert res.count == 3 and len(res.witnesses) == 3 and not res.failures
    periods = sorted(w.period for w in res.witnesses[1:])
    assert periods == pytest.approx([T / 2, T])
    for w in res.witnesses[1:]:
        assert w.orbit.period == pytest.approx(w.period, rel=1e-12)
        assert w.defect <= 1e-6


def test_period_function_table(c10, sweep20):
    tab = period_function(c10, np.linspace(0.99, 0.3, 8) * c10.eps_star)
    assert tab.is_monotone()
    assert tab.periods[0] == pytest.approx(tab.T_cyl, rel=0.01)


def test_diagnostic_rows(c10, sweep20):
    rows, summary = theorem1_diagnostics(c10, sweep20.orbits)
    ref = summary["sphere_reference"]
    assert summary["all_below_sphere"]
    assert not summary["non_monotone_pairs"]
    assert summary["last_relative_gap"] <= 0.02
    first = rows[0]
    assert first.yamabe_quotient == pytest.approx(cylinder_quotient(c10, first.period), rel=1e-3)
    assert first.yamabe_quotient < ref


def test_diagnostics_flag_non_monotone(c10, sweep20):
    fam = [sweep20.orbits[5], sweep20.orbits[2], sweep20.orbits[8]]
    rows, summary = theorem1_diagnostics(c10, fam)
    assert summary["non_monotone_pairs"] == [1]
    assert "gap-not-decreasing" in rows[1].flag
