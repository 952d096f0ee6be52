import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughwet.homogenize import (
    HomogenizedFit,
    convergence_study,
    error_norms,
    fit_linear,
    homogenized_minimizer,
    bound_checks,
    loglog_slope,
    y_average,
)
from roughwet.solver import SolverConfig, homogenized_energy, solve_free

from conftest import DEG, surface

X = np.linspace(0, 1, 201)


@pytest.fixture(scope="module")
def wenzel():
    return solve_free(surface("wave_y", theta=60), 0.0, SolverConfig())


def test_fit_examples():
    f = fit_linear(X, 0 * X)
    assert f.k == 0 and math.degrees(f.theta_a) == pytest.approx(90)
    assert math.degrees(fit_linear(X, 0.5774 * (1 - X)).theta_a) == pytest.approx(60, abs=0.01)
    assert math.degrees(fit_linear(X, -(1 - X)).theta_a) == pytest.approx(135, abs=1e-12)


def test_fit_flags_curved_profiles():
    f = fit_linear(X, np.sin(3 * X) * (1 - X))
    assert not f.planar and f.residual > 1e-2


def test_fit_window_guard():
    with pytest.raises(ValueError):
        fit_linear(X, X, window=(0.0, 0.5))


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(1.0, 179.0))
def test_minimizer_roundtrip(theta):
    u0, E = homogenized_minimizer(theta * DEG, X)
    f = fit_linear(X, u0)
    assert abs(f.theta_a - theta * DEG) <= 1e-10
    assert f.cos_theta_a == pytest.approx(math.cos(theta * DEG), abs=1e-12)
    assert E == pytest.approx(1 / math.hypot(1, f.k), abs=1e-12)
    # u0 minimizes the homogenized energy among nearby profiles
    bump = 0.01 * np.sin(np.pi * X) + 0.005 * (1 - X)
    c = math.cos(theta * DEG)
    assert homogenized_energy(X, u0, c) <= homogenized_energy(X, u0 + bump, c) + 1e-14


def test_minimizer_examples():
    assert homogenized_minimizer(math.pi / 2)[1] == pytest.approx(1.0)
    u, E = homogenized_minimizer(60 * DEG, np.array([0.0]))
    assert u[0] == pytest.approx(0.57735, abs=1e-5) and E == pytest.approx(0.86603, abs=1e-5)
    u, E = homogenized_minimizer(120 * DEG, np.array([0.0]))
    assert u[0] == pytest.approx(-0.57735, abs=1e-5) and E == pytest.approx(0.86603, abs=1e-5)


def test_y_average_of_zero_mean_perturbation():
    sol = solve_free(surface("flat"), 0.0, SolverConfig(nx=32, ny=16))
    iface, eps, k = sol.interface, sol.eps, 0.4
    x = iface.x
    iface.u = k * (1 - x) + eps * np.sin(2 * np.pi * iface.y / eps)[None, :] * x * (1 - x)
    Xa, ub = y_average(sol)
    assert np.allclose(ub, k * (1 - Xa), atol=1e-15)


def test_y_average_of_y_independent_solution(wenzel):
    sol = solve_free(surface("wave_z", theta=80), 0.0, SolverConfig())
    Xa, ub = y_average(sol)
    assert np.allclose(ub, sol.interface.columns_on(Xa)[:, 5], atol=1e-12)


def test_y_average_is_between_columns(wenzel):
    Xa, ub = y_average(wenzel)
    cols = wenzel.interface.columns_on(Xa)
    assert np.all(cols.min(1) - 1e-15 <= ub) and np.all(ub <= cols.max(1) + 1e-15)


def test_error_norms_flat():
    sol = solve_free(surface("flat", theta=60), 0.0, SolverConfig())
    fit = fit_linear(*y_average(sol))
    est1, est2 = error_norms(sol, fit)
    assert est1 <= 1e-6 and est2 <= 1e-6


def test_angles_agree_with_formula(wenzel):
    from roughwet.contactline import apparent_angle
    f = fit_linear(*y_average(wenzel))
    assert abs(f.theta_a - apparent_angle(wenzel.contact_line)) <= 1 * DEG


def test_homogenized_energy_bound(wenzel):
    Xa, ub = y_average(wenzel)
    c = math.cos(fit_linear(Xa, ub).theta_a)
    _, E0 = homogenized_minimizer(math.acos(c))
    assert E0 <= homogenized_energy(Xa, ub, c) + 1e-12


def test_bounds_hold(wenzel):
    checks = bound_checks(wenzel)
    assert len(checks) == 4 and all(c.ok for c in checks), [str(c) for c in checks]


def test_slope_helper():
    e = np.array([0.25, 0.125, 0.0625])
    assert loglog_slope(e, 3 * e) == pytest.approx(1.0)
    assert loglog_slope(e, 0 * e) is None


def test_flat_sweep_skips_slope(tmp_path):
    rep = convergence_study(lambda e: surface("flat", theta=60, eps=e), [0.25, 0.125, 0.0625],
                            SolverConfig(nx=32, ny=16))
    assert rep.slope is None and not rep.partial
    assert np.all(rep.est1 <= 1e-6)
    rep.write_csv(tmp_path / "c.csv")
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 4


def test_sweep_validation():
    with pytest.raises(ValueError):
        convergence_study(lambda e: surface(eps=e), [0.25, 0.125])
    with pytest.raises(ValueError):
        convergence_study(lambda e: surface(eps=e), [0.125, 0.25, 0.0625])


def test_partial_sweep_flagged():
    rep = convergence_study(lambda e: surface("wave_yz", eps=e), [0.25, 0.125, 0.0625],
                            SolverConfig(nx=16, ny=16, max_iter=1))
    assert rep.partial


def test_sweep_is_ordered_with_workers():
    fam = lambda e: surface("wave_y", theta=60, eps=e)  # noqa: E731
    a = convergence_study(fam, [0.25, 0.125, 0.0625], SolverConfig(nx=32, ny=16), workers=3)
    b = convergence_study(fam, [0.25, 0.125, 0.0625], SolverConfig(nx=32, ny=16))
    assert np.array_equal(a.eps, b.eps) and np.array_equal(a.est1, b.est1)


def test_literal_window_is_inside_default(wenzel):
    fit = fit_linear(*y_average(wenzel))
    full, _ = error_norms(wenzel, fit)
    inner, _ = error_norms(wenzel, fit, x_min=wenzel.eps * wenzel.surface.geometry.sup_norm)
    assert inner <= full
