import math

import numpy as np
import pytest

from roughwet.homogenize import fit_linear, y_average
from roughwet.hysteresis import (
    NoValidLineError,
    Profile2D,
    angle_vs_offset,
    branch_seed,
    drop2d_angle,
    drop2d_range,
    hysteresis_range,
    pillar_cassie_baxter,
    self_consistent_heights,
)
from roughwet.solver import SolverConfig, solve_free

from conftest import DEG, surface
import oracles

ADV = 90 + oracles.THETA_G_MAX_DEG
REC = 90 - oracles.THETA_G_MAX_DEG


def test_flat_table_is_constant():
    t = angle_vs_offset(surface("flat", theta=70), 16)
    assert np.allclose(t.theta_a, 70 * DEG) and t.valid.all()
    hr = hysteresis_range(t)
    assert hr.advancing == hr.receding


def test_wave_z_range():
    t = angle_vs_offset(surface("wave_z", theta=90), 64)
    hr = hysteresis_range(t)
    assert math.degrees(hr.advancing) == pytest.approx(ADV, abs=0.2)
    assert math.degrees(hr.receding) == pytest.approx(REC, abs=0.2)
    v = t.theta_a[t.valid]
    assert hr.receding <= v.min() and v.max() <= hr.advancing
    assert np.all(np.diff(t.offsets) > 0) and t.offsets[-1] < t.surface.eps


def test_table_periodic_in_offset():
    s = surface("wave_yz", "checkerboard", theta1=60, theta2=110)
    a = angle_vs_offset(s, 16)
    from roughwet.contactline import apparent_angle, lift_contact_line
    for z0, th in zip(a.offsets, a.theta_a):
        assert apparent_angle(lift_contact_line(s, z0 + s.eps)) == pytest.approx(th, abs=1e-12)


def test_stripes_z_two_values():
    s = surface("flat", "stripes_z", theta1=60, theta2=120)
    t = angle_vs_offset(s, 32)
    assert set(np.round(np.degrees(t.theta_a), 9)) <= {60.0, 120.0}
    assert set(t.fraction) == {0.0, 1.0}


def test_patterned_flat_exact():
    hr = hysteresis_range(angle_vs_offset(surface("flat", "stripes_z", theta1=110, theta2=60), 16))
    assert math.degrees(hr.advancing) == pytest.approx(110, abs=1e-10)
    assert math.degrees(hr.receding) == pytest.approx(60, abs=1e-10)


def test_length_fraction_reported():
    t = angle_vs_offset(surface("flat", "checkerboard", theta1=60, theta2=120), 8)
    assert np.allclose(t.fraction, 0.5)
    c = np.cos(t.theta_a)
    assert np.allclose(c, 0.5 * (math.cos(60 * DEG) + math.cos(120 * DEG)), atol=1e-12)


def test_invalid_rows_and_empty_table():
    t = angle_vs_offset(surface("wave_y", amplitude=0.25, theta=10), 8)
    assert not t.valid.any() and np.all(np.isnan(t.theta_a))
    with pytest.raises(NoValidLineError, match="no partial-wetting"):
        hysteresis_range(t)
    with pytest.raises(ValueError):
        angle_vs_offset(surface(), 4)


def test_csv(tmp_path):
    t = angle_vs_offset(surface("wave_z", theta=90), 8)
    p = t.write_csv(tmp_path / "a.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "offset,theta_a_deg,cos_theta_a,nu,valid" and len(lines) == 9


def test_drop2d():
    flat = Profile2D(lambda z: 0.0, lambda z: 0.0, lambda z: 70 * DEG)
    assert math.degrees(drop2d_angle(flat, 0.3)) == pytest.approx(70)
    tilted = Profile2D(lambda z: z, lambda z: math.tan(20 * DEG), lambda z: 90 * DEG)
    assert math.degrees(drop2d_angle(tilted, 0.0)) == pytest.approx(70)
    two = Profile2D(lambda z: 0.0, lambda z: 0.0, lambda z: 110 * DEG if z % 1 < 0.5 else 60 * DEG)
    adv, rec = drop2d_range(two, np.linspace(0, 1, 41))
    assert math.degrees(adv) == pytest.approx(110) and math.degrees(rec) == pytest.approx(60)


def test_pillar_formula():
    assert pillar_cassie_baxter(1.0, 100 * DEG) == pytest.approx(100 * DEG)
    assert pillar_cassie_baxter(0.0, 100 * DEG) == pytest.approx(math.pi)
    assert math.degrees(pillar_cassie_baxter(0.25, 100 * DEG)) == pytest.approx(
        oracles.PILLAR_025_100_DEG, abs=1e-9)
    with pytest.raises(ValueError):
        pillar_cassie_baxter(1.5, 1.0)


def test_self_consistent_heights_are_roots():
    s = surface("wave_z", theta=90, eps=1 / 8)
    z, th = self_consistent_heights(s, span=1.0)
    assert z.size > 4
    assert np.allclose(z, (1 + 0.1 * s.eps * (1 + np.sin(2 * np.pi * z / s.eps))) / np.tan(th), atol=1e-9)


@pytest.mark.slow
def test_branches_reproduce_table():
    s = surface("wave_z", theta=90, eps=1 / 32)
    hr = hysteresis_range(angle_vs_offset(s, 64))
    for target in (hr.advancing, hr.receding):
        sol = solve_free(s, branch_seed(s, target), SolverConfig())
        assert sol.converged
        assert abs(fit_linear(*y_average(sol)).theta_a - target) <= 1 * DEG
