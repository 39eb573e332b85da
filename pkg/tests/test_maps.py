import cmath
import math

import numpy as np
import pytest

from para_renorm.maps import (ContourEnclosureFailure, InvalidFraction, MapSpec, PeriodTooLarge,
                              alpha_from_c, contains_in_V, dividing_multiplier_check,
                              fixed_point_data, newton_fixed_point, orbit_deriv, periodic_points,
                              ply_disk, satellite_parameter, satellite_root_alpha, sigma_of)

L2 = math.log(2) / (2 * math.pi)


def test_quadratic_basics():
    m = MapSpec.quadratic(0.1)
    assert m.value(0) == 0
    assert m.deriv(0) == pytest.approx(cmath.exp(2j * math.pi * 0.1))
    assert m.critical_value() == pytest.approx(-4 / 27, abs=1e-12)
    assert abs(MapSpec.quadratic(0).second_deriv_at_0()) == pytest.approx(3.375)


def test_moebius_family():
    m = MapSpec.moebius(0.03 - 0.01j, 0.07)
    assert abs(m.deriv(m.critical_point())) < 1e-12
    assert m.critical_value() == pytest.approx(-4 / 27, abs=1e-12)
    with pytest.raises(ValueError):
        MapSpec.moebius(0.2, 0.07)
    fp = fixed_point_data(m)
    assert abs(fp.index) < 1e-8 or fp.index_residual < 1e-8
    assert fp.index_residual < 1e-8


def test_moebius_sigma_newton_vs_guess():
    m = MapSpec.moebius(0.02, 0.05 + 0.01j)
    s = sigma_of(m)
    assert abs(m.value(s) - s) < 1e-14
    assert abs(s - m.sigma_guess()) < 0.2 * abs(s)


@pytest.mark.parametrize("z, inside", [(0, True), (-1 / 3, True), (-1, False)])
def test_contains_in_V(z, inside):
    assert contains_in_V(z) is inside


def test_fixed_point_data_examples():
    a = 0.1
    fp = fixed_point_data(MapSpec.quadratic(a))
    closed = cmath.log(2 - cmath.exp(2j * math.pi * a)) / (2j * math.pi)
    assert abs(fp.beta - closed) < 1e-12
    assert abs(fp.index) < 1e-8
    assert fp.index_residual < 1e-8
    assert sigma_of(MapSpec.quadratic(0.25)) == pytest.approx(-16 * (1 - 1j) / 27, abs=1e-14)


def test_sigma_linear_in_alpha():
    ratios = [abs(sigma_of(MapSpec.quadratic(a))) / a for a in (1e-2, 1e-3, 1e-4, 1e-5)]
    D = max(max(ratios), 1 / min(ratios))
    assert D < 20
    assert ratios[-1] == pytest.approx(32 * math.pi / 27, rel=1e-3)


def test_contour_override_checked():
    with pytest.raises(ContourEnclosureFailure):
        fixed_point_data(MapSpec.quadratic(0.1), contour=(5, 1))


def test_periodic_points_period_one():
    a = 0.07 + 0.01j
    m = MapSpec.quadratic(a)
    cyc = periodic_points(m, 1)
    mults = sorted((c.multiplier for c in cyc), key=lambda x: x.real)
    lam = cmath.exp(2j * math.pi * a)
    assert np.allclose(sorted([lam, 2 - lam], key=lambda x: x.real), mults, atol=1e-10)


def test_period_two_multiplier_two_ways():
    m = MapSpec.quadratic(0.3)
    (cyc,) = periodic_points(m, 2)
    z = cyc.points[0]
    _, d = orbit_deriv(m, z, 2)
    assert abs(d - cyc.multiplier) < 1e-10
    assert abs(np.prod([m.deriv(p) for p in cyc.points]) - cyc.multiplier) < 1e-10
    res = sum(abs(m.value(m.value(p)) - p) for p in cyc.points)
    res += sum(abs(m.value(c.points[0]) - c.points[0]) for c in periodic_points(m, 1))
    assert res < 1e-10


def test_periodic_counts():
    m = MapSpec.quadratic(0.1 + 0.02j)
    for q, n in ((3, 2), (4, 3), (5, 6)):
        cycles = periodic_points(m, q)
        assert len(cycles) == n
        for c in cycles:
            pts = np.array(c.points)
            w = pts
            for _ in range(q):
                w = m.value(w)
            assert np.max(np.abs(w - pts)) < 1e-10
    with pytest.raises(PeriodTooLarge):
        periodic_points(m, 13)


def test_ply_disk_examples():
    # log 2 / 2 pi = 0.1103178...
    d = ply_disk("1/3")
    assert d.center == pytest.approx(1 / 3 - 0.0367726000j, abs=1e-9)
    assert d.radius == pytest.approx(L2 / 3, abs=1e-15)
    d = ply_disk((1, 2))
    assert d.center == pytest.approx(0.5 - 0.0551589000j, abs=1e-9)
    d2 = ply_disk((1, 2), 2)
    assert d2.radius == pytest.approx(2 * d.radius) and d2.center.imag == pytest.approx(2 * d.center.imag)
    for bad in ((2, 4), (1, 1), (0, 1)):
        with pytest.raises(InvalidFraction):
            ply_disk(bad)


@pytest.mark.parametrize("p, q", [(1, 3), (1, 4), (2, 5)])
def test_satellite_root_on_boundary(p, q):
    a = satellite_root_alpha(p, q)
    rep = dividing_multiplier_check(MapSpec.quadratic(a), (p, q))
    assert rep.rotation == pytest.approx(p / q, abs=1e-12)
    assert abs(rep.distance) <= 1e-10


def test_beta_two_code_paths():
    a = 0.01
    rep = dividing_multiplier_check(MapSpec.quadratic(a), (1, 2))
    fp = fixed_point_data(MapSpec.quadratic(a))
    d = rep.rotation - fp.beta
    assert abs(d - round(d.real)) < 1e-10


def test_satellite_samples_inside():
    for mult in (0.5, 0.3j, -0.7 + 0.2j):
        c = satellite_parameter(1, 3, mult)
        rep = dividing_multiplier_check(MapSpec.quadratic(alpha_from_c(c)), (1, 3))
        assert rep.inside


def test_newton_fixed_point_converges():
    m = MapSpec.quadratic(0.05 - 0.01j)
    s = newton_fixed_point(m, sigma_of(m) * 1.05)
    assert abs(s - sigma_of(m)) < 1e-14


def test_critical_point_modulus():
    for a in (0.1 + 0.03j, -0.2 - 0.1j, 0.4j):
        m = MapSpec.quadratic(a)
        assert abs(m.critical_point()) == pytest.approx(8 / 27 * math.exp(2 * math.pi * a.imag), rel=1e-14)
        assert abs(m.deriv(m.critical_point())) < 1e-14
