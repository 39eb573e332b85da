import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest

from para_renorm.fatou import build_fatou
from para_renorm.gauss_dynamics import ZeroInput
from para_renorm.maps import MapSpec
from para_renorm.mcf import SignedCF, evaluate
from para_renorm.renorm import (SampledRenorm, commutation_check, ecale_lift, ex_bottom, ex_top,
                                renorm_rotation_bottom, renorm_rotation_top, renorm_sample,
                                sector_regions, two_path_check)

ALPHAS = [0.05 - 0.01j, 0.08 - 0.03j, 0.05 + 0.02j]


@pytest.fixture(scope="module", params=ALPHAS, ids=str)
def fa(request):
    return build_fatou(MapSpec.quadratic(request.param))


def test_rotation_examples():
    assert renorm_rotation_top(F(1, 7)) == 0
    assert renorm_rotation_top(0.14) == pytest.approx(-1 / 0.14 + 7)
    assert renorm_rotation_top(0.1 + 0.05j) == pytest.approx(4j)
    assert renorm_rotation_bottom(F(2, 5)) == F(-1, 2)
    with pytest.raises(ZeroInput):
        renorm_rotation_top(0)


def test_rotation_twice_removes_two_pairs():
    c = SignedCF(((3, 1), (2, -1), (2, 1)))
    x = renorm_rotation_top(renorm_rotation_top(evaluate(c)))
    assert abs(x) == abs(evaluate(SignedCF(c.pairs[2:])))


def test_ex_projections():
    assert ex_top(1) == pytest.approx(-4 / 27, abs=1e-15)
    assert ex_bottom(2) == pytest.approx(-4 / 27, abs=1e-15)


def test_two_path(fa):
    assert two_path_check(fa, 50) <= 1e-7


def test_commutation(fa):
    assert commutation_check(fa, 50) <= 1e-8


def test_top_multiplier(fa):
    rs = renorm_sample(fa)
    assert rs.rel_error <= 1e-2
    assert rs.target == pytest.approx(cmath.exp(-2j * math.pi / fa.alpha), rel=1e-12)
    assert rs.residuals["well_defined"] <= 1e-7
    assert rs.k_iterates <= 100


def test_bottom_multiplier(fa):
    rs = renorm_sample(fa, end="bottom")
    beta = cmath.log(2 - cmath.exp(2j * math.pi * fa.alpha)) / (2j * math.pi)
    assert rs.target == pytest.approx(cmath.exp(-2j * math.pi / beta), rel=1e-9)
    assert rs.rel_error <= 1e-2


def test_radius_halving_stable():
    fa = build_fatou(MapSpec.quadratic(0.05 - 0.01j))
    a = renorm_sample(fa).derivative_at_0
    b = renorm_sample(fa, r_lo=0.5e-4, r_hi=0.5e-2).derivative_at_0
    assert abs(a - b) / abs(a) <= 3e-3


def test_k_bounded_across_sector():
    ks = []
    for a in (0.09, 0.06 + 0.03j, 0.07 - 0.02j, 0.04 + 0.01j):
        fa = build_fatou(MapSpec.quadratic(a))
        ks.append(renorm_sample(fa, n_r=2, n_theta=8).k_iterates)
    assert max(ks) <= 50


def test_extended_definition_for_negative_real_part():
    a = 0.05 - 0.01j
    Ra = SampledRenorm(build_fatou(MapSpec.quadratic(a)))
    Rc = SampledRenorm(build_fatou(MapSpec.quadratic(-a.conjugate())))
    z = Ra.sample.z[:10]
    assert np.max(np.abs(Rc(z) - Ra(z))) <= 1e-8 * np.max(np.abs(Ra(z)))


def test_sampled_renorm_rotation():
    a1 = 1 / (7.12 - 0.02j)
    R = SampledRenorm(build_fatou(MapSpec.quadratic(a1)))
    assert abs(R.alpha - renorm_rotation_top(a1)) < 1e-7
    assert abs(R(0.002) - R.lam * 0.002) < 1e-4


def test_sector_regions(fa):
    sr = sector_regions(fa)
    assert sr.in_C(fa.critical_value)
    pts = fa.inverse(np.array([1 + 3j, 1 - 3j]))
    assert list(sr.classify(pts)) == ["A", "B"]
    lim = sr.boundary_limits()
    assert np.all(np.diff(lim["dist_to_0"]) < 0) and np.all(np.diff(lim["dist_to_sigma"]) < 0)


def test_ecale_lift_k():
    fa = build_fatou(MapSpec.quadratic(0.05 + 0.02j))
    w = fa.lift_of(fa.inverse(np.array([1.2 + 2.5j])))
    v, k = ecale_lift(fa, w)
    assert 1 <= int(np.max(k)) <= 100
