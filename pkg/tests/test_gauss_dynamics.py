from fractions import Fraction as F

import numpy as np
import pytest

from para_renorm.gauss_dynamics import (PreconditionViolated, ZeroInput, cone_check,
                                        cone_lemma_applies,
                                        cylinder_ball, cylinder_endpoints, distortion_on_ball,
                                        gauss_orbit, gauss_step, gauss_step_array,
                                        growth_bound_check, ply_block_disk, qg_disk_check)
from para_renorm.mcf import RationalSeq, SignedCF


def cf(*pairs):
    return SignedCF(tuple(pairs))


SEQ10 = RationalSeq((((10, 1),), ((100, 1),), ((10000, 1),)))


def test_gauss_step_examples():
    assert gauss_step(F(1, 2)) == 0
    assert gauss_step(F(2, 5)) == F(-1, 2)
    assert gauss_step(0.4) == pytest.approx(-0.5)
    assert gauss_step(0.3 + 0.1j) == pytest.approx(1j)
    with pytest.raises(ZeroInput):
        gauss_step(0)


def test_gauss_step_array_matches_scalar():
    z = np.array([0.4, 0.3 + 0.1j, -0.21 + 0.03j, 0.0123 - 0.004j])
    assert np.allclose(gauss_step_array(z), [gauss_step(complex(v)) for v in z], atol=1e-15)


def test_gauss_orbit_terminates_on_rationals():
    orb = gauss_orbit(F(5, 13))
    assert orb.terminated and orb.points == (F(5, 13), F(2, 5), F(-1, 2), F(0))


def test_cylinder_ball_examples():
    d = cylinder_ball(cf((3, 1)))
    assert d.center == pytest.approx(12 / 35) and d.radius == pytest.approx(2 / 35)
    d = cylinder_ball(cf((2, -1)))
    assert d.center == pytest.approx(-8 / 15) and d.radius == pytest.approx(2 / 15)
    c = cf((3, 1), (2, 1))
    assert cylinder_endpoints(c) == (F(3, 11), F(5, 17))
    d = cylinder_ball(c)
    assert d.center == pytest.approx(53 / 187) and d.radius == pytest.approx(2 / 187)
    assert d.contains(2 / 7)


@pytest.mark.parametrize("c, n", [(cf((3, 1)), 256), (cf((2, 1), (4, 1)), 256), (cf((100, -1)), 64)])
def test_cone_examples(c, n):
    rep = cone_check(c, n)
    assert rep.ok and rep.worst_cone_margin >= 0


def test_cone_modulus_near_one_over_b():
    from para_renorm.numerics_core import Disk
    from para_renorm.gauss_dynamics import cylinder_map
    pts = cylinder_map(cf((100, -1)))(Disk(0, 0.5).boundary(64))
    assert np.all(np.abs(np.abs(pts) - 0.01) < 0.01 / 3)


def test_growth_examples():
    rep = growth_bound_check(cf((3, 1), (9, 1), (81, 1)), C=2.0)
    assert rep.ok and np.isfinite(rep.ratio) and rep.ratio <= np.exp(2.0)
    assert np.isfinite(growth_bound_check(cf((2, 1), (4, 1))).ratio)
    assert growth_bound_check(cf((7, -1))).ratio == 1
    with pytest.raises(PreconditionViolated):
        growth_bound_check(cf((3, 1), (5, 1)))


def test_distortion_realized_at_endpoints():
    assert distortion_on_ball(cf((3, 1), (9, 1)))["realized_at_endpoints"]


def test_qg_disk_examples():
    assert qg_disk_check(SEQ10, 1, 0.2).ok
    assert qg_disk_check(SEQ10, 2, 0.2).ok
    rep = qg_disk_check(SEQ10, 1, 0.2)
    assert rep.max_modulus_a is None


def test_qg_disk_precondition_and_radius():
    with pytest.raises(PreconditionViolated):
        qg_disk_check(RationalSeq((((10, 1),), ((50, 1),))), 1, 0.2, N=10)
    with pytest.raises(ValueError):
        qg_disk_check(SEQ10, 1, 0.7)


def test_ply_block_disk_tangent_at_value():
    d = ply_block_disk(SEQ10, 2)
    assert d.center.real == pytest.approx(1 / 100)
    assert d.center.imag == pytest.approx(-d.radius)
    assert d.radius == pytest.approx(10 / 100 * np.log(2) / (2 * np.pi))


def test_cone_lemma_exhaustive_small_entries():
    import itertools
    from para_renorm.mcf import InvalidCF
    checked = 0
    for n in (1, 2, 3):
        for bs in itertools.product(range(2, 7), repeat=n):
            for es in itertools.product((-1, 1), repeat=n):
                try:
                    c = SignedCF(tuple(zip(bs, es)))
                except InvalidCF:
                    continue
                if cone_lemma_applies(c):
                    checked += 1
                    assert cone_check(c, 64, raise_on_fail=False).ok, c.compact()
    assert checked > 600


@pytest.mark.xfail(strict=True, reason="consecutive entries 2, 2: the ball of (2,+) leaves B(0, 1/2) "
                                       "and |z| reaches 3/8 < 4/5 * 1/2 on F_2")
def test_cone_lemma_consecutive_twos():
    c = cf((2, 1), (2, 1))
    assert not cone_lemma_applies(c)
    assert cone_check(c, 64, raise_on_fail=False).ok
