import cmath
import math
from fractions import Fraction as F

import numpy as np
from hypothesis import assume, example, given, settings
from hypothesis import strategies as st

from para_renorm.gauss_dynamics import cone_check, cone_lemma_applies, gauss_step, gauss_step_array
from para_renorm.maps import MapSpec, fixed_point_data, ply_disk
from para_renorm.mcf import SignedCF, convergents, evaluate, expand
from para_renorm.numerics_core import Disk, MoebiusMap, closest_integer, mobius_image_disk, sector_classify
from para_renorm.tower import QuadSurd

half_fractions = st.builds(F, st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6)).filter(
    lambda x: 0 < abs(x) <= F(1, 2))


@st.composite
def signed_cfs(draw, max_len=6, max_b=50):
    n = draw(st.integers(1, max_len))
    pairs = []
    for j in range(n):
        b = draw(st.integers(2, max_b))
        forced = j > 0 and (pairs[-1][0] == 2 or (b == 2 and j == n - 1))
        pairs.append((b, 1 if forced else draw(st.sampled_from((-1, 1)))))
    return SignedCF(tuple(pairs))


@given(half_fractions)
def test_round_trip(x):
    assert evaluate(expand(x)) == x


@given(half_fractions)
def test_product_identity(x):
    cf = expand(x)
    cv = convergents(cf)
    assert abs(cv.q[-1]) == x.denominator
    prod, y = F(1), x
    while y != 0:
        prod *= abs(y)
        y = gauss_step(y)
    assert prod == F(1, x.denominator)


@given(signed_cfs())
def test_gauss_shift_removes_first_pair(cf):
    x = evaluate(cf)
    tail = evaluate(cf.tail()) if len(cf) > 1 else 0
    assert gauss_step(x) == -cf[0].eps * tail


@given(signed_cfs())
def test_expand_inverts_evaluate(cf):
    assert expand(evaluate(cf)) == cf


@settings(max_examples=40, deadline=None)
@given(signed_cfs(max_len=4))
def test_cone_lemma(cf):
    assume(cone_lemma_applies(cf))
    assert cone_check(cf, 64, raise_on_fail=False).ok


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_closest_integer(x):
    k = closest_integer(x)
    assert abs(x - k) <= 0.5
    if abs(x - k) == 0.5:
        assert abs(k) < abs(x)


@given(st.lists(st.complex_numbers(min_magnitude=1e-3, max_magnitude=10), min_size=1, max_size=20))
def test_gauss_array_matches_scalar(zs):
    a = gauss_step_array(np.array(zs))
    b = np.array([gauss_step(z) for z in zs])
    assert np.allclose(a, b, rtol=0, atol=1e-9 * max(1, np.abs(b).max()))


@given(st.complex_numbers(max_magnitude=0.3), st.floats(1e-3, 0.3))
def test_sector_conjugation_symmetric(a, r):
    assert sector_classify(a, r) is sector_classify(a.conjugate(), r)


@example(b=0j, c=2.2250738585e-313 + 0j, center=1j, rad=1.0)
@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=3), st.floats(0.05, 1))
def test_mobius_disk_image(b, c, center, rad):
    m = MoebiusMap(1, b, c, 1)
    if abs(1 - b * c) < 1e-3:
        return
    d = Disk(center, rad)
    if c != 0 and abs(center + 1 / c) <= rad * 1.05:
        return
    img = mobius_image_disk(m, d)
    pts = m(d.boundary(32))
    assert np.max(np.abs(np.abs(pts - img.center) - img.radius)) <= 1e-8 * max(1, img.radius, abs(img.center))


@given(st.integers(2, 200).flatmap(lambda q: st.tuples(st.integers(1, q - 1), st.just(q))
                                   .filter(lambda t: math.gcd(*t) == 1)), st.integers(1, 8))
def test_ply_disk_linear_in_k(pq, k):
    d1, dk = ply_disk(pq, 1), ply_disk(pq, k)
    assert math.isclose(dk.radius, k * d1.radius) and math.isclose(dk.center.imag, k * d1.center.imag)
    assert dk.center.real == d1.center.real and math.isclose(dk.center.imag, -dk.radius)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.15), st.floats(-math.pi / 4, math.pi / 4), st.booleans())
def test_index_vanishes(mod, arg, neg):
    a = mod * cmath.exp(1j * arg) * (-1 if neg else 1)
    fp = fixed_point_data(MapSpec.quadratic(a))
    assert abs(fp.index) < 1e-8 and fp.index_residual < 1e-8


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_quadsurd_field_ops(a, b, c, d):
    x, y = QuadSurd(F(a), F(b), 5), QuadSurd(F(c), F(d), 5)
    s5 = math.sqrt(5)
    assert math.isclose(float(x + y), a + b * s5 + c + d * s5, abs_tol=1e-9)
    assert math.isclose(float(x * y), (a + b * s5) * (c + d * s5), rel_tol=1e-12, abs_tol=1e-9)
    if y != 0:
        assert (x / y) * y == x
