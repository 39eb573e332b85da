"""The complex Gauss map G = saw o inv, cylinder balls and sampled checks
of the cone, growth and distortion estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .mcf import RationalSeq, SignedCF, evaluate, qg_check, periods_k
from .numerics_core import Disk, MoebiusMap, closest_integer

LOG2_OVER_2PI = math.log(2) / (2 * math.pi)


class GaussError(Exception):
    pass


class ZeroInput(GaussError):
    pass


class InvalidPrefix(GaussError):
    pass


class PreconditionViolated(GaussError):
    pass


class SampleViolation(GaussError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


def gauss_step(z):
    """G(z) = -1/z - [Re(-1/z)], exact for rationals."""
    if z == 0:
        raise ZeroInput("G is undefined at 0")
    if isinstance(z, Rational):
        y = -1 / Fraction(z)
        return y - closest_integer(y)
    y = -1 / complex(z)
    return y - closest_integer(y.real)


def gauss_step_array(z: np.ndarray) -> np.ndarray:
    y = -1 / np.asarray(z, dtype=complex)
    # closest integer with ties towards zero, vectorised
    re = y.real
    k = np.where(re > 0, np.ceil(re - 0.5), -np.ceil(-re - 0.5))
    return y - k


@dataclass(frozen=True)
class GaussOrbit:
    points: tuple
    terminated: bool

    def to_json(self) -> dict:
        pts = []
        for p in self.points:
            if isinstance(p, Fraction):
                pts.append(f"{p.numerator}/{p.denominator}")
            else:
                pts.append([complex(p).real, complex(p).imag])
        return {"points": pts, "terminated": self.terminated}


def gauss_orbit(z, n: int = 64) -> GaussOrbit:
    """Up to n steps of G; stops when the orbit hits 0."""
    pts = [Fraction(z) if isinstance(z, Rational) else complex(z)]
    for _ in range(n):
        if pts[-1] == 0:
            break
        pts.append(gauss_step(pts[-1]))
    return GaussOrbit(tuple(pts), pts[-1] == 0)


def primed_signs(cf: SignedCF) -> list:
    """eps'_1 = eps_1, eps'_j = -eps'_{j-1} eps_j; eps'_j is the sign of x_j."""
    out = []
    for p in cf.pairs:
        out.append(p.eps if not out else -out[-1] * p.eps)
    return out


def branch_maps(cf: SignedCF) -> list:
    """Inverse branches z -> 1/(eps'_j b_j - z) as Moebius maps."""
    return [MoebiusMap(0, 1, -1, e * p.b) for e, p in zip(primed_signs(cf), cf.pairs)]


def cylinder_map(cf: SignedCF) -> MoebiusMap:
    """The Moebius map B(0, 1/2) -> F_n(cf), inverse of G^n on the ball."""
    m = MoebiusMap.identity()
    for b in branch_maps(cf):
        m = m.compose(b)
    return m


def cylinder_endpoints(cf: SignedCF) -> tuple:
    """Exact real endpoints of F_n(cf), images of -1/2 and 1/2."""
    es = primed_signs(cf)
    ends = []
    for u in (Fraction(-1, 2), Fraction(1, 2)):
        for e, p in zip(reversed(es), reversed(cf.pairs)):
            u = 1 / (e * p.b - u)
        ends.append(u)
    return tuple(sorted(ends))


def cylinder_ball(cf: SignedCF) -> Disk:
    """The cylinder ball F_n(cf): the inverse branches map B(0, 1/2) onto a
    disk symmetric about the real line, so exact endpoints fix it."""
    if not isinstance(cf, SignedCF) or len(cf) == 0:
        raise InvalidPrefix("need a nonempty SignedCF")
    lo, hi = cylinder_endpoints(cf)
    return Disk(float((lo + hi) / 2), float((hi - lo) / 2))


def cylinder_orbit(cf: SignedCF, u: np.ndarray) -> tuple:
    """Orbit under the holomorphic branch of G of the points z = M(u) of
    F_n(cf), u in B(0, 1/2), where M is the cylinder map.

    orbit[k] = G^k(z) is evaluated as the composition of the branches
    k+1..n applied to u, which avoids the b^2 error growth of forward
    iteration.  jumps[k] counts points where the saw with closest-integer
    rounding would pick another integer than the branch (this only happens
    on the chords Re = +-1/2).
    """
    w = np.asarray(u, dtype=complex)
    orbit = [w]
    for e, p in zip(reversed(primed_signs(cf)), reversed(cf.pairs)):
        w = 1 / (e * p.b - w)
        orbit.append(w)
    orbit.reverse()
    jumps = []
    for k in range(len(cf)):
        g = gauss_step_array(orbit[k])
        # a different integer shows up as a jump of size 1
        jumps.append(int(np.count_nonzero(np.abs(g - orbit[k + 1]) > 0.5)))
    return orbit, jumps


def _cone_ok(w: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # arg in [-pi/4, pi/4] for Re > 0 and in [3pi/4, 5pi/4] for Re < 0
    return np.abs(w.imag) <= np.abs(w.real) * (1 + tol)


@dataclass
class ConeReport:
    ok: bool
    n_samples: int
    worst_lower_margin: float
    worst_upper_margin: float
    worst_cone_margin: float
    saw_jumps: int
    witness: list | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "n_samples": self.n_samples,
                "worst_lower_margin": self.worst_lower_margin,
                "worst_upper_margin": self.worst_upper_margin,
                "worst_cone_margin": self.worst_cone_margin,
                "saw_jumps": self.saw_jumps, "witness": self.witness}


def _cone_scan(cf: SignedCF, u: np.ndarray):
    orbit, jumps = cylinder_orbit(cf, u)
    pts = orbit[0]
    lo = up = cone = math.inf
    bad = None
    for k in range(len(cf)):
        w = orbit[k]
        b = cf.pairs[k].b
        mod = np.abs(w)
        lo_m = mod - 0.8 / b
        up_m = 4 / (3 * b) - mod
        # positive cone margin means inside: |Re| - |Im| >= 0
        c_m = (np.abs(w.real) - np.abs(w.imag)) / mod
        lo, up, cone = min(lo, lo_m.min()), min(up, up_m.min()), min(cone, c_m.min())
        viol = (lo_m < -1e-14 / b) | (up_m < -1e-14 / b) | ~_cone_ok(w)
        if bad is None and viol.any():
            i = int(np.argmax(viol))
            bad = {"k": k, "z": [pts[i].real, pts[i].imag], "Gk": [w[i].real, w[i].imag]}
    return lo, up, cone, sum(jumps), bad


def cone_lemma_applies(cf: SignedCF) -> bool:
    """False when two consecutive entries equal 2.  The ball of (2, +-) then
    leaves B(0, 1/2), so G^k(F_n) is not inside F_1 of the next pair and the
    lower modulus bound fails near the real endpoints."""
    bs = cf.bs
    return not any(a == 2 and b == 2 for a, b in zip(bs, bs[1:]))


def cone_check(cf: SignedCF, samples: int = 256, raise_on_fail: bool = True) -> ConeReport:
    """Sample the boundary of F_n(cf) and check the modulus sandwich
    4/5 / b_{k+1} <= |G^k z| <= 4/3 / b_{k+1} and the pi/4 cone, k < n."""
    ball = cylinder_ball(cf)
    lo, up, cone, jumps, bad = _cone_scan(cf, Disk(0, 0.5).boundary(samples))
    if bad is not None:
        # re-test at higher density before reporting
        lo, up, cone, jumps, bad = _cone_scan(cf, Disk(0, 0.5).boundary(4 * samples))
    rep = ConeReport(bad is None, samples, float(lo), float(up), float(cone), jumps, bad)
    if bad is not None and raise_on_fail:
        raise SampleViolation(f"cone lemma violated for {cf.compact()} on {ball}", bad)
    return rep


def distortion_on_ball(cf: SignedCF, samples: int = 256) -> dict:
    """Distortion of G^n on F_n(cf): sup |(G^n)'(z) / (G^n)'(w)| sampled on
    the boundary, compared with the value at the real endpoints."""
    ball = cylinder_ball(cf)
    m = cylinder_map(cf)
    # (G^n)' = 1/(M^{-1})' ; with M(u) = (a u + b)/(c u + d), M'(u) = det/(c u + d)^2
    det = m.a * m.d - m.b * m.c

    def log_deriv_g(u):
        return -np.log(np.abs(det / (m.c * u + m.d) ** 2))

    u = Disk(0, 0.5).samples(samples, samples // 4)
    vals = log_deriv_g(u)
    sampled = float(np.exp(vals.max() - vals.min()))
    ends = log_deriv_g(np.array([-0.5, 0.5]))
    endpoint = float(np.exp(abs(ends[1] - ends[0])))
    return {"ball": ball, "sampled": sampled, "endpoint": endpoint,
            "realized_at_endpoints": sampled <= endpoint * (1 + 1e-9)}


@dataclass
class GrowthReport:
    ratio: float
    bound: float
    ok: bool
    distortion: float
    distortion_at_endpoints: bool
    orbit: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ratio": self.ratio, "bound": self.bound, "ok": self.ok,
                "distortion": self.distortion,
                "distortion_at_endpoints": self.distortion_at_endpoints,
                "orbit": [f"{x.numerator}/{x.denominator}" for x in self.orbit]}


def growth_bound_check(cf: SignedCF, C: float = 2.0) -> GrowthReport:
    """Ratio (|x_n|/|x_1|) / prod_{i<n} |x_i| along the exact orbit, x_0 = 1."""
    bs = cf.bs
    for j in range(len(bs) - 1):
        if bs[j + 1] < bs[j] ** 2:
            raise PreconditionViolated(f"b_{j + 2} = {bs[j + 1]} < b_{j + 1}^2")
    x1 = evaluate(cf)
    xs = [Fraction(1)]
    x = x1
    for _ in range(len(cf)):
        xs.append(x)
        if x != 0:
            x = gauss_step(x)
    n = len(cf)
    prod = Fraction(1)
    for v in xs[:n]:
        prod *= abs(v)
    ratio = (abs(xs[n]) / abs(xs[1])) / prod
    dist = distortion_on_ball(cf)
    bound = math.exp(C)
    return GrowthReport(float(ratio), bound, float(ratio) <= bound, dist["sampled"],
                        dist["realized_at_endpoints"], xs[1:])


def ply_block_disk(seq: RationalSeq, i: int) -> Disk:
    """The closed disk of the growth proposition for block i (1-based)."""
    pq = seq.value(i)
    q = seq.q(i)
    k = periods_k(seq, i)
    rad = LOG2_OVER_2PI * k / q
    return Disk(complex(float(pq), -rad), rad)


@dataclass
class QGDiskReport:
    ok: bool
    block: int
    n_samples: int
    max_modulus_a: float | None
    max_modulus_b: float
    witness: dict | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "block": self.block, "n_samples": self.n_samples,
                "max_modulus_a": self.max_modulus_a, "max_modulus_b": self.max_modulus_b,
                "witness": self.witness}


def _qg_scan(m: int, pts: np.ndarray, r: float):
    w = pts.copy()
    max_a = 0.0
    bad = None
    for n_i in range(m - 1):
        # part (a): modulus and cone for 0 <= n_i <= m - 2
        mod = np.abs(w)
        max_a = max(max_a, float(mod.max()))
        viol = (mod > r) | ~_cone_ok(w)
        if bad is None and viol.any():
            j = int(np.argmax(viol))
            bad = {"part": "a", "n": n_i, "z": [pts[j].real, pts[j].imag], "Gn": [w[j].real, w[j].imag]}
        w = gauss_step_array(w)
    max_b = float(np.abs(w).max())
    if bad is None and max_b > r:
        j = int(np.argmax(np.abs(w)))
        bad = {"part": "b", "n": m - 1, "z": [pts[j].real, pts[j].imag], "Gn": [w[j].real, w[j].imag]}
    return max_a, max_b, bad


def qg_disk_check(seq: RationalSeq, i: int, r: float, samples: int = 128,
                  interior: int | None = None, N: int | None = None,
                  raise_on_fail: bool = True) -> QGDiskReport:
    """Sample the disk of block i and check parts (a) and (b) with radius r."""
    if not 0 < r < 0.5:
        raise ValueError("r must lie in (0, 1/2)")
    if N is not None and not qg_check(seq, N):
        raise PreconditionViolated(f"sequence fails the growth check with N = {N}")
    if interior is None:
        interior = samples // 4
    disk = ply_block_disk(seq, i)
    m = seq.ms[i - 1]
    pts = disk.samples(samples, interior)
    max_a, max_b, bad = _qg_scan(m, pts, r)
    if bad is not None:
        max_a, max_b, bad = _qg_scan(m, disk.samples(4 * samples, 4 * interior), r)
    # part (a) is vacuous for one-pair blocks
    rep = QGDiskReport(bad is None, i, len(pts), max_a if m > 1 else None, max_b, bad)
    if bad is not None and raise_on_fail:
        raise SampleViolation(f"growth proposition fails on block {i}", bad)
    return rep
