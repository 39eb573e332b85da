"""Concrete maps near a parabolic point: the normalized quadratic family and
a Moebius-perturbed cubic model, with fixed point data, cycles and PLY disks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .numerics_core import Disk, contour_integral_circle

TWO_PI_I = 2j * math.pi
LOG2_OVER_2PI = math.log(2) / (2 * math.pi)
CV = -4 / 27


class MapError(Exception):
    pass


class PoleHit(MapError):
    pass


class NewtonDivergence(MapError):
    pass


class ContourEnclosureFailure(MapError):
    pass


class RootFindingFailure(MapError):
    pass


class PeriodTooLarge(MapError):
    pass


class InvalidFraction(MapError):
    pass


def shift_re(x: complex) -> complex:
    """Translate by an integer so that the real part lies in (-1/2, 1/2]."""
    k = math.ceil(x.real - 0.5)
    return x - k


def log_rotation(mult: complex) -> complex:
    """(1/2 pi i) log(mult) with real part in (-1/2, 1/2]."""
    return shift_re(cmath.log(mult) / TWO_PI_I)


@dataclass(frozen=True)
class MapSpec:
    """Q_alpha(z) = e^{2 pi i alpha} z + (27/16) e^{4 pi i alpha} z^2 (kind
    "quadratic"), or z -> P(phi^{-1}(e^{2 pi i alpha} z)) with P(z) = z(1+z)^2
    and phi(z) = z/(1 - c z) (kind "moebius")."""

    kind: str
    alpha: complex
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "c", complex(self.c))
        if self.kind not in ("quadratic", "moebius"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ValueError("alpha must be finite")
        if self.kind == "moebius" and abs(self.c) > 0.05:
            raise ValueError("|c| must be <= 0.05 for the Moebius family")

    @classmethod
    def quadratic(cls, alpha) -> "MapSpec":
        return cls("quadratic", alpha)

    @classmethod
    def moebius(cls, c, alpha) -> "MapSpec":
        return cls("moebius", alpha, c)

    @property
    def lam(self) -> complex:
        return cmath.exp(TWO_PI_I * self.alpha)

    def conj(self) -> "MapSpec":
        """The conjugate map s o f o s, s(z) = conj(z)."""
        return MapSpec(self.kind, -self.alpha.conjugate(), self.c.conjugate())

    def to_json(self) -> dict:
        d = {"kind": self.kind, "alpha": [self.alpha.real, self.alpha.imag]}
        if self.kind == "moebius":
            d["c"] = [self.c.real, self.c.imag]
        return d

    # --- evaluation -------------------------------------------------------

    def __call__(self, z):
        return self.value(z)

    def value(self, z):
        lam = self.lam
        if self.kind == "quadratic":
            return lam * z + (27 / 16) * lam * lam * z * z
        w = lam * z
        den = 1 + self.c * w
        if np.any(den == 0):
            raise PoleHit("pole of phi^{-1}")
        v = w / den
        return v * (1 + v) ** 2

    def deriv(self, z):
        lam = self.lam
        if self.kind == "quadratic":
            return lam + (27 / 8) * lam * lam * z
        w = lam * z
        den = 1 + self.c * w
        v = w / den
        dv = lam / den ** 2
        return (1 + v) * (1 + 3 * v) * dv

    def second_deriv_at_0(self) -> complex:
        lam = self.lam
        if self.kind == "quadratic":
            return (27 / 8) * lam * lam
        return 2 * lam * lam * (2 - self.c)

    def critical_point(self) -> complex:
        """The critical point with critical value -4/27."""
        lam = self.lam
        if self.kind == "quadratic":
            return -8 / (27 * lam)
        v = -1 / 3
        return v / (1 - self.c * v) / lam

    def critical_value(self) -> complex:
        return complex(self.value(self.critical_point()))

    def sigma_guess(self) -> complex:
        """(1 - e^{2 pi i alpha}) / u(0), u(0) = f''(0)/2."""
        return (1 - self.lam) / (self.second_deriv_at_0() / 2)

    def fixed_point_candidates(self) -> np.ndarray:
        """All finite fixed points."""
        if self.kind == "quadratic":
            return np.array([0j, self.sigma_guess()])
        # in v = phi^{-1}(lam z): v = 0 or (1 + v)^2 (1 - c v) = 1/lam
        c, lam = self.c, self.lam
        poly = np.polymul([1, 2, 1], [-c, 1]) if c != 0 else np.array([1, 2, 1], dtype=complex)
        poly = np.array(poly, dtype=complex)
        poly[-1] -= 1 / lam
        vs = np.roots(poly)
        zs = vs / (1 - c * vs) / lam
        return np.concatenate([[0j], zs])


def eval_map(m: MapSpec, z) -> tuple:
    """(f(z), f'(z))."""
    return m.value(z), m.deriv(z)


def orbit_deriv(m: MapSpec, z, n: int) -> tuple:
    """(f^n(z), (f^n)'(z)) by the chain rule."""
    d = np.ones_like(np.asarray(z, dtype=complex))
    w = np.asarray(z, dtype=complex)
    for _ in range(n):
        d = d * m.deriv(w)
        w = m.value(w)
    return w, d


# --- the domain V ---------------------------------------------------------

def _outside_ellipse(w: complex) -> bool:
    return ((w.real + 0.18) / 1.24) ** 2 + (w.imag / 1.04) ** 2 > 1


def contains_in_V(z) -> bool:
    """z in g(C^ - E) for g(w) = -4w/(1+w)^2 and the ellipse E."""
    z = complex(z)
    if z == 0:
        # preimages are 0 and infinity, and infinity is outside E
        return True
    roots = np.roots([z, 2 * z + 4, z])
    return any(_outside_ellipse(complex(w)) for w in roots)


# --- fixed points and the index -----------------------------------------

@dataclass(frozen=True)
class FixedPointData:
    sigma: complex
    alpha: complex
    beta: complex
    index: complex
    index_formula: complex
    index_residual: float
    index_error_estimate: float
    contour: tuple

    def to_json(self) -> dict:
        cj = lambda z: [z.real, z.imag]
        return {"sigma": cj(self.sigma), "alpha": cj(self.alpha), "beta": cj(self.beta),
                "index": cj(self.index), "index_formula": cj(self.index_formula),
                "index_residual": self.index_residual,
                "index_error_estimate": self.index_error_estimate,
                "contour": {"center": cj(self.contour[0]), "radius": self.contour[1]}}


def newton_fixed_point(m: MapSpec, z0: complex, tol: float = 1e-15, maxit: int = 60) -> complex:
    z = complex(z0)
    for _ in range(maxit):
        g = m.value(z) - z
        dg = m.deriv(z) - 1
        if dg == 0:
            raise NewtonDivergence("zero derivative")
        step = g / dg
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            # one extra step to settle the last bits
            z -= (m.value(z) - z) / (m.deriv(z) - 1)
            return z
    raise NewtonDivergence(f"no convergence from {z0}")


def sigma_of(m: MapSpec) -> complex:
    if m.kind == "quadratic":
        lam = m.lam
        return 16 * (1 - lam) / (27 * lam * lam)
    return newton_fixed_point(m, m.sigma_guess(), tol=getattr(m, "newton_tol", 1e-15))


def index_contour(sigma: complex) -> tuple:
    return sigma / 2, max(0.1, 1.5 * abs(sigma))


def fixed_point_data(m: MapSpec, n: int = 512, contour: tuple | None = None) -> FixedPointData:
    """sigma, alpha, beta and the holomorphic index over {0, sigma}.

    ``m`` may be any object with ``kind``, ``alpha``, ``value``, ``deriv`` and
    ``sigma_guess``; ``contour`` = (center, radius) overrides the default
    index circle, e.g. for maps known only on a small disk."""
    if m.alpha == 0:
        raise ValueError("alpha must be nonzero")
    sigma = sigma_of(m)
    if abs(sigma) < 1e-8:
        raise ValueError("sigma too close to 0")
    center, radius = contour if contour is not None else index_contour(sigma)
    if abs(center) >= radius or abs(sigma - center) >= radius:
        raise ContourEnclosureFailure("index contour does not enclose 0 and sigma")
    if m.kind == "moebius":
        fps = m.fixed_point_candidates()
        inside = [z for z in fps if abs(z - center) < radius]
        if len(inside) != 2:
            raise ContourEnclosureFailure(f"{len(inside)} fixed points inside the index contour")
        pole = -1 / (m.c * m.lam) if m.c != 0 else None
        if pole is not None and abs(pole - center) <= radius:
            raise ContourEnclosureFailure("pole inside the index contour")
    beta = log_rotation(complex(m.deriv(sigma)))
    alpha = shift_re(m.alpha)
    index, err = contour_integral_circle(lambda z: 1 / (z - m.value(z)), center, radius, n,
                                         estimate=True)
    formula = 1 / (1 - cmath.exp(TWO_PI_I * alpha)) + 1 / (1 - cmath.exp(TWO_PI_I * beta))
    return FixedPointData(sigma, alpha, beta, index, formula, abs(index - formula), err,
                          (center, radius))


# --- periodic points --------------------------------------------------------

@dataclass(frozen=True)
class CycleData:
    points: tuple
    period: int
    multiplier: complex

    def to_json(self) -> dict:
        return {"period": self.period,
                "points": [[z.real, z.imag] for z in self.points],
                "multiplier": [self.multiplier.real, self.multiplier.imag]}


def _mobius_mu(n: int) -> int:
    res, k, p = 1, n, 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            res = -res
        p += 1
    return -res if k > 1 else res


def count_periodic(q: int) -> int:
    """Number of points of minimal period q of a quadratic polynomial."""
    return sum(_mobius_mu(q // d) * 2 ** d for d in range(1, q + 1) if q % d == 0)


def _conj_param(m: MapSpec) -> tuple:
    """Q is conjugate to x^2 + c via x = A z + lam/2, A = 27 lam^2 / 16."""
    lam = m.lam
    A = 27 * lam * lam / 16
    return A, lam / 2, lam / 2 - lam * lam / 4


def _iter_poly(c: complex, q: int) -> np.ndarray:
    """Coefficients (highest first) of P_c^q(x) - x, P_c(x) = x^2 + c."""
    p = np.array([1, 0, c], dtype=complex)
    poly = p
    for _ in range(q - 1):
        poly = np.polymul(poly, poly)
        poly[-1] += c
    poly = poly.copy()
    poly[-2] -= 1
    return poly


def _pc_orbit(c, x, q):
    d = np.ones_like(x)
    for _ in range(q):
        d = d * 2 * x
        x = x * x + c
    return x, d


def _refine(c, x, q, tol=1e-14, maxit=50):
    x = np.array(x, dtype=complex)
    for _ in range(maxit):
        y, d = _pc_orbit(c, x, q)
        step = (y - x) / (d - 1)
        step[~np.isfinite(step)] = 0
        x = x - step
        if np.all(np.abs(step) <= tol * np.maximum(1, np.abs(x))):
            break
    return x


def _aberth(c, q, known, n_roots, maxit=500, tol=1e-13):
    """Aberth-Ehrlich iteration for the roots of P_c^q(x) - x with the roots
    in ``known`` (lower periods) deflated out."""
    k = np.arange(n_roots)
    x = 2.2 * np.exp(2j * np.pi * (k + 0.25) / n_roots)
    known = np.asarray(known, dtype=complex)
    for _ in range(maxit):
        y, d = _pc_orbit(c, x, q)
        with np.errstate(all="ignore"):
            ratio = (y - x) / (d - 1)
            s = np.zeros_like(x)
            for lo in range(0, n_roots, 512):
                blk = x[lo:lo + 512, None] - x[None, :]
                idx = np.arange(lo, min(lo + 512, n_roots))
                blk[idx - lo, idx] = np.inf
                s[lo:lo + 512] = np.sum(1 / blk, axis=1)
            if known.size:
                s += np.sum(1 / (x[:, None] - known[None, :]), axis=1)
            step = ratio / (1 - ratio * s)
        step[~np.isfinite(step)] = 0
        x = x - step
        if np.all(np.abs(step) <= tol * np.maximum(1, np.abs(x))):
            break
    return x


def _dedupe(xs, tol=1e-8):
    out = []
    for x in xs:
        if all(abs(x - y) > tol for y in out):
            out.append(x)
    return out


@lru_cache(maxsize=64)
def _periodic_x(c: complex, q: int) -> tuple:
    """Points of minimal period q of x^2 + c."""
    lower = []
    for d in range(1, q):
        if q % d == 0:
            lower.extend(_periodic_x(c, d))
    expected = count_periodic(q)
    if q <= 6:
        roots = np.roots(_iter_poly(c, q))
        roots = _refine(c, roots, q)
        # drop lower-period roots (deflation by exclusion)
        cand = [x for x in roots if all(abs(x - y) > 1e-7 for y in lower)]
        if len(cand) != expected:
            # near-parabolic collisions: fall back to deflated Aberth
            cand = list(_aberth(c, q, lower, expected))
    else:
        cand = list(_aberth(c, q, lower, expected))
    cand = _refine(c, np.array(cand), q)
    y, _ = _pc_orbit(c, cand, q)
    if not np.all(np.abs(y - cand) <= 1e-10 * np.maximum(1, np.abs(cand))):
        raise RootFindingFailure(f"period {q} roots not converged")
    return tuple(complex(x) for x in cand)


def periodic_points(m: MapSpec, q: int) -> list:
    """All cycles of minimal period q of a quadratic map."""
    if m.kind != "quadratic":
        raise ValueError("periodic points are implemented for the quadratic family")
    if q < 1:
        raise ValueError("period must be >= 1")
    if q > 12:
        raise PeriodTooLarge("period capped at 12")
    A, shift, c = _conj_param(m)
    if q == 1:
        # closed forms; avoids the conjugation round-off at 0
        sigma = sigma_of(m)
        return [CycleData((0j,), 1, m.lam), CycleData((sigma,), 1, complex(m.deriv(sigma)))]
    xs = list(_periodic_x(complex(c), q))
    cycles = []
    used = [False] * len(xs)
    for i, x in enumerate(xs):
        if used[i]:
            continue
        pts = [x]
        used[i] = True
        y = x
        for _ in range(q - 1):
            y = y * y + c
            j = int(np.argmin([abs(y - t) for t in xs]))
            used[j] = True
            pts.append(xs[j])
        zs = tuple(complex((p - shift) / A) for p in pts)
        mult = complex(np.prod([m.deriv(z) for z in zs]))
        cycles.append(CycleData(zs, q, mult))
    if len(cycles) * q != count_periodic(q):
        raise RootFindingFailure("cycle grouping mismatch")
    return cycles


# --- PLY disks --------------------------------------------------------------

def ply_disk(pq, k: int = 1) -> Disk:
    """Disk(p/q - i (k/q) log2/2pi, (k/q) log2/2pi)."""
    if isinstance(pq, str):
        num, _, den = pq.partition("/")
        p, q = int(num), int(den or 1)
    elif isinstance(pq, tuple):
        p, q = pq
    else:
        f = Fraction(pq)
        p, q = f.numerator, f.denominator
    if q < 2 or math.gcd(abs(p), q) != 1:
        raise InvalidFraction(f"{p}/{q} must be reduced with q >= 2")
    if k < 1:
        raise InvalidFraction("k must be >= 1")
    rad = k / q * LOG2_OVER_2PI
    return Disk(complex(p / q, -rad), rad)


@dataclass(frozen=True)
class MultiplierReport:
    rotation: complex
    disk: Disk
    distance: float  # |rotation - center| - radius, <= 0 means inside
    inside: bool

    def to_json(self) -> dict:
        return {"rotation": [self.rotation.real, self.rotation.imag],
                "disk": {"center": [self.disk.center.real, self.disk.center.imag],
                         "radius": self.disk.radius},
                "distance": self.distance, "inside": self.inside}


def dividing_multiplier_check(m: MapSpec, pq, k: int = 1, period: int = 1,
                              tol: float = 1e-12) -> MultiplierReport:
    """(1/2 pi i) log rho of the dividing cycle against the PLY disk.

    For period 1 the dividing fixed point is sigma with rho = f'(sigma); for
    larger periods the cycle with the largest multiplier modulus is used.
    """
    disk = ply_disk(pq, k)
    if period == 1:
        rho = 2 - m.lam if m.kind == "quadratic" else complex(m.deriv(sigma_of(m)))
    else:
        rho = max((c.multiplier for c in periodic_points(m, period)), key=abs)
    rot = log_rotation(rho)
    # the rotation is defined mod 1; compare with the representative near p/q
    rot = rot + round(disk.center.real - rot.real)
    dist = abs(rot - disk.center) - disk.radius
    return MultiplierReport(rot, disk, dist, dist <= tol)


def satellite_root_alpha(p: int, q: int) -> complex:
    """alpha with 2 - e^{2 pi i alpha} = e^{2 pi i p/q}."""
    return log_rotation(2 - cmath.exp(TWO_PI_I * p / q))


def alpha_from_c(c: complex) -> complex:
    """alpha of the quadratic map conjugate to x^2 + c whose sigma plays the
    role of the alpha fixed point of x^2 + c (|2 - lam| the smaller multiplier)."""
    mu = 1 - cmath.sqrt(1 - 4 * c)  # multiplier of the alpha fixed point
    return log_rotation(2 - mu)


def satellite_center(p: int, q: int) -> complex:
    """Center of the p/q satellite component of the main cardioid."""
    mu = cmath.exp(TWO_PI_I * p / q)
    c_root = mu / 2 - mu * mu / 4
    normal = (1 - mu) * mu
    c = c_root + normal / abs(normal) * 0.5 / q ** 2
    for _ in range(100):
        x, dx = 0j, 0j
        for _ in range(q):
            x, dx = x * x + c, 2 * x * dx + 1
        step = x / dx
        c -= step
        if abs(step) < 1e-15:
            break
    return c


def _cycle_system(x: complex, c: complex, q: int) -> tuple:
    """P^q(x), (P^q)'(x) and their partials in (x, c) for P(x) = x^2 + c."""
    y, a, b = x, 1 + 0j, 0j  # y_k, dy_k/dx, dy_k/dc
    d, d_x, d_c = 1 + 0j, 0j, 0j  # prod 2 y_j and its partials
    for _ in range(q):
        d, d_x, d_c = 2 * y * d, 2 * a * d + 2 * y * d_x, 2 * b * d + 2 * y * d_c
        y, a, b = y * y + c, 2 * y * a, 2 * y * b + 1
    return y, a, b, d, d_x, d_c


def satellite_parameter(p: int, q: int, mult: complex, steps: int = 32) -> complex:
    """Parameter c of the p/q satellite component whose attracting q-cycle
    has multiplier ``mult`` (|mult| < 1), by continuation from the center."""
    c = satellite_center(p, q)
    x = 0j
    for s in range(1, steps + 1):
        target = mult * s / steps
        for _ in range(50):
            y, a, b, d, d_x, d_c = _cycle_system(x, c, q)
            F = np.array([y - x, d - target])
            J = np.array([[a - 1, b], [d_x, d_c]])
            dx, dc = np.linalg.solve(J, F)
            x -= dx
            c -= dc
            if abs(dx) + abs(dc) < 1e-15:
                break
        else:
            raise NewtonDivergence("continuation in the satellite component failed")
    return complex(c)
