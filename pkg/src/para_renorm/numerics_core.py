"""Shared complex arithmetic: closest integers, sectors, disks, Moebius maps
and trapezoid quadrature on circles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np


class NumericsError(Exception):
    pass


class PoleInsideDisk(NumericsError):
    pass


class NonFinite(NumericsError):
    pass


class DegenerateMap(NumericsError):
    pass


def closest_integer(x) -> int:
    """Closest integer with ties broken towards zero.

    For x > 0 the result k satisfies x in (k - 1/2, k + 1/2]; for x < 0 it
    satisfies x in [k - 1/2, k + 1/2).  Exact for Fraction input.
    """
    if isinstance(x, Rational):
        x = Fraction(x)
        if x == 0:
            return 0
        if x > 0:
            return math.ceil(x - Fraction(1, 2))
        return -math.ceil(-x - Fraction(1, 2))
    x = float(x)
    if not math.isfinite(x):
        raise NonFinite(f"closest_integer of {x}")
    if x == 0.0:
        return 0
    if x > 0:
        return math.ceil(x - 0.5)
    return -math.ceil(-x - 0.5)


class Sector(enum.Enum):
    APlus = "APlus"
    AMinus = "AMinus"
    Outside = "Outside"


def sector_classify(alpha, r: float) -> Sector:
    """Which of the sectors A+(r), A-(r) contains alpha."""
    if r <= 0:
        raise ValueError("sector radius must be positive")
    alpha = complex(alpha)
    mod = abs(alpha)
    if mod == 0 or mod > r:
        return Sector.Outside
    if alpha.real >= abs(alpha.imag):
        return Sector.APlus
    if alpha.real <= -abs(alpha.imag):
        return Sector.AMinus
    return Sector.Outside


def in_sector(alpha, r: float) -> bool:
    """Membership in A(r) = A+(r) u A-(r)."""
    return sector_classify(alpha, r) is not Sector.Outside


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        if not (math.isfinite(self.center.real) and math.isfinite(self.center.imag)):
            raise NonFinite("disk center")

    def contains(self, z, tol: float = 0.0) -> bool:
        return abs(complex(z) - self.center) <= self.radius + tol

    def contains_disk(self, other: "Disk", tol: float = 0.0) -> bool:
        return abs(other.center - self.center) + other.radius <= self.radius + tol

    def boundary(self, n: int) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * t)

    def samples(self, n_boundary: int = 128, n_interior: int = 32) -> np.ndarray:
        """Boundary points plus a deterministic interior spiral (center included)."""
        pts = [self.boundary(n_boundary)]
        if n_interior > 0:
            k = np.arange(n_interior)
            rho = np.sqrt(k / n_interior)
            theta = k * np.pi * (3 - np.sqrt(5))
            pts.append(self.center + self.radius * rho * np.exp(1j * theta))
        return np.concatenate(pts)

    def widened(self, rel: float = 1e-12) -> "Disk":
        return Disk(self.center, self.radius * (1 + rel))


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.a * self.d - self.b * self.c) <= 1e-300:
            raise DegenerateMap("ad - bc vanishes")

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def inv(cls) -> "MoebiusMap":
        """The map z -> -1/z."""
        return cls(0, -1, 1, 0)

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self o other."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def pole(self):
        if self.c == 0:
            return None
        return -self.d / self.c

    def is_real(self, tol: float = 0.0) -> bool:
        # real up to a common complex scalar
        coeffs = np.array([self.a, self.b, self.c, self.d])
        k = coeffs[np.argmax(np.abs(coeffs))]
        return bool(np.all(np.abs((coeffs / k).imag) <= tol))


def mobius_image_disk(m: MoebiusMap, d: Disk) -> Disk:
    """Image of a closed disk under a Moebius map whose pole lies outside it."""
    pole = m.pole()
    if pole is not None and abs(pole - d.center) <= d.radius:
        raise PoleInsideDisk(f"pole {pole} inside {d}")
    if m.c == 0 or not np.isfinite(complex(pole)):
        # a pole beyond double range leaves the map affine to working precision
        return Disk((m.a * d.center + m.b) / m.d, d.radius * abs(m.a / m.d))
    if m.is_real() and d.center.imag == 0:
        # the real diameter maps onto the real diameter of the image
        x1 = m(d.center.real - d.radius)
        x2 = m(d.center.real + d.radius)
        return Disk((x1 + x2) / 2, abs(x2 - x1) / 2)
    # general case: the image of the inversion-symmetric point of the pole is
    # the center of the image disk
    z0, r = d.center, d.radius
    if pole is None:
        raise AssertionError("unreachable")
    delta = pole - z0
    sym = z0 + r * r / np.conj(delta)
    center = m(sym)
    radius = abs(m(z0 + r * delta / abs(delta)) - center) if abs(delta) > 0 else abs(m(z0 + r) - center)
    return Disk(center, radius)


def contour_integral_circle(f, center, radius: float, n: int = 512, estimate: bool = False):
    """(1/2 pi i) times the integral of f over the circle |z - center| = radius.

    Trapezoid rule with n nodes; with ``estimate`` returns (value, |I(n) - I(n/2)|).
    ``f`` must accept numpy arrays.
    """
    if n < 64:
        raise ValueError("need at least 64 nodes")
    t = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * t)
    z = center + radius * e
    vals = np.asarray(f(z), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("integrand not finite on the contour")
    # dz = i r e dt, so (1/2 pi i) * sum f dz = mean(f * r e)
    w = vals * radius * e
    value = complex(np.mean(w))
    if not estimate:
        return value
    half = complex(np.mean(w[::2]))
    return value, abs(value - half)


def to_json_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def from_json_complex(v) -> complex:
    re, im = v
    return complex(float(re), float(im))


def to_json_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s.strip())
