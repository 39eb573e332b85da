"""Pre-Fatou coverings, lifts, linearizers and numerical Fatou coordinates
for maps with a near-parabolic fixed point at 0.

A map is handled through a ``Germ``: f(z) = z + z (z - sigma) u(z) with
f'(0) = e^{2 pi i alpha} and f'(sigma) = e^{2 pi i beta}.  The covering
tau(w) = sigma / (1 - e^{-2 pi i alpha w}) semi-conjugates the lift F to f.

Two solvers produce the Fatou coordinate Phi (Phi o f = Phi + 1, Phi(cp) = 0):

* Abel sums L(w) = w + sum_k g(f^k(tau(w))), g = F - id - 1, which converge
  when 0 attracts (|f'(0)| < 1);
* collocation Phi = M + psi, where M = log(z)/(2 pi i alpha) +
  log(z - sigma)/(2 pi i beta) linearizes f to first order at both ends and
  psi is a polynomial in z fitted to the Abel equation on a box in the lift
  plane.  This works whether or not a fixed point attracts.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .maps import MapSpec, TWO_PI_I, sigma_of


class FatouError(Exception):
    pass


class BranchAmbiguity(FatouError):
    pass


class SingularInput(FatouError):
    pass


class OutsideTheta(FatouError):
    pass


class BranchCutHit(FatouError):
    pass


class NonConvergence(FatouError):
    pass


class OrbitLeftDomain(FatouError):
    pass


class NewtonDivergence(FatouError):
    pass


class ArgumentTrackingLost(FatouError):
    pass


class PetalTooNarrow(FatouError):
    pass


# --- germs --------------------------------------------------------------------

class Germ:
    """A holomorphic map fixing 0 and sigma, either the quadratic
    lam z + A z^2 (closed forms) or given by callables."""

    def __init__(self, lam, sigma, value, deriv, cp, quad=None):
        self.lam = complex(lam)
        self.sigma = complex(sigma)
        self._value = value
        self._deriv = deriv
        self.cp = complex(cp)
        self.quad = quad
        # principal logs: rotation numbers in the strip |Re| < 1/2
        self.alpha = cmath.log(self.lam) / TWO_PI_I
        self.beta = cmath.log(complex(deriv(self.sigma))) / TWO_PI_I

    @classmethod
    def quadratic(cls, lam, A) -> "Germ":
        lam, A = complex(lam), complex(A)
        return cls(lam, (1 - lam) / A, lambda z: lam * z + A * z * z,
                   lambda z: lam + 2 * A * z, -lam / (2 * A), (lam, A))

    @classmethod
    def from_map(cls, m: MapSpec) -> "Germ":
        if m.kind == "quadratic":
            lam = m.lam
            return cls.quadratic(lam, 27 * lam * lam / 16)
        return cls(m.lam, sigma_of(m), m.value, m.deriv, m.critical_point())

    def value(self, z):
        return self._value(z)

    def deriv(self, z):
        return self._deriv(z)

    @property
    def cv(self) -> complex:
        return complex(self.value(self.cp))

    def recentered(self) -> "Germ":
        """z -> f(z + sigma) - sigma; the roles of 0 and sigma swap."""
        s = self.sigma
        if self.quad is not None:
            lam, A = self.quad
            return Germ.quadratic(lam + 2 * A * s, A)
        f = self
        return Germ(f.deriv(s), -s, lambda z: f.value(z + s) - s,
                    lambda z: f.deriv(z + s), f.cp - s)

    def conjugated(self) -> "Germ":
        """s o f o s with s(z) = conj(z)."""
        if self.quad is not None:
            lam, A = self.quad
            return Germ.quadratic(lam.conjugate(), A.conjugate())
        f = self
        return Germ(self.lam.conjugate(), self.sigma.conjugate(),
                    lambda z: np.conj(f.value(np.conj(z))),
                    lambda z: np.conj(f.deriv(np.conj(z))), self.cp.conjugate())

    def g(self, z):
        """F(w) - w - 1 as a function of z = tau(w)."""
        z = np.asarray(z, dtype=complex)
        if self.quad is not None:
            lam, A = self.quad
            ratio = (lam + A * z) / (1 + A * z)
        else:
            ratio = 1 - self.sigma * self.u(z) / (1 + z * self.u(z))
        return np.log(ratio) / (TWO_PI_I * self.alpha) - 1

    def u(self, z):
        z = np.asarray(z, dtype=complex)
        if self.quad is not None:
            return self.quad[1] + 0 * z
        return (self.value(z) - z) / (z * (z - self.sigma))


# --- the lift ---------------------------------------------------------------

@dataclass
class LiftContext:
    germ: Germ
    inner_radius: float = 2.0
    branch_state: dict = field(default_factory=dict)

    @property
    def alpha(self) -> complex:
        return self.germ.alpha

    @property
    def sigma(self) -> complex:
        return self.germ.sigma

    @property
    def period(self) -> complex:
        return 1 / self.germ.alpha

    def _E(self, w):
        return np.exp(-TWO_PI_I * self.alpha * np.asarray(w, dtype=complex))

    def tau(self, w):
        return self.sigma / (1 - self._E(w))

    def dtau(self, w):
        E = self._E(w)
        return -TWO_PI_I * self.alpha * self.sigma * E / (1 - E) ** 2

    def tau_inv(self, z, check: bool = True):
        """Branch of tau^{-1} with real part in (0, Re(1/alpha)]."""
        z = np.asarray(z, dtype=complex)
        if check and np.any((z == 0) | (z == self.sigma)):
            raise SingularInput("tau^{-1} is singular at 0 and sigma")
        w = np.log(z / (z - self.sigma)) / (TWO_PI_I * self.alpha)
        per = self.period
        n = np.ceil(-w.real / per.real)
        n = np.where(w.real + n * per.real <= 0, n + 1, n)
        w = w + n * per
        if check and np.any(np.minimum(np.abs(w.real), np.abs(w.real - per.real)) < 1e-13):
            raise BranchAmbiguity("point on the branch cut of tau^{-1}")
        return w

    def theta_distance(self, w):
        """Distance from w to the lattice (1/alpha) Z."""
        w = np.asarray(w, dtype=complex)
        per = self.period
        n = np.round((w / per).real)
        return np.min([np.abs(w - (n + k) * per) for k in (-1, 0, 1)], axis=0)

    def lift_F(self, w, check: bool = True):
        w = np.asarray(w, dtype=complex)
        if check and np.any(self.theta_distance(w) < self.inner_radius):
            raise OutsideTheta("w too close to the lattice (1/alpha) Z")
        return w + 1 + self.germ.g(self.tau(w))

    # two-ended model coordinate
    def _log1mE(self, w):
        """log(1 - E(w)), continuous on the strip 0 < Re w < Re(1/alpha)."""
        E = self._E(w)
        big = np.abs(E) >= 1
        inv = np.where(big, 1 / np.where(big, E, 1), 0)
        small = np.where(big, 0, E)
        return np.where(big, -TWO_PI_I * self.alpha * np.asarray(w) + 1j * math.pi + np.log(1 - inv),
                        np.log(1 - small))

    def model(self, w):
        """M = log z/(2 pi i alpha) + log(z - sigma)/(2 pi i beta) in lift terms."""
        w = np.asarray(w, dtype=complex)
        a, b = self.alpha, self.germ.beta
        ls = cmath.log(self.sigma)
        l1 = self._log1mE(w)
        return (ls - l1) / (TWO_PI_I * a) + (ls - TWO_PI_I * a * w - l1) / (TWO_PI_I * b)

    def dmodel(self, w):
        w = np.asarray(w, dtype=complex)
        a, b = self.alpha, self.germ.beta
        E = self._E(w)
        dl1 = TWO_PI_I * a * E / (1 - E)
        return -dl1 * (1 / (TWO_PI_I * a) + 1 / (TWO_PI_I * b)) - a / b


def tau(ctx: LiftContext, w):
    return ctx.tau(w)


def tau_inv(ctx: LiftContext, z):
    return ctx.tau_inv(z)


def lift_F(ctx: LiftContext, w, check: bool = True):
    return ctx.lift_F(w, check)


# --- Abel sums --------------------------------------------------------------

@dataclass
class AbelStats:
    iterations: int
    ratio: float
    model_ratio: float
    tail: float


def abel_sum(germ: Germ, z, tol: float = 1e-14, cap: int = 1_000_000,
             escape: float = 1e3) -> tuple:
    """S(z) = sum_{k>=0} g(f^k z), so that L(tau^{-1} z) = tau^{-1} z + S(z).

    Converges geometrically with ratio |f'(0)| when 0 attracts; stops on a
    geometric-tail certificate.
    """
    z = np.array(z, dtype=complex, ndmin=1)
    if abs(germ.lam) >= 1:
        raise NonConvergence("Abel sums need an attracting fixed point (|f'(0)| < 1)")
    model_ratio = abs(germ.lam)
    s = np.zeros_like(z)
    prev = None
    it = 0
    while True:
        t = germ.g(z)
        s = s + t
        mag = np.abs(t)
        if not np.all(np.isfinite(mag)) or np.any(np.abs(z) > escape):
            raise OrbitLeftDomain("orbit left the domain of the Abel sum")
        it += 1
        if prev is not None and it > 8:
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(prev > 0, mag / prev, 0)
            ratio = float(np.max(r))
            rr = min(max(ratio, model_ratio), 1 - 1e-12)
            tail = float(np.max(mag)) * rr / (1 - rr)
            if tail < tol:
                return s, AbelStats(it, ratio, model_ratio, tail)
        if it >= cap:
            raise NonConvergence(f"Abel sum not converged after {cap} iterations")
        prev = mag
        z = germ.value(z)


def abel_linearizer(ctx: LiftContext, w, tol: float = 1e-14, cap: int = 1_000_000):
    """L(w) = lim F^n(w) - n."""
    w = np.array(w, dtype=complex, ndmin=1)
    s, stats = abel_sum(ctx.germ, ctx.tau(w), tol, cap)
    return w + s, stats


def abel_terms(germ: Germ, z, n: int) -> np.ndarray:
    """The first n increments g(f^k z) of the Abel sum at one point."""
    z = complex(z)
    out = []
    for _ in range(n):
        out.append(complex(germ.g(z)))
        z = complex(germ.value(z))
    return np.array(out)


# --- collocation solver -----------------------------------------------------------

class _ArnoldiBasis:
    """Polynomials orthonormal on a point set (Vandermonde with Arnoldi)."""

    def __init__(self, pts, degree, center, scale):
        self.c0, self.s, self.N = center, scale, degree
        x = (pts - center) / scale
        m = len(x)
        Q = np.zeros((m, degree + 1), complex)
        Q[:, 0] = 1
        H = np.zeros((degree + 1, degree), complex)
        for k in range(degree):
            q = x * Q[:, k]
            for _ in range(2):
                h = Q[:, :k + 1].conj().T @ q / m
                q = q - Q[:, :k + 1] @ h
                H[:k + 1, k] += h
            H[k + 1, k] = np.linalg.norm(q) / math.sqrt(m)
            Q[:, k + 1] = q / H[k + 1, k]
        self.H = H
        self.Q = Q

    def eval(self, z, deriv: bool = False):
        x = (np.asarray(z, dtype=complex).ravel() - self.c0) / self.s
        N, H = self.N, self.H
        W = np.zeros((len(x), N + 1), complex)
        W[:, 0] = 1
        D = np.zeros_like(W) if deriv else None
        for k in range(N):
            q = x * W[:, k] - W[:, :k + 1] @ H[:k + 1, k]
            W[:, k + 1] = q / H[k + 1, k]
            if deriv:
                dq = W[:, k] / self.s + x * D[:, k] - D[:, :k + 1] @ H[:k + 1, k]
                D[:, k + 1] = dq / H[k + 1, k]
        return (W, D) if deriv else W


@dataclass
class CollocationFit:
    basis: _ArnoldiBasis
    coef: np.ndarray
    degree: int
    fit_residual: float
    holdout_residual: float
    box: tuple  # (x0, x1, y0, y1) in lift coordinates

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.basis.eval(z)[:, 1:] @ self.coef).reshape(z.shape)

    def dpsi(self, z):
        z = np.asarray(z, dtype=complex)
        _, D = self.basis.eval(z, deriv=True)
        return (D[:, 1:] @ self.coef).reshape(z.shape)


def _collocation_rows(ctx: LiftContext, w):
    z = ctx.tau(w)
    fz = ctx.germ.value(z)
    w2 = ctx.tau_inv(fz, check=False)
    return z, fz, w2


def collocation_fit(ctx: LiftContext, Y: float = 6.0, right_margin: float = 2.0,
                    n_side: int = 60, degrees=(40, 60, 80, 100, 120), seed: int = 0,
                    target: float = 1e-11) -> CollocationFit:
    """Fit psi so that M + psi solves the Abel equation on the lift box
    Re w in [Re cp_hat - 1, Re(1/alpha) - right_margin],
    -Y <= Im w <= Y + max(0, Im(1/alpha)).

    The box reaches above the lattice point 1/alpha so that orbits passing
    the gate towards the top end start inside it.  The degree is chosen by
    the worst residual on a seeded holdout set."""
    germ = ctx.germ
    w_cp = complex(ctx.tau_inv(germ.cp))
    x0 = w_cp.real - 1
    x1 = ctx.period.real - right_margin
    if x1 - x0 < 3:
        raise PetalTooNarrow(f"lift box [{x0:.2f}, {x1:.2f}] too narrow for collocation")
    y0, y1 = -Y, Y + max(0.0, ctx.period.imag)
    n_y = int(round(n_side * (y1 - y0) / (2 * Y)))
    X, Yg = np.meshgrid(np.linspace(x0, x1, n_side), np.linspace(y0, y1, n_y))
    w = (X + 1j * Yg).ravel()
    z, fz, w2 = _collocation_rows(ctx, w)
    keep = (w2.real >= x0) & (w2.real <= x1) & (w2.imag >= y0) & (w2.imag <= y1) & np.isfinite(fz)
    w, z, fz, w2 = w[keep], z[keep], fz[keep], w2[keep]
    rhs = 1 - (ctx.model(w2) - ctx.model(w))
    rng = np.random.default_rng(seed)
    wh = rng.uniform(x0 + 0.5, x1 - 1.5, 400) + 1j * rng.uniform(y0 + 0.5, y1 - 0.5, 400)
    zh, fzh, wh2 = _collocation_rows(ctx, wh)
    rhs_h = 1 - (ctx.model(wh2) - ctx.model(wh))
    pts = np.concatenate([z, fz])
    center = ctx.sigma / 2
    scale = float(np.max(np.abs(pts - center)))
    best = None
    worse = 0
    for N in degrees:
        basis = _ArnoldiBasis(pts, N, center, scale)
        Qz, Qf = basis.Q[:len(z)], basis.Q[len(z):]
        A = (Qf - Qz)[:, 1:]
        coef = np.linalg.lstsq(A, rhs, rcond=1e-13)[0]
        fit = float(np.max(np.abs(A @ coef - rhs)))
        Bh = basis.eval(zh)[:, 1:]
        Bfh = basis.eval(fzh)[:, 1:]
        hold = float(np.max(np.abs((Bfh - Bh) @ coef - rhs_h)))
        cand = CollocationFit(basis, coef, N, fit, hold, (x0, x1, y0, y1))
        if best is None or hold < best.holdout_residual:
            best, worse = cand, 0
        else:
            worse += 1
        if best.holdout_residual < target or worse >= 2:
            break
    return best


# --- Fatou coordinates --------------------------------------------------------

def _romberg(syms: list):
    """Richardson table for values with an even expansion in eps, levels eps / 2^j."""
    row = list(syms)
    k = 1
    while len(row) > 1:
        fac = 4 ** k
        row = [(fac * b - a) / (fac - 1) for a, b in zip(row, row[1:])]
        k += 1
    return row[0]


def _perturbation(alpha: complex, eps: float) -> float:
    # keep alpha +- i eps inside the sector |Im| <= |Re|
    return min(eps, 0.2 * abs(alpha))


@dataclass
class FatouApprox:
    """Numerical Fatou coordinate of a map, normalized by Phi(cp) = 0.

    ``end="bottom"`` computes the same coordinate from the germ recentred at
    sigma and conjugated by s(z) = conj(z); ``conjugated`` marks maps with
    Re alpha < 0 that are handled through s o f o s.
    """

    context: LiftContext
    base_value: complex
    mode: str = "refined"
    solver: str = "collocation"
    end: str = "top"
    conjugated: bool = False
    sigma_map: complex = 0j
    fit: CollocationFit | None = None
    tol: float = 1e-14
    eps_imag: float = 0.0
    parts: tuple = ()  # ((FatouApprox(+), FatouApprox(-)), ...) per eps level
    map: MapSpec | None = None
    residual_stats: dict = field(default_factory=dict)

    # local (germ) coordinates versus coordinates of the map
    def to_local(self, z):
        z = np.asarray(z, dtype=complex)
        if self.end == "bottom":
            z = np.conj(z - self.sigma_map)
        if self.conjugated:
            z = np.conj(z)
        return z

    def from_local(self, z):
        z = np.asarray(z, dtype=complex)
        if self.conjugated:
            z = np.conj(z)
        if self.end == "bottom":
            z = np.conj(z) + self.sigma_map
        return z

    def _out(self, v):
        v = np.asarray(v, dtype=complex)
        flips = int(self.end == "bottom") + int(self.conjugated)
        return np.conj(v) if flips % 2 else v

    @property
    def germ(self) -> Germ:
        return self.context.germ

    @property
    def alpha(self) -> complex:
        return self.map.alpha if self.map is not None else self.germ.alpha

    @property
    def critical_point(self) -> complex:
        return self.map.critical_point()

    @property
    def critical_value(self) -> complex:
        return complex(self.map.critical_value())

    @property
    def box(self) -> tuple:
        """Lift box (x0, x1, y0, y1) where the coordinate is fitted or validated."""
        ref = self.reference
        if ref.fit is not None:
            return ref.fit.box
        ctx = ref.context
        x0 = complex(ctx.tau_inv(ref.germ.cp)).real - 1
        return (x0, ctx.period.real - 2, -6.0, 6.0 + max(0.0, ctx.period.imag))

    @property
    def reference(self) -> "FatouApprox":
        """The single-germ approximation used for geometry (grids, seeds)."""
        return self.parts[-1][0] if self.parts else self

    # local evaluation, on lift coordinates of the germ
    def _local_of_lift(self, w):
        w = np.asarray(w, dtype=complex)
        ctx = self.context
        if self.mode == "model":
            return ctx.model(w) - self.base_value
        z = ctx.tau(w)
        if self.solver == "abel":
            s, _ = abel_sum(self.germ, z.ravel(), self.tol)
            return w + s.reshape(w.shape) - self.base_value
        return ctx.model(w) + self.fit.psi(z) - self.base_value

    def _dlocal_of_lift(self, w):
        w = np.asarray(w, dtype=complex)
        ctx = self.context
        if self.mode == "model":
            return ctx.dmodel(w)
        if self.solver == "abel":
            h = 1e-6
            return (self._local_of_lift(w + h) - self._local_of_lift(w - h)) / (2 * h)
        return ctx.dmodel(w) + self.fit.dpsi(ctx.tau(w)) * ctx.dtau(w)

    def phi(self, z):
        z = np.asarray(z, dtype=complex)
        if self.parts:
            return _romberg([(fp.phi(z) + fm.phi(z)) / 2 for fp, fm in self.parts])
        w = self.context.tau_inv(self.to_local(z))
        return self._out(self._local_of_lift(w))

    __call__ = phi

    def richardson_check(self, z) -> dict:
        """Compare the extrapolants built from (eps, eps/2) and (eps/2, eps/4)."""
        if len(self.parts) < 3:
            raise ValueError("needs three eps levels (real alpha)")
        z = np.asarray(z, dtype=complex)
        syms = [(fp.phi(z) + fm.phi(z)) / 2 for fp, fm in self.parts]
        r1 = (4 * syms[1] - syms[0]) / 3
        r2 = (4 * syms[2] - syms[1]) / 3
        return {"extrapolant_diff": float(np.max(np.abs(r1 - r2))),
                "error_estimate": float(np.max(np.abs(syms[1] - syms[0]) / 3))}

    def inverse(self, xi, tol: float = 1e-13, maxit: int = 50):
        """Phi^{-1}(xi) by Newton in the lift plane."""
        xi = np.array(xi, dtype=complex, ndmin=1)
        if self.parts:
            return self._inverse_z(xi, tol, maxit)
        return self.from_local(self.context.tau(self.lift_inverse(self._out(xi), tol, maxit)))

    def lift_inverse(self, xi_local, tol: float = 1e-13, maxit: int = 50):
        """Lift w with local Fatou value xi_local (germ coordinates, single germ)."""
        target = np.array(xi_local, dtype=complex, ndmin=1)
        w = target + complex(self.context.tau_inv(self.germ.cp))
        for _ in range(maxit):
            r = self._local_of_lift(w) - target
            w = w - r / self._dlocal_of_lift(w)
            if np.all(np.abs(r) <= tol * np.maximum(1, np.abs(target))):
                return w
        if not np.all(np.abs(self._local_of_lift(w) - target) <= 1e-9 * np.maximum(1, np.abs(target))):
            raise NewtonDivergence("Fatou coordinate inverse did not converge")
        return w

    def phi_local(self, z_local):
        """Local Fatou value of a point of the germ plane (single germ)."""
        return self._local_of_lift(self.context.tau_inv(z_local))

    def _inverse_z(self, xi, tol, maxit):
        # Newton in the lift plane of the reference germ, where Phi is close to a translation
        ref = self.reference
        ctx = ref.context
        z_of = lambda w: ref.from_local(ctx.tau(w))
        w = ref.lift_of(ref.inverse(xi))
        h = 1e-6
        for _ in range(maxit):
            f0 = self.phi(z_of(w)) - xi
            if np.all(np.abs(f0) <= tol * np.maximum(1, np.abs(xi))):
                return z_of(w)
            d = (self.phi(z_of(w + h)) - self.phi(z_of(w - h))) / (2 * h)
            w = w - f0 / d
        z = z_of(w)
        if np.all(np.abs(self.phi(z) - xi) <= 1e-9 * np.maximum(1, np.abs(xi))):
            return z
        raise NewtonDivergence("Fatou coordinate inverse did not converge")

    def lift_of(self, z):
        """Normalized lift coordinate (germ coordinates) of a point of the map plane."""
        return self.context.tau_inv(self.to_local(z))

    def in_domain(self, z) -> np.ndarray:
        """Whether z lies where the fitted coordinate is certified (top and
        bottom ends extend beyond the box)."""
        w = self.reference.lift_of(z)
        x0, x1 = self.box[:2]
        return (w.real >= x0) & (w.real <= x1)

    def to_json(self) -> dict:
        ref = self.reference
        return {"alpha": [self.alpha.real, self.alpha.imag], "mode": self.mode,
                "solver": ref.solver, "end": self.end, "conjugated": self.conjugated,
                "eps_imag": self.eps_imag,
                "degree": ref.fit.degree if ref.fit is not None else None,
                "residual_stats": self.residual_stats}


def build_fatou(m: MapSpec, mode: str = "refined", end: str = "top", eps_imag: float = 1e-3,
                inner_radius: float = 2.0, solver: str = "auto", levels: int = 3,
                tol: float = 1e-14) -> FatouApprox:
    """Fatou coordinate of ``m`` normalized by Phi(cp) = 0.

    solver: "collocation" (also what "auto" selects) or "abel", which needs
    |f'(0)| < 1 for the germ and is exact but only on the basin of 0.  For real
    alpha the refined value is the order-2 Richardson extrapolation of the
    symmetric averages at alpha +- i eps.
    """
    if mode not in ("refined", "model"):
        raise ValueError("mode must be 'refined' or 'model'")
    if end not in ("top", "bottom"):
        raise ValueError("end must be 'top' or 'bottom'")
    if solver not in ("auto", "abel", "collocation"):
        raise ValueError("solver must be 'auto', 'abel' or 'collocation'")
    if m.alpha.imag == 0 and mode == "refined":
        eps = _perturbation(m.alpha, eps_imag)
        part_solver = "collocation" if solver == "auto" else solver
        parts = tuple(tuple(build_fatou(MapSpec(m.kind, m.alpha + sgn * 1j * eps / 2 ** j, m.c),
                                        mode, end, eps_imag, inner_radius, part_solver, levels, tol)
                            for sgn in (1, -1))
                      for j in range(levels))
        ref = parts[-1][0]
        return FatouApprox(ref.context, ref.base_value, mode, ref.solver, end, ref.conjugated,
                           ref.sigma_map, None, tol, eps, parts, m)
    germ = Germ.from_map(m)
    sigma_map = germ.sigma
    if end == "bottom":
        germ = germ.recentered().conjugated()
    conj = False
    if germ.alpha.real < 0:
        germ = germ.conjugated()
        conj = True
    ctx = LiftContext(germ, inner_radius)
    w_cp = complex(ctx.tau_inv(germ.cp))
    fa = FatouApprox(ctx, complex(ctx.model(w_cp)), "model", "model", end, conj, sigma_map,
                     None, tol, map=m)
    if mode == "model":
        return fa
    # Abel orbits from horn-map and Newton points can leave the basin of 0
    use = "collocation" if solver == "auto" else solver
    fa.mode, fa.solver = "refined", use
    if use == "collocation":
        fa.fit = collocation_fit(ctx)
        fa.residual_stats = {"fit": fa.fit.fit_residual, "holdout": fa.fit.holdout_residual,
                             "degree": fa.fit.degree}
    fa.base_value = 0j
    fa.base_value = complex(fa._local_of_lift(np.array([w_cp]))[0])
    return fa


def fatou_coord(fa: FatouApprox, z):
    return fa.phi(z)


def fatou_inverse(fa: FatouApprox, xi):
    return fa.inverse(xi)


# --- validation grids and probes --------------------------------------------------

def validation_grid(fa: FatouApprox, n: int = 20, im_half: float = 3.0) -> np.ndarray:
    """n x n petal points laid out in lift coordinates: Re w from Re cp_hat + 1
    over half the remaining fitted width (at least 1), |Im w - Im cp_hat| <= im_half."""
    ref = fa.reference
    ctx = ref.context
    w_cp = complex(ctx.tau_inv(ref.germ.cp))
    x1 = fa.box[1]
    lo = w_cp.real + 1
    hi = lo + max(1.0, (x1 - lo - 1) / 2)
    xs = np.linspace(lo, hi, n)
    ys = w_cp.imag + np.linspace(-im_half, im_half, n)
    W = xs[None, :] + 1j * ys[:, None]
    return ref.from_local(ctx.tau(W)).ravel()


@dataclass
class GridResidual:
    z: np.ndarray
    phi: np.ndarray
    residual: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.residual))

    @property
    def mean(self) -> float:
        return float(np.mean(self.residual))


def grid_residual(fa: FatouApprox, n: int = 20, im_half: float = 3.0) -> GridResidual:
    """|Phi(f(z)) - Phi(z) - 1| on the validation grid, both values cold."""
    z = validation_grid(fa, n, im_half)
    p = fa.phi(z)
    res = np.abs(fa.phi(fa.map.value(z)) - p - 1)
    fa.residual_stats = dict(fa.residual_stats, grid_max=float(res.max()), grid_mean=float(res.mean()))
    return GridResidual(z, p, res)


def petal_width_probe(fa: FatouApprox, y: float = 0.0, step: float = 0.25,
                      k_bar: float = 10.0) -> float:
    """Horizontal extent of the Phi-image along Im xi = y.

    Phi^{-1}(x + iy) is continued to large x by Phi^{-1}(xi + 1) =
    f(Phi^{-1}(xi)); the width is the first x where the lift of the marched
    point stops advancing, i.e. where the orbit passes the gate, leaves the
    petal and its lift wraps back by about 1/alpha.
    """
    m = fa.map
    re_inv = abs((1 / m.alpha).real)
    frac = np.arange(0, 1, step)
    z = fa.inverse(frac + 1j * y)
    ref = fa.reference
    w_prev = ref.lift_of(z)
    width = 1.0 - step
    n = 0
    limit = re_inv + 2 * k_bar
    while width < limit:
        z = m.value(z)
        if not np.all(np.isfinite(z)) or np.any(np.abs(z) > 1e6):
            break
        w = ref.lift_of(z)
        off = ~np.isfinite(w) | ((w - w_prev).real < 0)
        if np.any(off):
            width = n + 1 + frac[np.nonzero(off)[0][0]] - step
            break
        w_prev = w
        n += 1
        width = n + 1 - step
    if abs(width - re_inv) > k_bar:
        raise AssertionError(f"petal width {width} differs from Re(1/alpha) = {re_inv} by more than {k_bar}")
    return float(width)


@dataclass
class SpiralReport:
    xi1: float
    xi2: np.ndarray
    values: np.ndarray
    limit: float
    c_f: float
    bound: float
    ok: bool
    drift: float

    def to_json(self) -> dict:
        return {"xi1": self.xi1, "xi2": self.xi2.tolist(), "values": self.values.tolist(),
                "limit": self.limit, "c_f": self.c_f, "bound": self.bound, "ok": self.ok,
                "drift": self.drift}


def spiral_probe(fa: FatouApprox, xi1: float = 1.0, xi2_max: float = 60.0, n: int = 121,
                 k_prime: float = 1.0) -> SpiralReport:
    """arg Phi^{-1}(xi1 + i xi2) + 2 pi xi2 Im alpha for xi2 in [0, xi2_max]
    with continuous argument tracking."""
    alpha = fa.map.alpha
    sigma = sigma_of(fa.map)
    xi2 = np.linspace(0, xi2_max, n)
    z = fa.inverse(xi1 + 1j * xi2)
    args = np.unwrap(np.angle(z))
    jumps = np.abs(np.diff(args))
    # consecutive samples must not turn by more than a quarter turn
    if np.any(jumps > math.pi / 2):
        raise ArgumentTrackingLost(f"argument jump at xi2 = {xi2[1 + int(np.argmax(jumps))]}")
    vals = args + 2 * math.pi * xi2 * alpha.imag
    limit = float(vals[-1])
    cf = limit - cmath.phase(sigma) - 2 * math.pi * xi1 * alpha.real
    cf = (cf + math.pi) % (2 * math.pi) - math.pi
    bound = k_prime * (1 - math.log(abs(alpha)))
    drift = float(abs(vals[-1] - vals[(3 * n) // 4]))
    return SpiralReport(float(xi1), xi2, vals, limit, float(cf), bound, abs(cf) <= bound, drift)
