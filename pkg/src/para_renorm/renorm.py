"""Sectors in the Fatou plane, horn (Ecalle) maps through the lift, the
exponential projections and sampled top/bottom near-parabolic
renormalizations.

All horn-map work happens on the germ held by a single-germ FatouApprox
(``fa.germ``), in its own lift and Fatou coordinates.  The bottom
renormalization of f is s o R^t(f_check) o s, where f_check is the germ
recentred at sigma and conjugated by s(z) = conj(z) (the germ a bottom-end
FatouApprox holds).  Maps with Re alpha < 0 are renormalized through
s o f o s.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .fatou import FatouApprox, OrbitLeftDomain, _romberg, build_fatou
from .gauss_dynamics import ZeroInput, gauss_step
from .maps import TWO_PI_I, log_rotation

CV_PROJ = -4 / 27


class RenormError(Exception):
    pass


class IterationCapExceeded(RenormError):
    pass


class ProjectionInconsistency(RenormError):
    pass


class MultiplierMismatch(RenormError):
    pass


# --- rotation recursions -------------------------------------------------------

def renorm_rotation_top(alpha):
    """alpha -> -1/alpha - [Re(-1/alpha)], exact on rationals."""
    return gauss_step(alpha)


def renorm_rotation_bottom(beta):
    """beta -> -1/beta - [Re(-1/beta)], exact on rationals."""
    return gauss_step(beta)


# --- sectors -------------------------------------------------------------------

@dataclass(frozen=True)
class SectorSpec:
    re_lo: float = 0.5
    re_hi: float = 1.5
    im_split: float = 2.0


@dataclass
class SectorRegions:
    fa: FatouApprox
    spec: SectorSpec = field(default_factory=SectorSpec)

    def _strip(self, z):
        p = self.fa.phi(z)
        ok = (p.real >= self.spec.re_lo) & (p.real <= self.spec.re_hi) & self.fa.in_domain(z)
        return p, ok

    def in_A(self, z):
        p, ok = self._strip(z)
        return ok & (p.imag >= self.spec.im_split)

    def in_C(self, z):
        p, ok = self._strip(z)
        return ok & (np.abs(p.imag) <= self.spec.im_split)

    def in_B(self, z):
        p, ok = self._strip(z)
        return ok & (p.imag <= -self.spec.im_split)

    def classify(self, z) -> np.ndarray:
        """'A', 'C', 'B' or '' for each point (boundary rows favour C)."""
        z = np.asarray(z, dtype=complex)
        p, ok = self._strip(z)
        s = self.spec.im_split
        out = np.full(p.shape, "", dtype="<U1")
        out[ok & (p.imag > s)] = "A"
        out[ok & (p.imag < -s)] = "B"
        out[ok & (np.abs(p.imag) <= s)] = "C"
        return out

    def boundary_limits(self, heights=(5.0, 10.0, 20.0, 40.0)) -> dict:
        """Distances of Phi^{-1}(1 + i t) to 0 and of Phi^{-1}(1 - i t) to sigma."""
        t = np.asarray(heights, dtype=float)
        top = self.fa.inverse(1 + 1j * t)
        bot = self.fa.inverse(1 - 1j * t)
        sigma = self.fa.sigma_map if self.fa.end == "bottom" else _map_sigma(self.fa)
        return {"heights": t.tolist(), "dist_to_0": np.abs(top).tolist(),
                "dist_to_sigma": np.abs(bot - sigma).tolist()}


def _map_sigma(fa: FatouApprox) -> complex:
    from .maps import sigma_of
    return sigma_of(fa.map)


def sector_regions(fa: FatouApprox, spec: SectorSpec | None = None) -> SectorRegions:
    return SectorRegions(fa, spec or SectorSpec())


# --- projections and horn maps ----------------------------------------------------

def ex_top(xi):
    return CV_PROJ * np.exp(TWO_PI_I * np.asarray(xi, dtype=complex))


def ex_bottom(xi):
    return CV_PROJ * np.exp(-TWO_PI_I * np.asarray(xi, dtype=complex))


def ex_top_inv(z):
    """A branch of ex_top^{-1}; add integers for the others."""
    return np.log(np.asarray(z, dtype=complex) / CV_PROJ) / TWO_PI_I


def _single(fa: FatouApprox) -> FatouApprox:
    if fa.parts:
        raise ValueError("horn maps need a single-germ FatouApprox (complex alpha)")
    if fa.mode != "refined":
        raise ValueError("horn maps need a refined-mode FatouApprox")
    return fa


def ecale_lift(fa: FatouApprox, w, k="auto", cap: int = 100):
    """I(w) = F^k(w) - 1/alpha in the lift plane of fa's germ.

    With k="auto", k is the smallest iterate count whose projected point has
    local Fatou real part in (0, 2); an integer k is used for all points
    (needed for the commutation E(xi + 1) = E(xi) + 1).  Returns (I, k).
    """
    fa = _single(fa)
    ctx = fa.context
    per = ctx.period
    w = np.array(w, dtype=complex, ndmin=1)
    x0 = fa.box[0]
    if k != "auto":
        k = int(k)
        if k > cap:
            raise IterationCapExceeded(f"k = {k} exceeds the cap {cap}")
        cur = w.copy()
        for _ in range(k):
            cur = ctx.lift_F(cur, check=False)
        if not np.all(np.isfinite(cur)):
            raise OrbitLeftDomain("lift orbit left the domain")
        return cur - per, np.full(w.shape, k)
    out = np.full(w.shape, np.nan + 0j)
    ks = np.zeros(w.shape, dtype=int)
    todo = np.ones(w.shape, dtype=bool)
    cur = w.copy()
    for j in range(1, cap + 1):
        cur = np.where(todo, ctx.lift_F(cur, check=False), cur)
        if not np.all(np.isfinite(cur[todo])):
            raise OrbitLeftDomain("lift orbit left the domain")
        proj = cur - per
        cand = todo & (proj.real >= x0)
        if np.any(cand):
            re = np.full(w.shape, np.nan)
            re[cand] = fa._local_of_lift(proj[cand]).real
            hit = cand & (re > 0) & (re < 2)
            out[hit], ks[hit] = proj[hit], j
            todo &= ~hit
        if not np.any(todo):
            return out, ks
    raise IterationCapExceeded(f"no return to the base strip within {cap} iterates")


def ecale_map(fa: FatouApprox, xi, k="auto", cap: int = 100):
    """Horn map E = Phi o f^k o Phi^{-1} on local Fatou values, through the lift."""
    fa = _single(fa)
    w = fa.lift_inverse(xi)
    I, ks = ecale_lift(fa, w, k, cap)
    return fa._local_of_lift(I), ks


def ecale_direct(fa: FatouApprox, xi, k):
    """The same horn map evaluated in the germ plane: Phi(f^k(Phi^{-1}(xi)))."""
    fa = _single(fa)
    z = fa.context.tau(fa.lift_inverse(xi))
    germ = fa.germ
    k = np.broadcast_to(np.asarray(k), z.shape)
    for j in range(int(k.max())):
        z = np.where(k > j, germ.value(z), z)
    return fa.phi_local(z)


# --- sampled renormalization ----------------------------------------------------

@dataclass
class RenormSample:
    end: str
    z: np.ndarray
    R: np.ndarray
    derivative_at_0: complex
    target: complex
    rel_error: float
    k_iterates: int
    k_hist: dict
    residuals: dict
    ok: bool

    @property
    def grid(self) -> list:
        return list(zip(self.z.tolist(), self.R.tolist()))

    def to_json(self) -> dict:
        c = lambda v: [float(v.real), float(v.imag)]
        return {"end": self.end,
                "derivative_at_0": c(self.derivative_at_0), "target_multiplier": c(self.target),
                "rel_error": self.rel_error, "ok": self.ok, "k_iterates": self.k_iterates,
                "k_hist": {str(a): b for a, b in sorted(self.k_hist.items())},
                "residuals": self.residuals,
                "grid": [[*c(a), *c(b)] for a, b in zip(self.z, self.R)]}


def ring_grid(r_lo: float = 1e-4, r_hi: float = 1e-2, n_r: int = 5, n_theta: int = 16) -> np.ndarray:
    """Punctured ring of sample points, angles offset to avoid the real axis."""
    r = np.geomspace(r_lo, r_hi, n_r)
    th = 2 * math.pi * (np.arange(n_theta) + 0.5) / n_theta
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def fit_derivative(z: np.ndarray, R: np.ndarray, degree: int = 4) -> complex:
    """Least-squares fit R(z) = sum_{j=1..degree} a_j z^j; returns a_1."""
    s = float(np.max(np.abs(z)))
    V = (z[:, None] / s) ** np.arange(1, degree + 1)[None, :]
    a = np.linalg.lstsq(V, R, rcond=None)[0]
    return complex(a[0] / s)


def _lift_height(fa: FatouApprox) -> float:
    """How far the lattice point 1/alpha sits above the real axis of the lift.

    Orbits reach the top end only when they pass the gate above it, so sample
    heights in the Fatou plane are raised by this amount."""
    return max(0.0, fa.context.period.imag)


def _anchor(fa: FatouApprox) -> float:
    # left edge of the preimage window: 1.5 lift units inside the far end of the box
    w_cp = complex(fa.context.tau_inv(fa.germ.cp))
    w = fa.box[1] - 1.5 + 1j * (w_cp.imag + _lift_height(fa) + 0.8)
    return float(fa._local_of_lift(np.array([w]))[0].real)


def _local_renorm(fa: FatouApprox, z_loc: np.ndarray, k="auto", cap: int = 100):
    """Top renormalization of fa's germ at z_loc, with well-definedness and
    two-path residuals."""
    xi = ex_top_inv(z_loc)
    X = _anchor(fa)
    xi = xi + np.ceil(X - xi.real)
    E1, k1 = ecale_map(fa, xi, k, cap)
    E2, _ = ecale_map(fa, xi - 1, k, cap)
    R1, R2 = ex_top(E1), ex_top(E2)
    direct = ecale_direct(fa, xi, k1)
    res = {"well_defined": float(np.max(np.abs(R1 - R2))),
           "two_path": float(np.max(np.abs(direct - E1)))}
    return R1, k1, res


def _local_target(fa: FatouApprox) -> complex:
    return cmath.exp(-TWO_PI_I / fa.germ.alpha)


def renorm_sample(fa: FatouApprox, end: str | None = None, r_lo: float = 1e-4, r_hi: float = 1e-2,
                  n_r: int = 5, n_theta: int = 16, degree: int = 4, k="auto", cap: int = 100,
                  wd_tol: float = 1e-7, rel_tol: float = 1e-2, check: bool = False) -> RenormSample:
    """Sample R = ex o E o ex^{-1} on a ring around 0 and fit R'(0).

    ``end`` defaults to fa.end; a different end rebuilds the coordinate.  For
    real alpha the samples are Richardson-combined over the alpha +- i eps
    levels.  With ``check`` a failed multiplier comparison raises.
    """
    end = end or fa.end
    if end not in ("top", "bottom"):
        raise ValueError("end must be 'top' or 'bottom'")
    if end != fa.end:
        fa = build_fatou(fa.map, mode=fa.mode, end=end)
    singles = [f for pair in fa.parts for f in pair] if fa.parts else [_single(fa)]
    # the domain of R shrinks by |e^{2 pi i/alpha}| when Im(1/alpha) > 0
    shrink = math.exp(-2 * math.pi * max(_lift_height(f) for f in singles))
    z = ring_grid(r_lo * shrink, r_hi * shrink, n_r, n_theta)
    flip = end == "bottom"
    z_loc = np.conj(z) if flip else z
    if fa.parts:
        runs = [[_local_renorm(f, z_loc, k, cap) for f in pair] for pair in fa.parts]
        R_loc = _romberg([(a[0] + b[0]) / 2 for a, b in runs])
        ks = np.concatenate([r[1] for pair in runs for r in pair])
        res = {key: max(r[2][key] for pair in runs for r in pair) for key in runs[0][0][2]}
        target = _romberg([(_local_target(a) + _local_target(b)) / 2 for a, b in fa.parts])
    else:
        fa = _single(fa)
        R_loc, ks, res = _local_renorm(fa, z_loc, k, cap)
        target = _local_target(fa)
    if res["well_defined"] > wd_tol:
        raise ProjectionInconsistency(
            f"translated preimages disagree by {res['well_defined']:.3e} > {wd_tol:.1e}")
    R = np.conj(R_loc) if flip else R_loc
    if flip:
        target = target.conjugate()
    d0 = fit_derivative(z, R, degree)
    rel = abs(d0 - target) / abs(target)
    ok = rel <= rel_tol
    if check and not ok:
        raise MultiplierMismatch(f"R'(0) = {d0} vs {target}: relative error {rel:.3e}")
    hist = Counter(int(v) for v in ks.ravel())
    return RenormSample(end, z, R, d0, complex(target), float(rel), int(ks.max()), dict(hist), res, bool(ok))


def _sample_window(fa: FatouApprox, n: int, seed: int, shift: float = 0.0):
    """Random local Fatou values in the unit-width window used for projection."""
    rng = np.random.default_rng(seed)
    x = _anchor(fa) + shift + rng.uniform(0, 1, n)
    return x + 1j * (_lift_height(fa) + rng.uniform(0.5, 3.0, n))


def two_path_check(fa: FatouApprox, n: int = 50, seed: int = 0) -> float:
    """max |E(xi) through the lift - Phi(f^k(Phi^{-1}(xi)))| on n samples."""
    xi = _sample_window(fa, n, seed)
    E, ks = ecale_map(fa, xi)
    return float(np.max(np.abs(E - ecale_direct(fa, xi, ks))))


def commutation_check(fa: FatouApprox, n: int = 50, seed: int = 0) -> float:
    """max |E(xi + 1) - E(xi) - 1| with one fixed k, xi one unit left of the
    projection window so that both points lie in it or on its boundary."""
    xi = _sample_window(fa, n, seed, shift=-1.0)
    _, ks = ecale_map(fa, xi)
    k = int(ks.max())
    E0, _ = ecale_map(fa, xi, k)
    E1, _ = ecale_map(fa, xi + 1, k)
    return float(np.max(np.abs(E1 - E0 - 1)))


class SampledRenorm:
    """The renormalization of fa's map as a callable on a disk around 0.

    Evaluation goes through the horn map, so this is the sampled map only
    (no structure as a member of a class of maps).  It has the attributes
    ``maps.fixed_point_data`` needs, with ``kind = "sampled"``; ``alpha`` is
    the rotation of the fitted R'(0).
    """

    kind = "sampled"
    newton_tol = 1e-11

    def __init__(self, fa: FatouApprox, end: str | None = None, cap: int = 100, h: float = 1e-6):
        end = end or fa.end
        if end != fa.end:
            fa = build_fatou(fa.map, mode=fa.mode, end=end)
        self.fa = fa
        self.end = end
        self.cap = cap
        self.h = h
        self.sample = renorm_sample(fa, end=end, cap=cap)
        z, R = self.sample.z, self.sample.R
        s = float(np.abs(z).max())
        V = (z[:, None] / s) ** np.arange(1, 6)
        c = np.linalg.lstsq(V, R, rcond=None)[0] / s ** np.arange(1, 6)
        self.taylor = c
        self.alpha = log_rotation(complex(c[0]))
        self.max_k = self.sample.k_iterates

    @property
    def lam(self) -> complex:
        return complex(self.taylor[0])

    def _top_value(self, fa: FatouApprox, z_loc: np.ndarray) -> np.ndarray:
        xi = ex_top_inv(z_loc)
        xi = xi + np.ceil(_anchor(fa) - xi.real)
        E, ks = ecale_map(fa, xi, "auto", self.cap)
        self.max_k = max(self.max_k, int(np.max(ks)))
        return ex_top(E)

    def value(self, z):
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        flip = self.end == "bottom"
        z_loc = np.conj(flat) if flip else flat
        if self.fa.parts:
            out = _romberg([(self._top_value(a, z_loc) + self._top_value(b, z_loc)) / 2
                            for a, b in self.fa.parts])
        else:
            out = self._top_value(_single(self.fa), z_loc)
        out = np.conj(out) if flip else out
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    __call__ = value

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        step = self.h * np.maximum(np.abs(z), 1e-3)
        d = (self.value(z + step) - self.value(z - step)) / (2 * step)
        return d if z.ndim else complex(d)

    def sigma_guess(self) -> complex:
        """(1 - a_1)/a_2 from the Taylor fit on the sampling ring."""
        return complex((1 - self.taylor[0]) / self.taylor[1])

    def index_contour(self, sigma: complex) -> tuple:
        # a tight circle: R is only known on a bounded disk around 0
        return sigma / 2, 0.75 * abs(sigma)
