"""Renormalization towers over type sequences, the sets Lambda_r(kappa),
Cantor components on the real slice and the growth-class inclusion
pipeline.

Rotation recursion: alpha_{n+1} = G(alpha_n) when kappa_n = t and
alpha_{n+1} = G(beta_n) when kappa_n = b, with G the Gauss step.
"""

from __future__ import annotations

import ast
import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .fatou import build_fatou
from .gauss_dynamics import gauss_step, gauss_step_array, ply_block_disk, qg_disk_check
from .maps import MapSpec, TWO_PI_I, fixed_point_data, log_rotation, shift_re, sigma_of
from .mcf import RationalSeq, kappa_type, parse_kappa, qg_check
from .numerics_core import closest_integer, contour_integral_circle, in_sector
from .renorm import SampledRenorm

STATUSES = ("alive", "terminated_parabolic", "exited_sector", "depth_reached")


class TowerError(Exception):
    pass


class ModeMismatch(TowerError):
    pass


class SeedNotMember(TowerError):
    pass


class DecayViolation(TowerError):
    pass


# --- exact real quadratic irrationals -----------------------------------

@dataclass(frozen=True)
class QuadSurd:
    """a + b sqrt(d) with rational a, b and a non-square integer d > 1."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.d < 2 or math.isqrt(self.d) ** 2 == self.d:
            raise ValueError("d must be a non-square integer > 1")

    @classmethod
    def make(cls, a, b, d):
        """A QuadSurd, or a Fraction when b = 0."""
        return Fraction(a) if b == 0 else cls(a, b, d)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        return f"QuadSurd({self.a}, {self.b}, {self.d})"

    def __str__(self):
        return f"{self.a} + {self.b}*sqrt({self.d})"

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa * sb >= 0:
            return sa or sb
        return sa if self.a * self.a > self.b * self.b * self.d else sb

    def _parts(self, other):
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise ValueError("mixed square roots")
            return other.a, other.b
        if isinstance(other, (Rational, int)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return QuadSurd.make(self.a + p[0], self.b + p[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return QuadSurd.make(self.a - p[0], self.b - p[1], self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        return QuadSurd.make(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def reciprocal(self):
        n = self.a * self.a - self.b * self.b * self.d
        return QuadSurd(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        if p[1] == 0:
            return QuadSurd.make(self.a / p[0], self.b / p[0], self.d)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.a == p[0] and self.b == p[1]

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def closest_integer(self) -> int:
        # irrational, so never a tie
        n = round(float(self))
        while self - n > Fraction(1, 2):
            n += 1
        while self - n < Fraction(-1, 2):
            n -= 1
        return n

    def approx(self, digits: int = 60) -> Fraction:
        """A rational within 10^-digits * (1 + |b|) of the value."""
        scale = 10 ** digits
        root = Fraction(math.isqrt(self.d * scale * scale), scale)
        return self.a + self.b * root


class _SurdEval(ast.NodeVisitor):
    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_Constant(self, node):
        if isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node.value, float):
            return Fraction(str(node.value))
        raise ValueError("only numeric literals are allowed")

    def visit_UnaryOp(self, node):
        v = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        raise ValueError("unsupported operator")

    def visit_BinOp(self, node):
        x, y = self.visit(node.left), self.visit(node.right)
        ops = {ast.Add: lambda: x + y, ast.Sub: lambda: x - y,
               ast.Mult: lambda: x * y, ast.Div: lambda: x / y}
        for k, f in ops.items():
            if isinstance(node.op, k):
                return f()
        raise ValueError("unsupported operator")

    def visit_Call(self, node):
        if not (isinstance(node.func, ast.Name) and node.func.id == "sqrt" and len(node.args) == 1):
            raise ValueError("only sqrt(n) calls are allowed")
        n = self.visit(node.args[0])
        if not (isinstance(n, Fraction) and n.denominator == 1 and n > 0):
            raise ValueError("sqrt needs a positive integer")
        n = int(n)
        r = math.isqrt(n)
        return Fraction(r) if r * r == n else QuadSurd(0, 1, n)

    def generic_visit(self, node):
        raise ValueError(f"unsupported syntax {type(node).__name__}")


def parse_seed(text: str):
    """A rational ("1/7"), a real quadratic irrational ("(sqrt(45)-7)/2") or a
    complex number ("0.1+0.05j")."""
    text = text.strip()
    try:
        return _SurdEval().visit(ast.parse(text, mode="eval"))
    except (ValueError, SyntaxError, ZeroDivisionError):
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise ValueError(f"cannot parse seed {text!r}") from None


ALPHA_STAR = (QuadSurd(0, 1, 45) - 7) / 2


def _is_exact(x) -> bool:
    return isinstance(x, (Rational, QuadSurd))


def gauss_exact(x):
    """G on rationals (via gauss_step) and on quadratic irrationals."""
    if isinstance(x, QuadSurd):
        y = -x.reciprocal()
        return y - y.closest_integer()
    return gauss_step(x)


def _in_sector(x, r) -> bool:
    if _is_exact(x):
        rr = Fraction(str(r))
        return x != 0 and -rr <= x <= rr
    return in_sector(complex(x), r)


def _to_json_value(x):
    if x is None:
        return None
    if _is_exact(x):
        return {"exact": str(x), "value": float(x)}
    x = complex(x)
    return [x.real, x.imag]


# --- towers -----------------------------------------------------------------

@dataclass(frozen=True)
class TowerLevel:
    n: int
    kappa: str
    alpha: object
    beta: object
    in_sector: bool
    source: str
    n_samples: int = 1
    max_abs_alpha: float | None = None
    residuals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"n": self.n, "kappa": self.kappa, "alpha": _to_json_value(self.alpha),
                "beta": _to_json_value(self.beta), "in_sector": self.in_sector,
                "source": self.source, "n_samples": self.n_samples,
                "max_abs_alpha": self.max_abs_alpha, "residuals": dict(self.residuals)}


@dataclass(frozen=True)
class TowerState:
    levels: tuple
    status: str
    mode: str
    r: float

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def alphas(self) -> list:
        return [lv.alpha for lv in self.levels]

    def to_json(self) -> dict:
        return {"mode": self.mode, "r": self.r, "status": self.status,
                "levels": [lv.to_json() for lv in self.levels]}


def _kappa_word(kappa, depth: int) -> tuple:
    if kappa is None:
        return ("t",) * depth
    word = parse_kappa(kappa) if isinstance(kappa, str) else tuple(kappa)
    if len(word) == 1:
        word = word * depth
    if len(word) < depth:
        raise ModeMismatch(f"type sequence has {len(word)} letters, depth is {depth}")
    if any(c not in "tb" for c in word):
        raise ModeMismatch("type letters must be 't' or 'b'")
    return word[:depth]


def _run_exact(seed, word, depth, r) -> TowerState:
    if "b" in word:
        raise ModeMismatch("exact mode needs an all-t type sequence (beta is never computed)")
    if isinstance(seed, float):
        seed = Fraction(seed) if seed == int(seed) else seed
    levels = []
    alpha = seed
    status = "depth_reached"
    for n in range(1, depth + 1):
        ok = _in_sector(alpha, r)
        levels.append(TowerLevel(n, word[n - 1], alpha, None, ok, "exact",
                                 max_abs_alpha=abs(float(alpha)) if _is_exact(alpha) else abs(complex(alpha))))
        if alpha == 0:
            status = "terminated_parabolic"
            break
        if not ok:
            status = "exited_sector"
            break
        if n < depth:
            alpha = gauss_exact(alpha)
    return TowerState(tuple(levels), status, "exact", r)


def _growth_levels_ok(vals: np.ndarray, r: float, cone: bool) -> tuple:
    """Membership as the growth proposition states it: modulus <= r, plus the
    45 degree cone except at the last level of a block.  The fraction of
    samples in A(r) proper is reported as well."""
    mod_ok = bool(np.all(np.abs(vals) <= r))
    strict = np.array([in_sector(v, r) for v in vals])
    ok = bool(strict.all()) if cone else mod_ok
    return ok, {"strict_sector_fraction": float(strict.mean())}


def _run_ply(seq: RationalSeq, word, depth, r, n_boundary=64, n_interior=16) -> TowerState:
    expected, ls = kappa_type(seq, depth)
    if tuple(word) != expected:
        raise ModeMismatch(f"ply-disk mode needs the type sequence of the blocks, {''.join(expected)}")
    levels = []
    status = "depth_reached"
    n = 0
    for k, m in enumerate(seq.ms, start=1):
        disk = ply_block_disk(seq, k)
        beta = np.concatenate([[disk.center], disk.samples(n_boundary, n_interior)])
        vals = None
        for j in range(m):
            n = ls[k - 1] + j + 1
            if n > depth:
                break
            if j == 0:
                vals = beta
                # the index relation of the quadratic family: e(alpha) = 2 - e(beta)
                alpha = log_rotation(2 - cmath.exp(TWO_PI_I * beta[0]))
            else:
                vals = gauss_step_array(vals)
                alpha = complex(vals[0])
            ok, res = _growth_levels_ok(vals, r, cone=j < m - 1)
            lv = TowerLevel(n, "b" if j == 0 else "t", alpha, complex(beta[0]) if j == 0 else None,
                            ok, "ply-disk", len(vals), float(np.abs(vals).max()), res)
            levels.append(lv)
            if not lv.in_sector:
                return TowerState(tuple(levels), "exited_sector", "ply-disk", r)
        if n >= depth:
            break
    return TowerState(tuple(levels), status, "ply-disk", r)


def _analytic_map(m, kappa: str):
    fa = build_fatou(m, mode="refined", end="top" if kappa == "t" else "bottom")
    return SampledRenorm(fa)


def _run_analytic(seed, word, depth, r) -> TowerState:
    if depth > 3:
        raise ModeMismatch("analytic mode is capped at depth 3")
    alpha = complex(seed)
    f = MapSpec.quadratic(alpha)
    levels = []
    for n in range(1, depth + 1):
        ok = in_sector(alpha, r)
        beta, res = None, {}
        if f is not None and ok:
            if isinstance(f, SampledRenorm):
                fp = fixed_point_data(f, n=256, contour=f.index_contour(
                    sigma_of(f)))
                res["alpha_recursion"] = abs(shift_re(f.alpha) - shift_re(alpha))
                res["max_k"] = f.max_k
            else:
                fp = fixed_point_data(f)
            beta = fp.beta
            res["index"] = fp.index_residual
        levels.append(TowerLevel(n, word[n - 1], alpha, beta, ok, "analytic", residuals=res,
                                 max_abs_alpha=abs(alpha)))
        if not ok:
            return TowerState(tuple(levels), "exited_sector", "analytic", r)
        if n == depth:
            break
        kappa = word[n - 1]
        if kappa == "b" and beta is None:
            raise ModeMismatch(f"level {n} needs beta, which is unavailable at this depth")
        nxt = gauss_step(alpha if kappa == "t" else beta)
        # the sampled map's Fatou coordinate is not built, so only f_2 is available
        f = _analytic_map(f, kappa) if n == 1 and in_sector(complex(nxt), r) else None
        alpha = complex(nxt)
    return TowerState(tuple(levels), "depth_reached", "analytic", r)


def tower_run(seed, kappa=None, depth: int = 10, mode: str = "exact", r: float = 0.1) -> TowerState:
    """Rotation numbers alpha_n (and beta_n where available) of the tower.

    exact: rational, quadratic-irrational or complex seeds with kappa all t.
    ply-disk: a RationalSeq seed; beta at the first level of block k is sampled
    from the block's disk (64 boundary + 16 interior points plus the centre)
    and the following levels are G^j of those samples.  Each block is sampled
    afresh, so the recursion holds within blocks.
    analytic: a complex seed, depth <= 3; f_2 is the sampled renormalization.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if mode == "ply-disk":
        if not isinstance(seq := seed, RationalSeq):
            raise ModeMismatch("ply-disk mode needs a RationalSeq seed")
        word = kappa_type(seq, depth)[0] if kappa is None else _kappa_word(kappa, depth)
        return _run_ply(seq, word, depth, r)
    if isinstance(seed, RationalSeq):
        raise ModeMismatch(f"{mode} mode needs a rotation-number seed")
    if isinstance(seed, str):
        seed = parse_seed(seed)
    word = _kappa_word(kappa, depth)
    if mode == "exact":
        return _run_exact(seed, word, depth, r)
    if mode == "analytic":
        return _run_analytic(seed, word, depth, r)
    raise ModeMismatch(f"unknown mode {mode!r}")


def lambda_membership(alpha, kappa=None, n: int = 1, r: float = 0.1, mode: str = "exact") -> bool:
    """True iff alpha_1, ..., alpha_n all lie in A(r)."""
    st = tower_run(alpha, kappa, n, mode, r)
    return len(st.levels) == n and all(lv.in_sector for lv in st.levels)


# --- Cantor components on the real slice --------------------------------

@dataclass(frozen=True)
class CantorLevel:
    depth: int
    lo: Fraction
    hi: Fraction

    @property
    def diameter(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> dict:
        return {"depth": self.depth, "lo": float(self.lo), "hi": float(self.hi),
                "diameter": float(self.diameter)}


def _prefix_ints(seed, d: int) -> list:
    ints, x = [], seed
    for _ in range(d - 1):
        if x == 0:
            break
        y = -1 / x if not isinstance(x, QuadSurd) else -x.reciprocal()
        k = y.closest_integer() if isinstance(y, QuadSurd) else closest_integer(y)
        ints.append(k)
        x = y - k
    return ints


def _member(x: Fraction, d: int, r: Fraction, ints: list) -> bool:
    """alpha_1..alpha_d in A(r) along the seed's branch of G."""
    for j in range(d):
        if x == 0 or abs(x) > r:
            return False
        if j == d - 1:
            return True
        y = -1 / x
        k = closest_integer(y)
        if k != ints[j]:
            return False
        x = y - k
    return True


def _bisect(inside: Fraction, outside: Fraction, pred, bits: int) -> Fraction:
    for _ in range(bits):
        mid = (inside + outside) / 2
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def cantor_bisect(kappa=None, n: int = 4, r: float = 0.15, seed=ALPHA_STAR,
                  mu_proxy: float = 0.1, bits: int = 96) -> list:
    """Depth-d components (d = 1..n) of {alpha real : alpha_1..alpha_d in A(r)}
    containing the seed, by bisection with exact G-iteration.

    On a branch of G^j the set is an interval, so bisection between a member
    and a non-member finds its endpoints; returned endpoints are members.
    """
    word = _kappa_word(kappa, n)
    if "b" in word:
        raise ModeMismatch("cantor_bisect needs an all-t type sequence")
    if isinstance(seed, str):
        seed = parse_seed(seed)
    if not _is_exact(seed):
        raise ModeMismatch("cantor_bisect needs an exact real seed")
    rr = Fraction(str(r))
    if not lambda_membership(seed, None, n, r):
        raise SeedNotMember(f"seed leaves A({r}) before depth {n}")
    ints = _prefix_ints(seed, n)
    inner = seed.approx() if isinstance(seed, QuadSurd) else Fraction(seed)
    out = []
    for d in range(1, n + 1):
        pred = lambda x, d=d: _member(x, d, rr, ints)
        if not pred(inner):
            raise SeedNotMember(f"no rational member near the seed at depth {d}")
        lo = _bisect(inner, -rr - 1, pred, bits)
        hi = _bisect(inner, rr + 1, pred, bits)
        lv = CantorLevel(d, lo, hi)
        if not lv.contains(seed):
            raise SeedNotMember(f"depth {d} component misses the seed")
        if out:
            prev = out[-1]
            if not (prev.lo <= lo and hi <= prev.hi and lv.diameter < prev.diameter):
                raise DecayViolation(f"depth {d} component is not strictly nested")
            ratio = lv.diameter / prev.diameter
            if ratio > Fraction(str(mu_proxy)):
                raise DecayViolation(f"diameter ratio {float(ratio):.4f} > {mu_proxy} at depth {d}")
        out.append(lv)
    return out


# --- growth-class inclusion pipeline ------------------------------------

def _index_samples(n_mod: int = 8, n_arg: int = 5, lo: float = 0.01, hi: float = 0.15) -> np.ndarray:
    mods = np.geomspace(lo, hi, n_mod)
    args = np.linspace(-math.pi / 4, math.pi / 4, n_arg)
    a = (mods[:, None] * np.exp(1j * args[None, :])).ravel()
    return np.concatenate([a, -a])


@dataclass(frozen=True)
class IndexBound:
    B1: float
    B1_doubled: float
    max_index: float
    radius: float
    n: int

    @property
    def stable(self) -> bool:
        return abs(self.B1_doubled - self.B1) <= 0.1 * self.B1

    def to_json(self) -> dict:
        return {"B1": self.B1, "B1_doubled": self.B1_doubled, "stable": self.stable,
                "max_index": self.max_index, "radius": self.radius, "n": self.n}


def _b1(alphas, radius, n):
    bound, idx = 0.0, 0.0
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    circle = radius * np.exp(1j * th)
    for a in alphas:
        m = MapSpec.quadratic(a)
        delta = float(np.abs(circle - m.value(circle)).min())
        bound = max(bound, radius / delta)
        val = contour_integral_circle(lambda z: 1 / (z - m.value(z)), 0j, radius, n)
        idx = max(idx, abs(val))
    return bound, idx


def empirical_b1(radius: float | None = None, n: int = 512, alphas=None) -> IndexBound:
    """Bound on the index integral over |z| = radius for Q_alpha, |alpha| in
    [0.01, 0.15]: the supremum of length/(2 pi min|z - Q(z)|) over samples,
    repeated with twice the contour points.  The measured index itself
    (which vanishes for polynomials) is reported alongside.

    The default radius is twice the largest |sigma| over the samples, so the
    contour encloses both fixed points with room to spare."""
    alphas = _index_samples() if alphas is None else alphas
    if radius is None:
        radius = 2 * max(abs(sigma_of(MapSpec.quadratic(a))) for a in alphas)
    b, idx = _b1(alphas, radius, n)
    b2, idx2 = _b1(alphas, radius, 2 * n)
    return IndexBound(b, b2, max(idx, idx2), radius, n)


def beta_gate(beta: np.ndarray, B1: float, r3: float, r5: float, n_rad: int = 8, n_theta: int = 32):
    """Check "beta in A(r5) implies alpha in A(r3)" for the alphas allowed by
    the index relation 1/(1-e(alpha)) + 1/(1-e(beta)) = I, |I| <= B1, under
    the hypothesis |f'(0)| >= 1 (Im alpha <= 0).

    The disk |I| <= B1 is sampled on a polar grid.  Returns (ok, number of
    betas the hypothesis applied to, witness)."""
    rad = B1 * np.arange(n_rad + 1) / n_rad
    ang = np.exp(2j * math.pi * np.arange(n_theta) / n_theta)
    I = np.concatenate([[0], (rad[1:, None] * ang[None, :]).ravel()])
    applied = 0
    for b in np.atleast_1d(beta):
        if not in_sector(b, r5):
            continue
        applied += 1
        u = I - 1 / (1 - cmath.exp(TWO_PI_I * b))
        for ui in u:
            if abs(ui) < 1e-300:
                return False, applied, {"beta": [b.real, b.imag], "alpha": None}
            a = log_rotation(1 - 1 / ui)
            if a.imag > 0:
                continue
            if not in_sector(a, r3):
                return False, applied, {"beta": [b.real, b.imag], "alpha": [a.real, a.imag]}
    return True, applied, None


@dataclass(frozen=True)
class QGInclusionReport:
    ok: bool
    rejected: bool
    reason: str
    r: float
    blocks: tuple
    index_bound: IndexBound | None

    def to_json(self) -> dict:
        return {"ok": self.ok, "rejected": self.rejected, "reason": self.reason, "r": self.r,
                "blocks": list(self.blocks),
                "index_bound": self.index_bound.to_json() if self.index_bound else None}


def qg_inclusion_check(seq: RationalSeq, N: int = 20, depth_k: int | None = None,
                       r3_proxy: float = 0.1, r5_proxy: float = 0.05,
                       n_boundary: int = 64, n_interior: int = 16,
                       index_radius: float | None = None) -> QGInclusionReport:
    """Numerical run of the inclusion argument, block by block.

    Each block's disk is sampled and checked for the growth proposition with
    r = min(r3, r5), then the beta-to-alpha sector gate is applied to the same
    samples with the empirical B1."""
    r = min(r3_proxy, r5_proxy)
    qg = qg_check(seq, N)
    if not qg:
        return QGInclusionReport(False, True, qg.reason, r, (), None)
    depth_k = len(seq) if depth_k is None else depth_k
    if not 1 <= depth_k <= len(seq):
        raise ValueError(f"depth_k must lie in 1..{len(seq)}")
    bound = empirical_b1(index_radius)
    blocks = []
    for k in range(1, depth_k + 1):
        rep = qg_disk_check(seq, k, r, samples=n_boundary, interior=n_interior, raise_on_fail=False)
        disk = ply_block_disk(seq, k)
        gate_ok, applied, gate_w = beta_gate(disk.samples(n_boundary, n_interior), bound.B1,
                                             r3_proxy, r5_proxy)
        blocks.append({"block": k, "ok": bool(rep.ok and gate_ok), "disk": rep.to_json(),
                       "gate_ok": gate_ok, "gate_applied": applied, "gate_witness": gate_w})
    ok = all(b["ok"] for b in blocks) and bound.stable
    return QGInclusionReport(ok, False, "" if ok else "see blocks", r, tuple(blocks), bound)
