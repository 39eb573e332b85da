"""Signed (closest-integer) continued fractions, block sequences, the
quadratic growth class and the type map kappa."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .numerics_core import closest_integer

HALF = Fraction(1, 2)


class MCFError(Exception):
    pass


class OutOfRange(MCFError):
    pass


class InvalidCF(MCFError):
    pass


class RecursionMismatch(MCFError):
    pass


class DepthExceedsPrefix(MCFError):
    pass


@dataclass(frozen=True)
class SignedPair:
    b: int
    eps: int

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise InvalidCF(f"entry b must be an integer >= 2, got {self.b}")
        if self.eps not in (1, -1):
            raise InvalidCF(f"sign must be +1 or -1, got {self.eps}")


@dataclass(frozen=True)
class SignedCF:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(p if isinstance(p, SignedPair) else SignedPair(int(p[0]), int(p[1]))
                      for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise InvalidCF("empty continued fraction")
        # every tail must itself be an expansion: after b_j = 2 a negative
        # eps_{j+1} pushes the tail out of [-1/2, 1/2] (for eps_1 = +1 this is
        # eps_1 eps_2 = +1), and a final (2,-) is a tail equal to -1/2, which
        # the ties-towards-zero rounding assigns to the neighbouring entry
        for j in range(len(pairs) - 1):
            if pairs[j].b == 2 and pairs[j + 1].eps != 1:
                raise InvalidCF(f"b_{j + 1} = 2 requires eps_{j + 2} = +1")
        if len(pairs) >= 2 and (pairs[-1].b, pairs[-1].eps) == (2, -1):
            raise InvalidCF("a final pair (2,-) after the first is not an expansion")

    @classmethod
    def of(cls, pairs: Iterable) -> "SignedCF":
        return cls(tuple(pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SignedCF(self.pairs[i])
        return self.pairs[i]

    @property
    def bs(self) -> list:
        return [p.b for p in self.pairs]

    @property
    def epss(self) -> list:
        return [p.eps for p in self.pairs]

    def tail(self) -> "SignedCF":
        """The expansion with the first pair removed."""
        return SignedCF(self.pairs[1:])

    def to_json(self) -> list:
        return [[p.b, p.eps] for p in self.pairs]

    @classmethod
    def from_json(cls, data) -> "SignedCF":
        return cls(tuple(SignedPair(int(b), int(e)) for b, e in data))

    def compact(self) -> str:
        return "".join(f"({p.b},{'+' if p.eps > 0 else '-'})" for p in self.pairs)


_COMPACT_RE = re.compile(r"\(\s*(\d+)\s*,\s*([+-])\s*1?\s*\)")


def random_cf(rng, max_len: int = 6, max_b: int = 50) -> SignedCF:
    """A random valid SignedCF: length uniform in 1..max_len, entries uniform
    in 2..max_b, signs uniform where the validity rules leave a choice."""
    n = int(rng.integers(1, max_len + 1))
    pairs = []
    for j in range(n):
        b = int(rng.integers(2, max_b + 1))
        forced = j > 0 and (pairs[-1][0] == 2 or (b == 2 and j == n - 1))
        pairs.append((b, 1 if forced else int(rng.choice([-1, 1]))))
    return SignedCF(tuple(pairs))


def parse_cf(text: str) -> SignedCF:
    """Parse the compact syntax "(3,+)(2,-)(2,+)"."""
    text = text.strip()
    pairs = []
    pos = 0
    for m in _COMPACT_RE.finditer(text):
        if text[pos:m.start()].strip():
            raise InvalidCF(f"cannot parse {text!r}")
        pairs.append(SignedPair(int(m.group(1)), 1 if m.group(2) == "+" else -1))
        pos = m.end()
    if text[pos:].strip() or not pairs:
        raise InvalidCF(f"cannot parse {text!r}")
    return SignedCF(tuple(pairs))


def expand(x) -> SignedCF:
    """Signed continued fraction of a rational x in [-1/2, 1/2] minus 0.

    The orbit x_{i+1} = -1/x_i - [-1/x_i] is run in exact arithmetic; the
    primed signs eps'_i = sign(-1/x_i ... ) are converted to the stored
    signs eps_1 = eps'_1, eps_i = -eps'_{i-1} eps'_i.
    """
    x = Fraction(x)
    if x == 0 or abs(x) > HALF:
        raise OutOfRange(f"{x} not in [-1/2, 1/2] minus 0")
    pairs = []
    prev = None
    while x != 0:
        y = -1 / x
        k = closest_integer(y)
        # x = 1/(eps' b - x_next) with eps' b = -k
        b = abs(k)
        ep = 1 if -k > 0 else -1
        eps = ep if prev is None else -prev * ep
        pairs.append(SignedPair(b, eps))
        prev = ep
        x = y - k
    return SignedCF(tuple(pairs))


def evaluate(cf: SignedCF) -> Fraction:
    """Exact value of eps_1/(b_1 + eps_2/(b_2 + ... + eps_n/b_n))."""
    val = Fraction(0)
    for p in reversed(cf.pairs):
        den = p.b + val
        if den == 0:
            raise ZeroDivisionError("vanishing intermediate denominator")
        val = Fraction(p.eps) / den
    return val


def g_orbit_values(cf: SignedCF) -> list:
    """Values of the successive tails [<b_j : eps_j>]_{j=k..n}, k = 1..n."""
    return [evaluate(cf[k:]) for k in range(len(cf))]


@dataclass(frozen=True)
class Convergents:
    p: tuple
    q: tuple
    product_ok: bool

    def __iter__(self):
        return iter(zip(self.p, self.q))


def convergents(cf: SignedCF, check: bool = True) -> Convergents:
    """Numerators and denominators (p_l, q_l), l = 0..n.

    Uses q_{l+1} = b_{l+1} q_l + eps_{l+1} q_{l-1} (same for p) with
    p_{-1} = q_0 = 1, p_0 = q_{-1} = 0.  With ``check`` also verifies
    p_n/q_n against evaluate and the identity 1/q_n = |prod of tails|.
    """
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    ps, qs = [p], [q]
    for pair in cf.pairs:
        p_prev, p = p, pair.b * p + pair.eps * p_prev
        q_prev, q = q, pair.b * q + pair.eps * q_prev
        ps.append(p)
        qs.append(q)
    product_ok = True
    if check:
        val = evaluate(cf)
        if Fraction(p, q) != val:
            raise RecursionMismatch(f"recursion gives {p}/{q}, evaluate gives {val}")
        prod = Fraction(1)
        for v in g_orbit_values(cf):
            prod *= v
        product_ok = abs(prod) == Fraction(1, abs(q))
        if not product_ok:
            raise RecursionMismatch(f"product identity fails: |prod| = {abs(prod)}, q = {q}")
    return Convergents(tuple(ps), tuple(qs), product_ok)


def denominator(cf: SignedCF) -> int:
    return abs(convergents(cf, check=False).q[-1])


@dataclass(frozen=True)
class RationalSeq:
    blocks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, SignedCF) else SignedCF(tuple(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    @property
    def ms(self) -> list:
        return [len(b) for b in self.blocks]

    def q(self, i: int) -> int:
        """Denominator q_{i, m_i} of block i (1-based)."""
        return denominator(self.blocks[i - 1])

    def value(self, i: int) -> Fraction:
        return evaluate(self.blocks[i - 1])

    def to_json(self) -> list:
        return [b.to_json() for b in self.blocks]

    @classmethod
    def from_json(cls, data) -> "RationalSeq":
        return cls(tuple(SignedCF.from_json(b) for b in data))


def parse_seq(text: str) -> RationalSeq:
    """Blocks in compact syntax separated by ';' or '|'."""
    parts = [s for s in re.split(r"[;|]", text) if s.strip()]
    return RationalSeq(tuple(parse_cf(s) for s in parts))


@dataclass(frozen=True)
class QGReport:
    ok: bool
    violation: tuple | None = None  # (i, j), 1-based
    reason: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "violation": list(self.violation) if self.violation else None,
                "reason": self.reason}

    def __bool__(self):
        return self.ok


def qg_check(seq: RationalSeq, N: int) -> QGReport:
    """Quadratic growth condition on a finite prefix of block sequences."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not seq.blocks:
        return QGReport(True)
    for i, block in enumerate(seq.blocks, start=1):
        bs = block.bs
        if i == 1:
            if bs[0] < N:
                return QGReport(False, (1, 1), f"b_1,1 = {bs[0]} < N = {N}")
        else:
            q_prev = seq.q(i - 1)
            if bs[0] < q_prev ** 2:
                return QGReport(False, (i, 1), f"b_{i},1 = {bs[0]} < q_{i-1}^2 = {q_prev ** 2}")
        for j in range(len(bs) - 1):
            if bs[j + 1] < bs[j] ** 2:
                return QGReport(False, (i, j + 2),
                                f"b_{i},{j + 2} = {bs[j + 1]} < b_{i},{j + 1}^2 = {bs[j] ** 2}")
    return QGReport(True)


def sub_levels(ms: Sequence[int]) -> list:
    """l_1 = 0, l_k = m_1 + ... + m_{k-1}; returns l_1..l_{len(ms)+1}."""
    out = [0]
    for m in ms:
        out.append(out[-1] + m)
    return out


def kappa_type(seq, n: int):
    """First n letters of kappa and the sub-level indices l_k.

    ``seq`` may be a RationalSeq or a plain list of block lengths m_i.
    """
    ms = seq.ms if isinstance(seq, RationalSeq) else list(seq)
    total = sum(ms)
    if n > total:
        raise DepthExceedsPrefix(f"depth {n} exceeds prefix length {total}")
    ls = sub_levels(ms)
    starts = {l + 1 for l in ls}
    word = tuple("b" if k in starts else "t" for k in range(1, n + 1))
    return word, ls


def periods_k(seq, n: int) -> int:
    """k_1 = 1, k_j = q_1 ... q_{j-1}.

    ``seq`` may be a RationalSeq or a list of block denominators.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    qs = [seq.q(i) for i in range(1, len(seq) + 1)] if isinstance(seq, RationalSeq) else list(seq)
    if n - 1 > len(qs):
        raise DepthExceedsPrefix(f"k_{n} needs {n - 1} blocks, have {len(qs)}")
    k = 1
    for q in qs[:n - 1]:
        k *= q
    return k


def parse_kappa(text: str) -> tuple:
    """"tbt" or "t,b,t"; a trailing "^N" repeats the word, e.g. "t^50"."""
    text = text.replace(",", "").replace(" ", "")
    m = re.fullmatch(r"([tb]+)(?:\^(\d+))?", text)
    if not m:
        raise ValueError(f"bad type sequence {text!r}")
    word = m.group(1)
    if m.group(2):
        word = word * int(m.group(2))
    return tuple(word)
