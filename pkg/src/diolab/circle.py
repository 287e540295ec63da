"""The three-distance partition P^(k) of the circle by {alpha, ..., q_k alpha}.

Interval I_n (1 <= n <= q_k) is the arc that starts at n*alpha and runs in
direction s_k = (-1)^(k-1) to its partner |n + q_{k-1}|_{q_k} * alpha.  Its
length is D_{k-1} (type 1) or D_{k-1} + D_k (type 2), where
D_j = |q_j alpha - p_j|.  A partition is stored lazily: q_k may be far
beyond anything that can be listed, but every interval is available on
demand and the type counts are exact integers.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

from .cf import RealNumberSpec, a_of, alpha_enclosure, expand_cf, p_of, q_of
from .errors import Ambiguous, EndpointHit, InvariantError, NotInLevel, PreconditionError
from .interval import RatInterval, as_fraction
from .orbit import arc_test, residue_frame, sorted_orbit

MATERIALIZE_CAP = 2_000_000


@dataclass(frozen=True)
class CirclePoint:
    """The exact point m*alpha + r on R/Z (r rational); plain rationals have m = 0."""

    m: int = 0
    r: Fraction = Fraction(0)

    def enclosure(self, alpha_iv: RatInterval) -> RatInterval:
        return alpha_iv * self.m + self.r


PointLike = Union[CirclePoint, Fraction, int, str]


def as_point(x: PointLike) -> CirclePoint:
    if isinstance(x, CirclePoint):
        return x
    return CirclePoint(0, as_fraction(x))


def wrap(n: int, q: int) -> int:
    """|n|_q: the representative of n mod q in [1, q]."""
    return (n - 1) % q + 1


def direction(k: int) -> int:
    """Sign of q_{k-1} alpha - p_{k-1}, i.e. the direction in which P^(k) arcs run."""
    return 1 if (k - 1) % 2 == 0 else -1


@dataclass(frozen=True)
class PartitionInterval:
    level: int
    n: int
    partner: int
    type_tag: int
    length: RatInterval
    direction: int
    endpoints: tuple = ()


class CirclePartition:
    """P^(k) for an irrational alpha, k >= 0."""

    def __init__(self, alpha: RealNumberSpec, k: int, width_budget: Fraction | None = None):
        if alpha.is_rational:
            raise PreconditionError("the three-distance partition needs an irrational alpha")
        if k < 0:
            raise PreconditionError("level must be >= 0")
        self.alpha = alpha
        self.k = k
        self.conv = expand_cf(alpha, k + 2)
        self.qk = q_of(alpha, k)
        self.qkm1 = q_of(alpha, k - 1)
        self.direction = direction(k)
        if width_budget is None:
            width_budget = Fraction(1, 2 ** 40 * q_of(alpha, k + 1) ** 2)
        self.width_budget = Fraction(width_budget)
        A = alpha_enclosure(alpha, self.width_budget / (self.qk + 1))
        self.alpha_iv = A
        self.short = _gap(A, alpha, k - 1)
        self.next_gap = _gap(A, alpha, k)
        self.long = self.short + self.next_gap
        self._order = None

    def __len__(self) -> int:
        return self.qk

    def __repr__(self) -> str:
        return f"CirclePartition(alpha={self.alpha.label}, k={self.k}, q_k={self.qk})"

    def partner(self, n: int) -> int:
        return wrap(n + self.qkm1, self.qk)

    def type_of(self, n: int) -> int:
        self._check_index(n)
        # the displacement partner - n is q_{k-1} (type 1) or q_{k-1} - q_k (type 2);
        # this also settles the boundary index n = q_k - q_{k-1}
        return 1 if self.partner(n) - n == self.qkm1 else 2

    def length(self, n: int) -> RatInterval:
        return self.short if self.type_of(n) == 1 else self.long

    def type_counts(self) -> dict[int, int]:
        n1 = self.qk - self.qkm1
        if self.qkm1 == 0:  # k = 0: the single arc of length 1
            return {1: 1, 2: 0}
        return {1: n1, 2: self.qk - n1}

    def interval(self, n: int) -> PartitionInterval:
        t = self.type_of(n)
        L = self.short if t == 1 else self.long
        m = self.partner(n)
        ends = (_frac_enclosure(self.alpha, n, self.width_budget), _frac_enclosure(self.alpha, m, self.width_budget))
        return PartitionInterval(self.k, n, m, t, L, self.direction, ends)

    def check_lengths(self) -> None:
        """Both length enclosures lie in (1/(2 q_k), 2/q_k) and the lengths tile the circle."""
        lo, hi = Fraction(1, 2 * self.qk), Fraction(2, self.qk)
        for L in (self.short, self.long):
            if not (L.lo > lo and L.hi < hi) and not (self.qk == 1 and L.lo > lo):
                raise InvariantError(f"level {self.k}: length {L} outside (1/(2q_k), 2/q_k)")
        tc = self.type_counts()
        total = self.short * tc[1] + self.long * tc[2]
        if 1 not in total:
            raise InvariantError(f"level {self.k}: lengths sum to {total}, not 1")

    def to_records(self, limit: int | None = None) -> Iterator[dict]:
        N = self.qk if limit is None else min(limit, self.qk)
        for n in range(1, N + 1):
            t = self.type_of(n)
            L = self.short if t == 1 else self.long
            lo, hi = L.as_strings()
            yield {"level": self.k, "n": n, "partner": self.partner(n), "type": t, "len_lo": lo, "len_hi": hi}

    def __iter__(self) -> Iterator[PartitionInterval]:
        for n in range(1, self.qk + 1):
            yield self.interval(n)

    def _check_index(self, n: int) -> None:
        if not 1 <= n <= self.qk:
            raise PreconditionError(f"interval index {n} outside [1, {self.qk}]")

    # geometry ---------------------------------------------------------
    def contains(self, n: int, x: PointLike, max_rounds: int = 12) -> bool:
        """Whether x lies in the open arc I_n (certified)."""
        x = as_point(x)
        self._check_index(n)
        if x.r.denominator == 1 and x.m in (n, self.partner(n)):
            raise EndpointHit(f"x is an endpoint of I_{n}")
        w = self.width_budget
        for _ in range(max_rounds):
            A = alpha_enclosure(self.alpha, w / (abs(x.m - n) + self.qk + 1))
            d = (A * (x.m - n) + x.r) * self.direction
            d = d - math.floor(d.lo)
            L = _gap(A, self.alpha, self.k - 1)
            if self.type_of(n) == 2:
                L = L + _gap(A, self.alpha, self.k)
            if d.hi < 1:
                if d.lo > 0 and d.hi < L.lo:
                    return True
                if d.lo > L.hi:
                    return False
            w /= 2 ** 32
        raise Ambiguous(f"cannot decide whether x lies in I_{n}")

    def materialize(self, cap: int = MATERIALIZE_CAP) -> list[int]:
        """Indices in counter-clockwise order, with each arc verified against its partner."""
        if self._order is None:
            if self.qk > cap:
                raise PreconditionError(f"q_k = {self.qk} exceeds the materialisation cap {cap}")
            order, rs, fr = sorted_orbit(self.alpha, self.qk)
            N = len(order)
            for i in range(N):
                u, v = order[i], order[(i + 1) % N]
                n, other = (u, v) if self.direction == 1 else (v, u)
                if N > 1 and self.partner(n) != other:
                    raise InvariantError(f"level {self.k}: arc ({u}, {v}) does not match the partner rule")
                gap = (int(rs[(i + 1) % N]) - int(rs[i])) % fr.D if N > 1 else fr.D
                enc = RatInterval(Fraction(gap - 2, fr.D), Fraction(gap + 2, fr.D))
                L = self.length(n)
                if not enc.overlaps(L):
                    raise InvariantError(f"level {self.k}: measured gap of I_{n} disagrees with its type length")
            self._order = (order, rs, fr)
        return self._order[0]

    def locate(self, x: PointLike) -> int:
        """Index n with x in I_n.

        Materialised levels use a binary search over the sorted endpoints;
        larger levels use :func:`locate_descent`.
        """
        x = as_point(x)
        if self.qk > MATERIALIZE_CAP:
            return locate_descent(self.alpha, x, self.k)
        order = self.materialize()
        _, rs, fr = self._order
        if x.m != 0:
            return locate_descent(self.alpha, x, self.k)
        xv = x.r % 1
        pos = xv * fr.D
        i = bisect.bisect_right(rs.tolist(), math.floor(pos))
        N = len(order)
        lo_r = int(rs[i - 1]) if i > 0 else int(rs[-1]) - fr.D
        hi_r = int(rs[i]) if i < N else int(rs[0]) + fr.D
        if not (lo_r + 1 <= pos <= hi_r - 1):
            return locate_descent(self.alpha, x, self.k)
        u, v = order[(i - 1) % N], order[i % N]
        return u if self.direction == 1 else v


def _frac_enclosure(alpha: RealNumberSpec, n: int, width: Fraction) -> RatInterval:
    """Enclosure of frac(n alpha) that does not straddle 0."""
    w = width
    for _ in range(16):
        e = alpha_enclosure(alpha, w / (n + 1)) * n
        f = math.floor(e.lo)
        if e.hi < f + 1:
            return e - f
        w /= 2 ** 32
    raise Ambiguous(f"cannot separate frac({n} alpha) from 0")


def _gap(A: RatInterval, alpha: RealNumberSpec, j: int) -> RatInterval:
    """Enclosure of D_j from an enclosure A of alpha."""
    if j == -1:
        return RatInterval.point(1)
    return abs(A * q_of(alpha, j) - p_of(alpha, j))


def build_partition(alpha: RealNumberSpec, k: int, width_budget=None) -> CirclePartition:
    if k < 1:
        raise PreconditionError("build_partition needs k >= 1")
    return CirclePartition(alpha, k, width_budget)


def locate_descent(alpha: RealNumberSpec, x: PointLike, k: int, trace: list | None = None) -> int:
    """Index of the P^(k) interval containing x, by descending from P^(0).

    Inside I_n^(j) the points of level j+1 sit at arc coordinates
    D_{j-1} - c D_j, c = c_min..a_{j+1}-1, and the child containing x is
    I_{n + q_{j-1} + c q_j}^(j+1) for the c with t_{c+1} < d < t_c.
    """
    x = as_point(x)
    if alpha.is_rational:
        raise PreconditionError("locate needs an irrational alpha")
    n = 1
    for j in range(0, k):
        n = _child(alpha, x, j, n)
        if trace is not None:
            trace.append((j + 1, n))
    return n


def _child(alpha: RealNumberSpec, x: CirclePoint, j: int, n: int) -> int:
    qj, qjm1 = q_of(alpha, j), q_of(alpha, j - 1)
    a = a_of(alpha, j + 1)
    s = direction(j)
    type1 = wrap(n + qjm1, qj) - n == qjm1
    c_min = 1 if type1 else 0
    w = Fraction(1, 2 ** 64 * q_of(alpha, j + 2) ** 2)
    for _ in range(16):
        A = alpha_enclosure(alpha, w / (abs(x.m - n) + qj + 1))
        Dm1 = _gap(A, alpha, j - 1)
        Dj = _gap(A, alpha, j)
        L = Dm1 if type1 else Dm1 + Dj
        d = (A * (x.m - n) + x.r) * s
        d = d - math.floor(d.lo)
        if d.hi < 1 and d.lo > 0 and d.hi < L.lo:
            ratio = (Dm1 - d) / Dj
            c_lo = math.ceil(ratio.lo) - 1
            c_hi = math.ceil(ratio.hi) - 1
            if c_lo == c_hi or (ratio.lo > a - 1 and c_lo >= a - 1):
                c = min(max(c_lo, c_min - 1), a - 1)
                # exact tie d = t_c means x is the orbit point n + q_{j-1} + c q_j
                if x.r.denominator == 1 and c_lo != c_hi <= a - 1 and x.m == n + qjm1 + c_hi * qj:
                    raise EndpointHit("x is an orbit point")
                return n + qjm1 + c * qj
        elif x.r.denominator == 1 and x.m in (n, wrap(n + qjm1, qj)):
            raise EndpointHit("x is an endpoint")
        w /= 2 ** 48
    raise Ambiguous(f"cannot place x among the level-{j + 1} points")


def orbit_membership(alpha: RealNumberSpec, k: int, m: int) -> tuple[int, int]:
    """(n, c) with m = n + q_{k-1} + c q_k, so m*alpha lies in I_n^(k) (for q_k < m <= q_{k+1})."""
    qk, qkm1, qk1 = q_of(alpha, k), q_of(alpha, k - 1), q_of(alpha, k + 1)
    if not qk < m <= qk1:
        raise NotInLevel(f"m = {m} outside (q_k, q_(k+1)] = ({qk}, {qk1}]")
    n = wrap(m - qkm1, qk)
    c = (m - qkm1 - n) // qk
    if not 0 <= c <= a_of(alpha, k + 1) - 1:
        raise InvariantError(f"membership coefficient c = {c} out of range")
    return n, c


def orbit_count(alpha: RealNumberSpec, k: int, n: int, Q: int) -> int:
    """Exact number of m with q_k < m <= Q and m*alpha in I_n^(k)."""
    P = CirclePartition(alpha, k)
    P._check_index(n)
    ms = np.arange(P.qk + 1, Q + 1, dtype=np.int64)
    if ms.size == 0:
        return 0
    L = P.length(n)
    flags = arc_test(alpha, n, P.direction, L, ms)
    count = int(np.sum(flags == 1))
    for m in ms[flags == -1]:
        count += P.contains(n, CirclePoint(int(m)))
    return count


def orbit_count_lower(alpha: RealNumberSpec, k: int, n: int, Q: int) -> int:
    """Count of orbit points in I_n^(k) from (q_k, Q]; asserts the Q/(4 q_k) lower bound."""
    qk = q_of(alpha, k)
    if Q < 6 * qk:
        raise PreconditionError(f"Q = {Q} must be >= 6 q_k = {6 * qk}")
    count = orbit_count(alpha, k, n, Q)
    if not 4 * qk * count >= Q:
        raise InvariantError(f"count {count} < Q/(4 q_k) for k={k}, n={n}, Q={Q}")
    return count


# piecewise-constant functions of interval indices --------------------------

Pieces = list  # list of (start, end_inclusive, value), contiguous, covering [1, N]


def constant_pieces(N: int, value: int = 1) -> Pieces:
    return [(1, N, value)]


def pushdown(alpha: RealNumberSpec, pieces: Pieces, k: int) -> Pieces:
    """Sum a function of P^(k+1) indices over children: F(n) = sum f(m), ancestor(m) = n.

    The ancestor of m at level k is |m - q_{k-1}|_{q_k}, so a contiguous run
    of m wraps onto [1, q_k] a whole number of times plus a remainder run.
    """
    qk, qkm1 = q_of(alpha, k), q_of(alpha, k - 1)
    diff: dict[int, int] = {}
    base = 0

    def add(lo, hi, v):
        diff[lo] = diff.get(lo, 0) + v
        diff[hi + 1] = diff.get(hi + 1, 0) - v

    for s, e, v in pieces:
        if v == 0:
            continue
        L = e - s + 1
        full, rem = divmod(L, qk)
        base += full * v
        if rem:
            r0 = wrap(s - qkm1, qk)
            r1 = r0 + rem - 1
            if r1 <= qk:
                add(r0, r1, v)
            else:
                add(r0, qk, v)
                add(1, r1 - qk, v)
    return _from_diff(diff, base, qk)


def _from_diff(diff: dict, base: int, N: int) -> Pieces:
    out: Pieces = []
    cur = base
    pos = 1
    for b in sorted(diff):
        if b > N:
            break
        if b > pos:
            out.append((pos, b - 1, cur))
            pos = b
        cur += diff[b]
    if pos <= N:
        out.append((pos, N, cur))
    return _merge(out)


def _merge(pieces: Pieces) -> Pieces:
    out: Pieces = []
    for s, e, v in pieces:
        if out and out[-1][2] == v and out[-1][1] + 1 == s:
            out[-1] = (out[-1][0], e, v)
        else:
            out.append((s, e, v))
    return out


def mask_pieces(pieces: Pieces, lo: int, hi: int) -> Pieces:
    """Zero the function on the index range [lo, hi]."""
    out: Pieces = []
    for s, e, v in pieces:
        if e < lo or s > hi:
            out.append((s, e, v))
            continue
        if s < lo:
            out.append((s, lo - 1, v))
        out.append((max(s, lo), min(e, hi), 0))
        if e > hi:
            out.append((hi + 1, e, v))
    return _merge(out)


def pieces_total(pieces: Pieces) -> int:
    return sum((e - s + 1) * v for s, e, v in pieces)


def pieces_value(pieces: Pieces, n: int) -> int:
    for s, e, v in pieces:
        if s <= n <= e:
            return v
    raise KeyError(n)


def child_counts(alpha: RealNumberSpec, k: int) -> Pieces:
    """Number of P^(k+1) intervals inside each I_n^(k), for every n at once."""
    return pushdown(alpha, constant_pieces(q_of(alpha, k + 1)), k)


def descendant_counts(alpha: RealNumberSpec, k: int, k2: int) -> Pieces:
    """Number of P^(k2) intervals inside each I_n^(k)."""
    pieces = constant_pieces(q_of(alpha, k2))
    for j in range(k2 - 1, k - 1, -1):
        pieces = pushdown(alpha, pieces, j)
    return pieces


def geometric_children(alpha: RealNumberSpec, k: int, cap: int = MATERIALIZE_CAP) -> tuple[dict, dict]:
    """Exhaustive geometric view of the refinement P^(k) -> P^(k+1).

    Walks the sorted orbit {alpha, ..., q_{k+1} alpha}: the level-k points cut
    it into the arcs I_n^(k); returns ({n: child count}, {m: n}) for every
    new point m in (q_k, q_{k+1}].
    """
    qk, qk1 = q_of(alpha, k), q_of(alpha, k + 1)
    if qk1 > cap:
        raise PreconditionError(f"q_(k+1) = {qk1} exceeds cap {cap}")
    P = CirclePartition(alpha, k)
    order, _, _ = sorted_orbit(alpha, qk1)
    N = len(order)
    first = next(i for i, j in enumerate(order) if j <= qk)
    children: dict[int, int] = {}
    where: dict[int, int] = {}
    i = first
    while True:
        u = order[i]
        inner = []
        t = (i + 1) % N
        while order[t] > qk:
            inner.append(order[t])
            t = (t + 1) % N
        v = order[t]
        n = u if P.direction == 1 else v
        if qk > 1 and P.partner(n) != (v if P.direction == 1 else u):
            raise InvariantError(f"level {k}: arc ({u}, {v}) is not an interval of the partition")
        children[n] = len(inner) + 1
        for m in inner:
            where[m] = n
        i = t
        if i == first:
            break
    return children, where


def dump_jsonl(P: CirclePartition, fh, limit: int | None = None) -> int:
    import json

    count = 0
    for rec in P.to_records(limit):
        fh.write(json.dumps(rec) + "\n")
        count += 1
    return count


@dataclass
class RefinementReport:
    level: int
    a_next: int
    q_k: int
    q_next: int
    child_counts: dict  # child count -> number of parents
    max_children: int
    ratio_ok: bool
    geometric: bool

    @property
    def ok(self) -> bool:
        return set(self.child_counts) <= {self.a_next, self.a_next + 1} and self.ratio_ok


def check_refinement(alpha: RealNumberSpec, k: int, cap: int = MATERIALIZE_CAP) -> RefinementReport:
    """Child counts of every P^(k) interval in P^(k+1), over all n.

    The counts come from the ancestor map and are exact for every q_k.  When
    q_{k+1} is small enough the sorted orbit is also walked and must agree
    interval by interval.
    """
    qk, qk1, a = q_of(alpha, k), q_of(alpha, k + 1), a_of(alpha, k + 1)
    pieces = child_counts(alpha, k)
    hist: dict[int, int] = {}
    for s, e, v in pieces:
        hist[v] = hist.get(v, 0) + e - s + 1
    geometric = False
    if qk1 <= cap:
        children, where = geometric_children(alpha, k, cap)
        if len(children) != qk:
            raise InvariantError(f"level {k}: walked {len(children)} intervals, expected {qk}")
        for n, c in children.items():
            if pieces_value(pieces, n) != c:
                raise InvariantError(f"level {k}: interval {n} has {c} children, ancestor map says otherwise")
        for m, n in where.items():
            if orbit_membership(alpha, k, m)[0] != n:
                raise InvariantError(f"level {k}: orbit point {m} placed in {n}")
        geometric = True
    mx = max(hist)
    return RefinementReport(k, a, qk, qk1, dict(sorted(hist.items())), mx, mx * qk < 4 * qk1, geometric)
