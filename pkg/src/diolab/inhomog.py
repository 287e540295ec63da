"""Inhomogeneous approximation: scans of q*||q alpha - x||, the one-sided
target set built from nested partition intervals, and the descent that
rules out one-sided constants above 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .cf import RealNumberSpec, a_of, alpha_enclosure, q_of, shifted_dist
from .circle import CirclePoint, PointLike, _child, _gap, as_point, direction, locate_descent, wrap
from .errors import (Ambiguous, BudgetError, EndpointHit, HypothesisFail, InvariantError,
                     NoAdmissibleIndex, PreconditionError)
from .interval import RatInterval, as_fraction, fmt, sqrt_enclosure

WALK_BUDGET = 200_000


def point_dist(alpha: RealNumberSpec, m: int, x: CirclePoint, width: Fraction) -> RatInterval:
    """||m alpha - x|| for x = x.m * alpha + x.r."""
    return shifted_dist(alpha, m - x.m, x.r, width)


def negate(x: CirclePoint) -> CirclePoint:
    return CirclePoint(-x.m, -x.r)


# ---------------------------------------------------------------------------
# scanning


@dataclass
class LiminfScan:
    alpha: RealNumberSpec
    x: CirclePoint
    q_lo: int
    q_hi: int
    mode: str
    min_value: RatInterval
    argmin: int
    trace: list = field(default_factory=list)
    threshold: Optional[Fraction] = None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "q_lo": self.q_lo,
            "q_hi": self.q_hi,
            "min_lo": fmt(self.min_value.lo),
            "min_hi": fmt(self.min_value.hi),
            "argmin": self.argmin,
            "below_threshold": [{"q": q, "lo": fmt(v.lo), "hi": fmt(v.hi)} for q, v in self.trace],
        }


def _walk(alpha: RealNumberSpec, x: CirclePoint, L: int, width: Fraction) -> Iterator[tuple[int, RatInterval]]:
    """Points m of {alpha, ..., q_L alpha} in order of increasing distance to x.

    The two neighbours of a point n in P^(L) are |n + q_{L-1}|_{q_L} (one
    step in direction s_L) and |n - q_{L-1}|_{q_L}; walking both ways from
    x and merging by distance visits the orbit in distance order.
    """
    qL, qLm1 = q_of(alpha, L), q_of(alpha, L - 1)
    fwd = lambda n: wrap(n + qLm1, qL)
    bwd = lambda n: wrap(n - qLm1, qL)
    seen = set()
    if x.r.denominator == 1 and 1 <= x.m <= qL:
        seen.add(x.m)
        yield x.m, RatInterval.point(0)
        heads = [(fwd(x.m), fwd), (bwd(x.m), bwd)]
    else:
        n = locate_descent(alpha, x, L)
        heads = [(fwd(n), fwd), (n, bwd)]
    dists = [point_dist(alpha, h, x, width / max(h, 1)) for h, _ in heads]
    steps = 0
    while heads:
        i = 0 if len(heads) == 1 or dists[0].hi <= dists[1].lo or dists[0].mid <= dists[1].mid else 1
        m, step = heads[i]
        d = dists[i]
        if m in seen:
            heads.pop(i)
            dists.pop(i)
            continue
        seen.add(m)
        yield m, d
        steps += 1
        if steps > min(qL, WALK_BUDGET):
            if steps > qL:
                return
            raise BudgetError(f"walk at level {L} exceeded {WALK_BUDGET} steps")
        nxt = step(m)
        heads[i] = (nxt, step)
        dists[i] = point_dist(alpha, nxt, x, width / max(nxt, 1))


def _scan_side(alpha, x, q_lo, q_hi, threshold, best, width) -> list:
    """All (q, value) with q_lo <= q <= q_hi found within the current stopping radius.

    The range is cut at the convergent denominators.  A block [lo, hi] is
    scanned as j = q - (lo - 1) in [1, J] against the shifted target
    x - (lo - 1) alpha, walking the smallest level that holds J points.
    """
    found = []
    L = 1
    while True:
        qL = q_of(alpha, L)
        block_lo = 1 if L == 1 else q_of(alpha, L - 1) + 1
        lo, hi = max(block_lo, q_lo), min(qL, q_hi)
        if lo <= hi:
            base, J = lo - 1, hi - lo + 1
            xs = CirclePoint(x.m - base, x.r)
            L2 = 1
            while q_of(alpha, L2) < J:
                L2 += 1
            for j, d in _walk(alpha, xs, L2, width / max(lo, 1)):
                bound = best[0]
                # the threshold widens the radius but never stops a walk before a first hit
                if threshold is not None and bound is not None:
                    bound = max(bound, threshold)
                if bound is not None and d.lo * lo > bound:
                    break
                if j <= J:
                    m = base + j
                    v = d * m
                    found.append((m, v))
                    if best[0] is None or v.hi < best[0]:
                        best[0] = v.hi
        if qL >= q_hi:
            return found
        L += 1


def liminf_scan(alpha: RealNumberSpec, x: PointLike, q_lo: int, q_hi: int, mode: str = "two_sided",
                threshold=None, width=Fraction(1, 2 ** 80)) -> LiminfScan:
    """Exact minimum of |q| * ||q alpha - x|| over q_lo <= |q| <= q_hi.

    Works block by block between consecutive convergent denominators and
    only visits orbit points close enough to x to beat the running minimum,
    so ranges of any size are fine as long as the partial quotients are
    moderate.  Negative q (mode ``two_sided``) are scanned as ||q alpha + x||.
    """
    if mode not in ("two_sided", "positive"):
        raise PreconditionError(f"unknown mode {mode!r}")
    if not 1 <= q_lo <= q_hi:
        raise PreconditionError("need 1 <= q_lo <= q_hi")
    if alpha.is_rational:
        raise PreconditionError("scans need an irrational alpha")
    x = as_point(x)
    thr = None if threshold is None else as_fraction(threshold)
    w = Fraction(width)
    for _ in range(6):
        best = [None]
        cands = [(q, v) for q, v in _scan_side(alpha, x, q_lo, q_hi, thr, best, w)]
        symmetric = x.m == 0 and (2 * x.r).denominator == 1
        if mode == "two_sided" and not symmetric:
            cands += [(-q, v) for q, v in _scan_side(alpha, negate(x), q_lo, q_hi, thr, best, w)]
        top = min(v.hi for _, v in cands)
        tied = [(q, v) for q, v in cands if v.lo <= top]
        if len(tied) == 1 or all(v.is_exact and v.lo == tied[0][1].lo for _, v in tied):
            q0, v0 = min(tied, key=lambda t: (abs(t[0]), -t[0]))
            trace = [] if thr is None else sorted(((q, v) for q, v in cands if v.lo < thr), key=lambda t: abs(t[0]))
            return LiminfScan(alpha, x, q_lo, q_hi, mode, v0, q0, trace, thr)
        w /= 2 ** 64
    raise Ambiguous(f"near-tie between q in {[q for q, _ in tied]}")


@dataclass
class CertifiedOut:
    witness: int
    value: RatInterval


@dataclass
class TentativelyIn:
    """No violation up to the scale Q.  This never proves membership."""

    scale: int
    min_value: RatInterval
    certified: bool = False


def bad_membership(alpha: RealNumberSpec, x: PointLike, eps, K: int, Q: int, mode: str = "two_sided"):
    eps = as_fraction(eps)
    if eps <= 0:
        raise PreconditionError("epsilon must be positive")
    qK = q_of(alpha, K)
    if Q < qK:
        raise PreconditionError(f"Q = {Q} < q_K = {qK}")
    scan = liminf_scan(alpha, x, qK, Q, mode, threshold=eps)
    if scan.trace:
        q, v = scan.trace[0]
        return CertifiedOut(q, v)
    if not scan.min_value.lo >= eps:
        raise Ambiguous("minimum too close to epsilon to decide")
    return TentativelyIn(Q, scan.min_value)


def triangle_bound_holds(alpha: RealNumberSpec, x, y: int, k: int) -> bool:
    """Certified check of ||y x|| <= |y| ||k alpha - x|| + |k| ||y alpha||."""
    x = as_fraction(x)
    lhs = RatInterval.point(y * x).dist_to_int()
    w = Fraction(1, 2 ** 64)
    for _ in range(8):
        rhs = shifted_dist(alpha, k, x, w) * abs(y) + shifted_dist(alpha, y, Fraction(0), w) * abs(k)
        if lhs.hi <= rhs.lo:
            return True
        if lhs.lo > rhs.hi:
            return False
        w /= 2 ** 64
    raise Ambiguous(f"cannot order the two sides for y={y}, k={k}")


# ---------------------------------------------------------------------------
# the one-sided target set


def default_gamma(a: int) -> Fraction:
    """A rational close to 1/log(a + 2)."""
    return Fraction(round(10 ** 9 / math.log(a + 2)), 10 ** 9)


@dataclass
class ChainLink:
    k: int
    n_lo: int
    n_hi: int
    n: int
    b: Optional[int]
    gamma: Fraction
    delta: Fraction


@dataclass
class OneSidedTargetSet:
    alpha: RealNumberSpec
    epsilon: Fraction
    K: int
    generations: list
    gamma_rule: Callable[[int], Fraction] = default_gamma
    x: Optional[Fraction] = None
    x_level: Optional[int] = None

    def link(self, k: int) -> ChainLink:
        return self.generations[k - self.K]

    def eps_k(self, k: int) -> RatInterval:
        """(sqrt(eps) + gamma_k + 2 delta_k)(sqrt(eps) + gamma_{k+1} + 2 delta_{k+1})."""
        r = sqrt_enclosure(self.epsilon)
        f = lambda j: r + self.gamma_rule(a_of(self.alpha, j)) + 2 * Fraction(q_of(self.alpha, j - 1), q_of(self.alpha, j))
        return f(k) * f(k + 1)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha.to_json(),
            "epsilon": fmt(self.epsilon),
            "K": self.K,
            "x": None if self.x is None else fmt(self.x),
            "generations": [
                {"k": g.k, "n_lo": g.n_lo, "n_hi": g.n_hi, "n": g.n, "b": g.b, "gamma": fmt(g.gamma)}
                for g in self.generations
            ],
        }


def _hypothesis(eps: Fraction, gamma: Fraction, delta: Fraction) -> bool:
    # gamma + 2 delta < 1 - 2 sqrt(eps), squared out exactly
    t = 1 - gamma - 2 * delta
    return t > 0 and t * t > 4 * eps


def _in_range(eps: Fraction, gamma: Fraction, qk: int, qkm1: int, n: int) -> bool:
    """sqrt(eps) q_k + q_{k-1} < n < (sqrt(eps) + gamma) q_k + q_{k-1}, exactly."""
    u = n - qkm1
    if u <= 0 or u * u <= eps * qk * qk:
        return False
    t = u - gamma * qk
    return t < 0 or t * t < eps * qk * qk


def admissible_range(alpha: RealNumberSpec, eps: Fraction, gamma: Fraction, k: int) -> tuple[int, int]:
    qk, qkm1 = q_of(alpha, k), q_of(alpha, k - 1)
    fl = math.isqrt(eps.numerator * qk * qk // eps.denominator)
    n_lo = qkm1 + fl + 1
    top = sqrt_enclosure(eps * qk * qk) + gamma * qk + qkm1
    n_hi = math.ceil(top.hi) + 1
    while n_hi >= n_lo and not _in_range(eps, gamma, qk, qkm1, n_hi):
        n_hi -= 1
    if n_hi < n_lo or not _in_range(eps, gamma, qk, qkm1, n_lo):
        raise NoAdmissibleIndex(f"no admissible index at level {k}")
    return n_lo, n_hi


def one_sided_build(alpha: RealNumberSpec, eps, K: int, depth: int,
                    gamma_rule: Callable[[int], Fraction] = default_gamma, x_extra: int = 2) -> OneSidedTargetSet:
    """Nested chain I_{n_K}^(K) > I_{n_{K+1}}^(K+1) > ... of admissible intervals.

    Each step takes the smallest admissible child.  A rational point x deep
    inside the chain (``x_extra`` further levels, when they exist) is
    attached for scanning.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise PreconditionError("epsilon must lie in (0, 1/4)")
    if K < 1 or depth < 0:
        raise PreconditionError("need K >= 1 and depth >= 0")
    if alpha.is_rational:
        raise PreconditionError("alpha must be irrational")

    def gamma(k):
        return Fraction(gamma_rule(a_of(alpha, k)))

    for k in range(K, K + depth + 2):
        d = Fraction(q_of(alpha, k - 1), q_of(alpha, k))
        if not _hypothesis(eps, gamma(k), d):
            raise HypothesisFail(f"gamma_k + 2 delta_k < 1 - 2 sqrt(eps) fails at k = {k}")

    links = []
    lo, hi = admissible_range(alpha, eps, gamma(K), K)
    links.append(ChainLink(K, lo, hi, lo, None, gamma(K), Fraction(q_of(alpha, K - 1), q_of(alpha, K))))
    extra = []
    for k in range(K, K + depth + x_extra):
        try:
            link = _next_link(alpha, eps, gamma, k, (links + extra)[-1].n)
        except (NoAdmissibleIndex, HypothesisFail):
            if k < K + depth:
                raise
            break
        (links if k < K + depth else extra).append(link)
    deepest = (links + extra)[-1]
    x = _inner_point(alpha, deepest.k, deepest.n)
    return OneSidedTargetSet(alpha, eps, K, links, gamma_rule, x, deepest.k)


def _next_link(alpha, eps, gamma, k, n1) -> ChainLink:
    qk, qkm1, a = q_of(alpha, k), q_of(alpha, k - 1), a_of(alpha, k + 1)
    if k >= 2 and not _hypothesis(eps, gamma(k + 1), Fraction(qk, q_of(alpha, k + 1))):
        raise HypothesisFail(f"hypothesis fails at k = {k + 1}")
    lo, hi = admissible_range(alpha, eps, gamma(k + 1), k + 1)
    type1 = wrap(n1 + qkm1, qk) - n1 == qkm1
    b_min = 0 if type1 else -1
    b = max(b_min, -((n1 + qkm1 - lo) // qk))  # ceil((lo - n1 - q_{k-1}) / q_k)
    n2 = n1 + qkm1 + b * qk
    if b > a - 1 or n2 > hi:
        raise NoAdmissibleIndex(f"no admissible child of I_{n1}^({k}) at level {k + 1}")
    return ChainLink(k + 1, lo, hi, n2, b, gamma(k + 1), Fraction(qk, q_of(alpha, k + 1)))


def _inner_point(alpha: RealNumberSpec, k: int, n: int) -> Fraction:
    """A dyadic rational strictly inside I_n^(k), well away from both ends."""
    qk, qkm1 = q_of(alpha, k), q_of(alpha, k - 1)
    w = Fraction(1, 2 ** 64 * q_of(alpha, k + 1) ** 2)
    A = alpha_enclosure(alpha, w / (n + 1))
    L = _gap(A, alpha, k - 1)
    if wrap(n + qkm1, qk) - n != qkm1:
        L = L + _gap(A, alpha, k)
    mid = A * n + L * Fraction(direction(k), 2)
    bits = max(8, 2 * qk.bit_length() + 16)
    x = Fraction(math.floor(mid.mid * 2 ** bits), 2 ** bits) % 1
    if locate_descent(alpha, x, k) != n:
        raise InvariantError("chosen point escaped its interval")
    return x


# ---------------------------------------------------------------------------
# lemma checks


@dataclass
class LemmaReport:
    k: int
    n1: int
    n2: int
    margins_a: list      # RatInterval margins, one per endpoint ball of I_{n1}
    margins_b_inside: list
    margin_b_outside: RatInterval
    containment_margin: RatInterval
    eps_k: RatInterval
    exhaustive_checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _arc_positions(alpha, k, n1, n2, w):
    """Arc coordinates (from n1 alpha, along P^(k) direction) of I_{n2}^(k+1) and its parent."""
    qk, qkm1, a = q_of(alpha, k), q_of(alpha, k - 1), a_of(alpha, k + 1)
    A = alpha_enclosure(alpha, w)
    Dm1, Dk = _gap(A, alpha, k - 1), _gap(A, alpha, k)
    type1 = wrap(n1 + qkm1, qk) - n1 == qkm1
    L = Dm1 if type1 else Dm1 + Dk
    b, rem = divmod(n2 - n1 - qkm1, qk)
    if rem or not (0 if type1 else -1) <= b <= a - 1:
        raise PreconditionError(f"I_{n2}^({k + 1}) is not a child of I_{n1}^({k})")
    t = lambda c: Dm1 - Dk * c
    hi = L if b == (0 if type1 else -1) else t(b)
    lo = RatInterval.point(0) if b == a - 1 else t(b + 1)
    return A, L, lo, hi, type1, t


def check_onesided_lemmas(ots: OneSidedTargetSet, k: int, n1: int | None = None, n2: int | None = None,
                          exhaustive_cap: int = 0) -> LemmaReport:
    """Margins for the disjointness and containment statements at level k.

    Margins are distance minus radius (positive means the statement holds).
    Points of the next level inside I_{n1}^(k) are checked one by one; all
    other n in (q_k, q_{k+1}] lie outside I_{n1}^(k), so their distance to
    I_{n2}^(k+1) is at least the gap between I_{n2} and the ends of I_{n1},
    against radius eps/(q_k + 1).  With ``exhaustive_cap`` >= q_{k+1} every
    n is additionally checked directly.
    """
    alpha, eps = ots.alpha, ots.epsilon
    if n1 is None:
        n1 = ots.link(k).n
    if n2 is None:
        n2 = ots.link(k + 1).n
    qk, qkm1, qk1, a = q_of(alpha, k), q_of(alpha, k - 1), q_of(alpha, k + 1), a_of(alpha, k + 1)
    w = Fraction(1, 2 ** 64 * q_of(alpha, k + 2) ** 2 * (qk1 + 1))
    A, L, lo, hi, type1, t = _arc_positions(alpha, k, n1, n2, w)
    failures = []

    # (a) the two endpoints of I_{n1}
    ma = [lo - Fraction(eps) / n1, (L - hi) - Fraction(eps) / (n1 + qkm1)]
    for name, m in zip(("n1", "n1+q_{k-1}"), ma):
        if not m.lo > 0:
            failures.append(("a", name, m))

    # (b) inside I_{n1}: points n1 + q_{k-1} + c q_k, other than the ends of I_{n2}
    b = (n2 - n1 - qkm1) // qk
    ends = {n2, wrap(n2 + qk, qk1)}
    mb = []
    for c in range(1 if type1 else 0, a):
        n = n1 + qkm1 + c * qk
        if n in ends or not qk < n <= qk1:
            continue
        tc = t(c)
        d = (lo - tc) if c > b else (tc - hi)
        m = d - Fraction(eps) / n
        mb.append((n, m))
        if not m.lo > 0:
            failures.append(("b-inside", n, m))
    gap_out = RatInterval(min(lo.lo, (L - hi).lo), min(lo.hi, (L - hi).hi))
    mout = gap_out - Fraction(eps, qk + 1)
    if not mout.lo > 0:
        failures.append(("b-outside", None, mout))

    # containment in B((n1 + q_{k-1}) alpha, eps_k / (n1 + q_{k-1}))
    ek = ots.eps_k(k)
    cm = ek / (n1 + qkm1) - (L - lo)
    if not cm.lo > 0:
        failures.append(("containment", None, cm))

    rep = LemmaReport(k, n1, n2, ma, mb, mout, cm, ek, 0, failures)
    if exhaustive_cap and qk1 <= exhaustive_cap:
        rep.exhaustive_checked = _exhaustive_b(alpha, eps, k, n1, n2, A, lo, hi, ends, rep)
    return rep


def _exhaustive_b(alpha, eps, k, n1, n2, A, lo, hi, ends, rep) -> int:
    """Direct check of every n in (q_k, q_{k+1}] against I_{n2}^(k+1)."""
    qk, qk1 = q_of(alpha, k), q_of(alpha, k + 1)
    s = direction(k)
    count = 0
    for n in range(qk + 1, qk1 + 1):
        if n in ends:
            continue
        d = ((A * (n - n1)) * s)
        d = d - math.floor(d.lo)
        if d.hi >= 1:
            raise Ambiguous(f"orbit point {n} too close to n1 alpha")
        # circular distance from the point to the arc [lo, hi]
        if hi.hi < d.lo:
            dist = RatInterval(min(d.lo - hi.hi, 1 - d.hi + lo.lo), max(d.hi - hi.lo, 1 - d.lo + lo.hi))
        elif d.hi < lo.lo:
            dist = lo - d
        else:
            rep.failures.append(("exhaustive-inside", n, d))
            continue
        m = RatInterval(max(dist.lo, Fraction(0)), dist.hi) - Fraction(eps) / n
        if not m.lo > 0:
            rep.failures.append(("exhaustive", n, m))
        count += 1
    return count


# ---------------------------------------------------------------------------
# the descent for constants above 1/4


@dataclass
class DescentStep:
    k: int
    n_k: int
    q_k: int
    ratio: Fraction
    ball_margin: RatInterval
    segment: int = 1


@dataclass
class DescentTrace:
    alpha: RealNumberSpec
    x: CirclePoint
    epsilon: Fraction
    delta_small: Fraction
    K: int
    step_bound: int
    steps: list
    outcome: str              # "witness" or "contradiction"
    witness: Optional[int] = None
    witness_value: Optional[RatInterval] = None
    segments: int = 1

    @property
    def max_segment_steps(self) -> int:
        counts: dict[int, int] = {}
        for st in self.steps:
            counts[st.segment] = counts.get(st.segment, 0) + 1
        return max(counts.values())

    @property
    def witness_beyond_K(self) -> bool:
        return self.witness is not None and self.witness > q_of(self.alpha, self.K)

    def to_json(self) -> dict:
        return {
            "epsilon": fmt(self.epsilon),
            "delta_small": fmt(self.delta_small),
            "K": self.K,
            "step_bound": self.step_bound,
            "outcome": self.outcome,
            "witness": self.witness,
            "segments": self.segments,
            "steps": [{"k": s.k, "n_k": s.n_k, "ratio": fmt(s.ratio)} for s in self.steps],
        }


def descent_start(alpha: RealNumberSpec, delta_small: Fraction, span: int, k0: int = 1) -> int:
    """Smallest K >= k0 with delta_{k+1} + delta_{k+1}^2 < delta_small for K <= k <= K + span.

    The descent re-checks the condition at every level it actually visits.
    """
    K = k0
    k = K
    while k <= K + span:
        d = Fraction(q_of(alpha, k), q_of(alpha, k + 1))
        if d + d * d < delta_small:
            k += 1
        else:
            K = k = k + 1
        if K > 10_000:
            raise BudgetError("no start level found below 10000")
    return K


def emptiness_descent(alpha: RealNumberSpec, eps, x: PointLike, delta_small, K: int | None = None,
                      max_segments: int = 64) -> DescentTrace:
    """Follow the P^(k) intervals I_{n_k} containing x from level K.

    While x stays outside B(n_k alpha, (eps - delta)/n_k), n_k/q_k must drop
    by at least eps - 2 delta - 1/4 per level; since it stays positive, a
    ball containing x (a witness n_k) turns up within
    ceil((n/q) / (eps - 2 delta - 1/4)) levels of the segment start.  Only
    n_k > q_K count as witnesses against the tail condition at scale K; a
    smaller n_k closes the segment and the descent restarts one level down.
    """
    eps, dl = as_fraction(eps), as_fraction(delta_small)
    gap = eps - 2 * dl - Fraction(1, 4)
    if dl <= 0 or gap <= 0:
        raise PreconditionError("need delta_small > 0 and eps - 2 delta_small > 1/4")
    if alpha.is_rational:
        raise PreconditionError("alpha must be irrational")
    x = as_point(x)
    if K is None:
        K = descent_start(alpha, dl, 0)
    qK = q_of(alpha, K)
    n = locate_descent(alpha, x, K)
    bound = seg_bound = math.ceil(Fraction(n, qK) / gap)
    steps = []
    k = seg_start = K
    segments = 1
    while True:
        qk = q_of(alpha, k)
        ratio = Fraction(n, qk)
        w = Fraction(1, 2 ** 64 * q_of(alpha, k + 1) ** 2)
        dist = point_dist(alpha, n, x, w)
        margin = dist - (eps - dl) / n
        while margin.lo <= 0 <= margin.hi and not margin.is_exact:
            w /= 2 ** 64
            dist = point_dist(alpha, n, x, w)
            margin = dist - (eps - dl) / n
        steps.append(DescentStep(k, n, qk, ratio, margin, segments))
        d = Fraction(qk, q_of(alpha, k + 1))
        if not d + d * d < dl:
            raise PreconditionError(f"delta_(k+1) + delta_(k+1)^2 >= delta_small at k = {k}")
        inside = margin.hi < 0 or (margin.is_exact and margin.lo <= 0)
        n_next = _child(alpha, x, k, n)
        if inside:
            if n > qK:
                return DescentTrace(alpha, x, eps, dl, K, bound, steps, "witness", n, dist * n, segments)
            if segments >= max_segments:
                raise BudgetError(f"no witness beyond q_K after {segments} segments")
            segments += 1
            seg_start = k + 1
            seg_bound = math.ceil(Fraction(n_next, q_of(alpha, k + 1)) / gap)
            bound = max(bound, seg_bound)
        else:
            if ratio <= gap:
                return DescentTrace(alpha, x, eps, dl, K, bound, steps, "contradiction", None, None, segments)
            if not ratio - Fraction(n_next, q_of(alpha, k + 1)) >= gap:
                raise InvariantError(f"n_k/q_k failed to drop by {gap} at k = {k}")
        n = n_next
        k += 1
        if k - seg_start > seg_bound:
            raise InvariantError("descent outran its step bound")
