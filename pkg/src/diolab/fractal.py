"""Cantor-type covers and finite-depth dimension bounds.

Two families of covers are built here.  The Erdos-Taylor sets keep, at
generation g, the intervals [(j + delta)/n_g, (j + 1 - delta)/n_g] that sit
inside a kept interval of generation g - 1; an interval is stored by its
integer j.  The survivor covers remove, at level k_{i+1}, every partition
interval I_n with q_{k_i} <= n < (eps/2) q_{k_{i+1}}; survivors are counted
exactly through the ancestor map without listing them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .cf import RealNumberSpec, q_of
from .circle import constant_pieces, mask_pieces, pieces_total, pushdown, wrap
from .errors import BudgetError, InvariantError, PreconditionError
from .interval import as_fraction, fmt

DEFAULT_CAP = 1_000_000


@dataclass
class CoverStats:
    m: int                 # fewest children of a (processed) parent
    gap: Fraction          # smallest gap between consecutive intervals
    len_max: Fraction
    count: int


@dataclass
class IntervalCover:
    """Generation ``generation`` of an Erdos-Taylor cover.

    Interval j is [(j + delta)/n, (j + 1 - delta)/n]; generation 0 is [0, 1].
    """

    generation: int
    n: int
    delta: Fraction
    js: list
    stats: CoverStats
    truncated: bool = False
    parents_processed: int = 0

    def interval(self, i: int) -> tuple[Fraction, Fraction]:
        if self.generation == 0:
            return Fraction(0), Fraction(1)
        j = self.js[i]
        return (j + self.delta) / self.n, (j + 1 - self.delta) / self.n

    @property
    def intervals(self) -> Iterable[tuple[Fraction, Fraction]]:
        for i in range(len(self.js)):
            yield self.interval(i)

    def __len__(self) -> int:
        return len(self.js)

    def records(self) -> Iterable[dict]:
        for lo, hi in self.intervals:
            yield {"gen": self.generation, "lo": fmt(lo), "hi": fmt(hi)}


def _children(j: int, n_prev: int, n: int, delta: Fraction, root: bool) -> tuple[int, int]:
    """Range [i0, i1] of generation-g indices fully inside parent j."""
    u, v = delta.numerator, delta.denominator
    if root:
        return 0, n - 1
    # (i + delta)/n >= (j + delta)/n_prev  and  (i + 1 - delta)/n <= (j + 1 - delta)/n_prev
    i0 = -((-((j * v + u) * n - u * n_prev)) // (v * n_prev))
    i1 = ((j * v + v - u) * n - (v - u) * n_prev) // (v * n_prev)
    return i0, i1


def check_et_hypothesis(n_seq: Sequence[int], delta) -> None:
    delta = as_fraction(delta)
    if not 0 < delta < Fraction(1, 2):
        raise PreconditionError("delta must lie in (0, 1/2)")
    R = 4 / (1 - 2 * delta)
    for k in range(1, len(n_seq)):
        if n_seq[k] < R * n_seq[k - 1]:
            raise PreconditionError(f"n_(k+1)/n_k >= 4/(1-2 delta) = {fmt(R)} fails at k = {k}: "
                                    f"{n_seq[k]}/{n_seq[k - 1]}")


def erdos_taylor_cover(n_seq: Sequence[int], delta, depth: int | None = None,
                       cap: int = DEFAULT_CAP) -> list[IntervalCover]:
    """Generations 0..depth of the set of x with ||n_k x|| >= delta for all k."""
    delta = as_fraction(delta)
    n_seq = [int(v) for v in n_seq]
    depth = len(n_seq) if depth is None else depth
    if depth > len(n_seq):
        raise PreconditionError(f"depth {depth} exceeds the {len(n_seq)} supplied terms")
    check_et_hypothesis(n_seq[:depth], delta)
    root = IntervalCover(0, 1, delta, [0], CoverStats(1, Fraction(0), Fraction(1), 1))
    covers = [root]
    for g in range(1, depth + 1):
        prev = covers[-1]
        n, n_prev = n_seq[g - 1], prev.n
        js: list = []
        m_min = None
        processed = 0
        truncated = prev.truncated
        for j in prev.js:
            i0, i1 = _children(j, n_prev, n, delta, g == 1)
            c = max(0, i1 - i0 + 1)
            m_min = c if m_min is None else min(m_min, c)
            processed += 1
            room = cap - len(js)
            if c > room:
                js.extend(range(i0, i0 + room))
                truncated = True
                break
            js.extend(range(i0, i1 + 1))
        if not js:
            raise BudgetError(f"generation {g} is empty or exceeds the cap {cap}")
        dmin = min((b - a for a, b in zip(js, js[1:])), default=None)
        gap = Fraction(dmin - 1) / n + 2 * delta / n if dmin is not None else Fraction(1)
        stats = CoverStats(m_min, gap, (1 - 2 * delta) / n, len(js))
        covers.append(IntervalCover(g, n, delta, js, stats, truncated, processed))
    return covers


def verify_cover(covers: list[IntervalCover], sample: int | None = None) -> None:
    """Exact disjointness, order, nesting and the child/gap bounds."""
    for g in range(1, len(covers)):
        c, p = covers[g], covers[g - 1]
        js = c.js
        if any(b <= a for a, b in zip(js, js[1:])):
            raise InvariantError(f"generation {g} not sorted/disjoint")
        if c.stats.gap < 2 * c.delta / c.n:
            raise InvariantError(f"generation {g} gap below 2 delta/n")
        if g >= 2 and c.stats.m < (1 - 2 * c.delta) * c.n / p.n - 2:
            raise InvariantError(f"generation {g}: m = {c.stats.m} below (1-2delta) n_k/n_(k-1) - 2")
        idx = range(len(js)) if sample is None else np.linspace(0, len(js) - 1, min(sample, len(js))).astype(int)
        pj = p.js
        for i in idx:
            lo, hi = c.interval(int(i))
            # parent index from position
            j = math.floor(lo * p.n) if g > 1 else 0
            plo, phi = p.interval(_bisect(pj, j)) if g > 1 else (Fraction(0), Fraction(1))
            if not (plo <= lo and hi <= phi):
                raise InvariantError(f"generation {g} interval {i} not nested")


def _bisect(js, j):
    import bisect

    k = bisect.bisect_left(js, j)
    if k >= len(js) or js[k] != j:
        raise InvariantError(f"parent index {j} missing")
    return k


def cover_stats_rows(covers: list[IntervalCover]) -> list[dict]:
    rows = []
    for c in covers[1:]:
        rows.append({
            "gen": c.generation, "count": c.stats.count, "m": c.stats.m,
            "gap_num": c.stats.gap.numerator, "gap_den": c.stats.gap.denominator,
            "lenmax_num": c.stats.len_max.numerator, "lenmax_den": c.stats.len_max.denominator,
        })
    return rows


def export_cover_jsonl(covers: list[IntervalCover], fh) -> int:
    count = 0
    for c in covers[1:]:
        for rec in c.records():
            fh.write(json.dumps(rec) + "\n")
            count += 1
    return count


# ---------------------------------------------------------------------------
# mass distribution


def mass_dist_from_stats(ms: Sequence[int], gaps: Sequence) -> float:
    """log(m_1 ... m_{g-1}) / (-log(m_g gap_g)) at the deepest generation g."""
    if len(ms) < 3 or len(ms) != len(gaps):
        raise PreconditionError("need at least three generations of (m, gap)")
    if min(ms) < 2:
        raise PreconditionError("every generation needs at least two children per parent")
    num = sum(math.log(m) for m in ms[:-1])
    den = -_log(Fraction(ms[-1]) * as_fraction(gaps[-1]))
    if den <= 0:
        raise PreconditionError("m_g * gap_g must be below 1")
    return num / den


def _log(x: Fraction) -> float:
    # logs of huge rationals without float overflow
    return math.log(x.numerator) - math.log(x.denominator)


def mass_dist_lower_bound(covers: list[IntervalCover]) -> float:
    gens = covers[1:]
    return mass_dist_from_stats([c.stats.m for c in gens], [c.stats.gap for c in gens])


def mass_dist_trend(covers: list[IntervalCover]) -> list[float]:
    """Bound evaluated at every depth from 3 on, for trend reporting."""
    out = []
    for g in range(3, len(covers)):
        out.append(mass_dist_lower_bound(covers[: g + 1]))
    return out


@dataclass
class DimBounds:
    lower: Optional[float] = None
    upper: Optional[float] = None
    boxcount: Optional["BoxEstimate"] = None

    def clipped(self, ambient: int = 1) -> "DimBounds":
        lo = None if self.lower is None else min(max(self.lower, 0.0), ambient)
        up = None if self.upper is None else min(max(self.upper, 0.0), ambient)
        return DimBounds(lo, up, self.boxcount)


# ---------------------------------------------------------------------------
# the growth subsequence


def phi_subsequence(alpha: RealNumberSpec, R, kmax: int = 80, h: int | None = None) -> list[int]:
    """Increasing phi with q_phi(i) >= R q_phi(i-1) and q_(phi(i-1)+1) >= q_phi(i)/R.

    J_0 = {j : q_(j+1) >= R q_j}.  Each new element of J_0 is placed, then
    indices are filled in backwards: the largest t above the previous block
    with q_(next) >= R q_t, repeatedly.
    """
    R = as_fraction(R)
    if R <= 1:
        raise PreconditionError("R must exceed 1")
    J0 = [j for j in range(0, kmax) if q_of(alpha, j + 1) >= R * q_of(alpha, j)]
    if not J0:
        raise PreconditionError(f"J_0 is empty up to index {kmax}")
    phi = [J0[0]]
    for j in J0[1:]:
        block = [j]
        while True:
            top = block[-1]
            ts = [t for t in range(phi[-1] + 1, top) if q_of(alpha, top) >= R * q_of(alpha, t)]
            if not ts:
                break
            block.append(max(ts))
        phi.extend(reversed(block))
        if h is not None and len(phi) >= h:
            break
    if h is not None:
        phi = phi[:h]
    verify_phi(alpha, phi, R)
    return phi


def verify_phi(alpha: RealNumberSpec, phi: Sequence[int], R) -> None:
    R = as_fraction(R)
    for i in range(1, len(phi)):
        a, b = phi[i - 1], phi[i]
        if not b > a:
            raise InvariantError("phi is not increasing")
        if not q_of(alpha, b) >= R * q_of(alpha, a):
            raise InvariantError(f"q_phi({i + 1}) >= R q_phi({i}) fails")
        if not R * q_of(alpha, a + 1) >= q_of(alpha, b):
            raise InvariantError(f"q_(phi({i})+1) >= q_phi({i + 1})/R fails")


def et_constant(delta, M) -> Fraction:
    """(delta - R/M)/M with R = 4/(1 - 2 delta)."""
    delta, M = as_fraction(delta), as_fraction(M)
    R = 4 / (1 - 2 * delta)
    return (delta - R / M) / M


def bad_cover_pipeline(alpha: RealNumberSpec, delta=Fraction(1, 3), M=72, depth: int = 5,
                       kmax: int = 80, cap: int = DEFAULT_CAP) -> dict:
    """phi, the Erdos-Taylor cover on n_k = q_phi(k), and the resulting constant."""
    delta = as_fraction(delta)
    R = 4 / (1 - 2 * delta)
    phi = phi_subsequence(alpha, R, kmax, h=depth)
    n_seq = [q_of(alpha, j) for j in phi]
    covers = erdos_taylor_cover(n_seq, delta, min(depth, len(n_seq)), cap)
    const = et_constant(delta, M)
    return {
        "construction": f"erdos-taylor:delta={fmt(delta)},M={fmt(as_fraction(M))}",
        "R": R, "phi": phi, "n_seq": n_seq, "covers": covers, "constant": const,
    }


# ---------------------------------------------------------------------------
# survivor covers


def sparse_times(alpha: RealNumberSpec, eps, K: int, count: int) -> tuple[list[int], int]:
    """k_0 = K, k_(i+1) the smallest k with q_(k_i)/q_k < eps/12; returns (k_i, largest gap)."""
    eps = as_fraction(eps)
    if not 0 < eps < 12:
        raise PreconditionError("need 0 < eps/12 < 1")
    ks = [K]
    for _ in range(count):
        k = ks[-1] + 1
        while not 12 * q_of(alpha, ks[-1]) < eps * q_of(alpha, k):
            k += 1
        ks.append(k)
    gaps = [b - a for a, b in zip(ks, ks[1:])]
    # q_{k+2} > 2 q_k gives k_(i+1) - k_i <= 2 ceil(log2(12/eps)) + 2
    C = 2 * math.ceil(math.log2(12 / eps)) + 2
    if gaps and max(gaps) > C:
        raise InvariantError(f"gap {max(gaps)} exceeds the bound {C}")
    return ks, max(gaps) if gaps else 0


def removal_range(alpha: RealNumberSpec, eps: Fraction, k_i: int, k_next: int) -> tuple[int, int]:
    """Level-k_next indices q_(k_i) <= n < (eps/2) q_(k_next), as [lo, hi]."""
    lo = q_of(alpha, k_i)
    top = eps * q_of(alpha, k_next) / 2
    hi = math.ceil(top) - 1
    return lo, hi


@dataclass
class SurvivorCover:
    alpha: RealNumberSpec
    epsilon: Fraction
    ks: list
    C_eps: int
    counts: list               # N_i: surviving level-k_i intervals
    bounds: list               # q_(k_i) (1 - eps/32)^i, exact
    parent_ratio_max: list     # max over parents of kept/total children, per step
    M: Optional[int]
    M_applicable: list         # i >= 1 with q_(k_i) <= M^i
    upper_bound: Optional[float]

    def s_cost(self, s: float, i: int | None = None) -> float:
        """sum |I|^s over generation i, bounded with |I| <= 2/q_(k_i)."""
        i = len(self.counts) - 1 if i is None else i
        q = q_of(self.alpha, self.ks[i])
        return math.exp(math.log(self.counts[i]) + s * (math.log(2) - math.log(q)))

    def is_survivor(self, i: int, n: int) -> bool:
        """Whether I_n^(k_i) survives every removal up to generation i."""
        m = n
        for j in range(i - 1, -1, -1):
            lo, hi = removal_range(self.alpha, self.epsilon, self.ks[j], self.ks[j + 1])
            if lo <= m <= hi:
                return False
            for k in range(self.ks[j + 1] - 1, self.ks[j] - 1, -1):
                m = wrap(m - q_of(self.alpha, k - 1), q_of(self.alpha, k))
        return True

    def rows(self) -> list[dict]:
        out = []
        for i, (k, N, b) in enumerate(zip(self.ks, self.counts, self.bounds)):
            out.append({"gen": i, "k": k, "q_k": q_of(self.alpha, k), "survivors": N,
                        "bound": float(b), "ok": N <= b})
        return out


def _push_levels(alpha, pieces, k_from: int, k_to: int):
    for k in range(k_from - 1, k_to - 1, -1):
        pieces = pushdown(alpha, pieces, k)
    return pieces


def survivor_cover(alpha: RealNumberSpec, eps, K: int, depth: int, M: int | None = None) -> SurvivorCover:
    """Exact survivor counts N_i for the nested removals, i = 0..depth."""
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise PreconditionError("eps must lie in (0, 1/2)")
    ks, C = sparse_times(alpha, eps, K, depth)
    counts = [q_of(alpha, K)]
    bounds = [Fraction(q_of(alpha, K))]
    ratio_max = []
    for i in range(1, depth + 1):
        # kept-indicator at level k_i, pushed down through every generation
        f = constant_pieces(q_of(alpha, ks[i]))
        for j in range(i - 1, -1, -1):
            lo, hi = removal_range(alpha, eps, ks[j], ks[j + 1])
            f = mask_pieces(f, lo, hi)
            f = _push_levels(alpha, f, ks[j + 1], ks[j])
        N = pieces_total(f)
        b = q_of(alpha, ks[i]) * (1 - eps / 32) ** i
        counts.append(N)
        bounds.append(b)
        ratio_max.append(_parent_ratio(alpha, eps, ks[i - 1], ks[i]))
    cover = SurvivorCover(alpha, eps, ks, C, counts, bounds, ratio_max, None, [], None)
    _apply_M(cover, M)
    return cover


def _parent_ratio(alpha, eps, k_i: int, k_next: int) -> Fraction:
    """max over I_n^(k_i) of (children kept by the removal at k_next) / (all children)."""
    lo, hi = removal_range(alpha, eps, k_i, k_next)
    total = _push_levels(alpha, constant_pieces(q_of(alpha, k_next)), k_next, k_i)
    kept = _push_levels(alpha, mask_pieces(constant_pieces(q_of(alpha, k_next)), lo, hi), k_next, k_i)
    best = Fraction(0)
    for s, e, t, c in _overlay(total, kept):
        best = max(best, Fraction(c, t))
    return best


def _overlay(a, b):
    """Common refinement of two piecewise functions on the same index range."""
    i = j = 0
    pos = 1
    while i < len(a) and j < len(b):
        end = min(a[i][1], b[j][1])
        yield pos, end, a[i][2], b[j][2]
        pos = end + 1
        if a[i][1] == end:
            i += 1
        if b[j][1] == end:
            j += 1


def _apply_M(cover: SurvivorCover, M: int | None) -> None:
    qs = [q_of(cover.alpha, k) for k in cover.ks]
    if M is None:
        M = 2
        for i in range(1, len(qs)):
            while M ** i < qs[i]:
                M += 1
    applicable = [i for i in range(1, len(qs)) if qs[i] <= M ** i]
    cover.M = M
    cover.M_applicable = applicable
    if applicable:
        cover.upper_bound = 1 + math.log(1 - float(cover.epsilon) / 32) / math.log(M)


# ---------------------------------------------------------------------------
# box counting


@dataclass
class BoxEstimate:
    slope: float
    intercept: float
    residual: float
    scales: list
    counts: list


def _dyadic_box_count(los: np.ndarray, his: np.ndarray, s: int) -> int:
    scale = float(2 ** s)
    a = np.floor(los * scale).astype(np.int64)
    # half-open boxes [i, i+1)/2^s: a right endpoint on the grid does not open a new box
    b = np.maximum(np.ceil(his * scale).astype(np.int64) - 1, a)
    order = np.argsort(a, kind="stable")
    a, b = a[order], b[order]
    # merge overlapping box ranges
    run_end = np.maximum.accumulate(b)
    starts = np.ones(len(a), dtype=bool)
    starts[1:] = a[1:] > run_end[:-1]
    idx = np.flatnonzero(starts)
    ends = np.append(idx[1:], len(a)) - 1
    return int(np.sum(run_end[ends] - a[idx] + 1))


def box_dimension_estimate(obj, scales: Sequence[int]) -> BoxEstimate:
    """Slope of log N(2^-s) against s log 2 for boxes of side 2^-s.

    ``obj`` is an IntervalCover, a list of (lo, hi) pairs, or a list of points.
    """
    scales = sorted(int(s) for s in scales)
    if len(scales) < 4 or scales[-1] - scales[0] < 7:
        raise PreconditionError("need at least 4 scales spanning two decades")
    if isinstance(obj, IntervalCover):
        pairs = list(obj.intervals)
    else:
        items = list(obj)
        pairs = [(p, p) if not isinstance(p, tuple) else p for p in items]
    los = np.array([float(lo) for lo, _ in pairs])
    his = np.array([float(hi) for _, hi in pairs])
    counts = [_dyadic_box_count(los, his, s) for s in scales]
    if len(set(counts)) == 1:
        raise PreconditionError("degenerate set: same box count at every scale")
    x = np.array(scales, dtype=float) * math.log(2)
    y = np.log(np.array(counts, dtype=float))
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(math.sqrt(res[0] / len(x))) if len(res) else 0.0
    return BoxEstimate(float(slope), float(intercept), resid, scales, counts)


def cantor_middle_thirds(generation: int) -> list[tuple[Fraction, Fraction]]:
    ivs = [(Fraction(0), Fraction(1))]
    for _ in range(generation):
        nxt = []
        for lo, hi in ivs:
            t = (hi - lo) / 3
            nxt.append((lo, lo + t))
            nxt.append((hi - t, hi))
        ivs = nxt
    return ivs
