"""Dirichlet solvability at dyadic scales, growth of q_k and heaviness.

For X = 2^l with q_k <= X < q_{k+1}, the system ||q alpha|| <= c/X,
0 < q <= X is solvable iff ||q_k alpha|| <= c/X, because no n below q_{k+1}
comes closer to an integer than q_k does.  Every count below is therefore a
walk over convergent blocks with exact comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np

from .cf import RealNumberSpec, a_of, q_of, qdist
from .errors import Ambiguous, InvariantError, PreconditionError
from .interval import RatInterval, as_fraction, fmt
from .orbit import residue_frame

_HALF = Fraction(1, 2)


def block_of_scale(alpha: RealNumberSpec, ell: int) -> int:
    """Largest k with q_k <= 2^ell."""
    X = 1 << ell
    k = 0
    while q_of(alpha, k + 1) <= X:
        k += 1
    return k


def ell_range(alpha: RealNumberSpec, k: int) -> tuple[int, int]:
    """Scales l >= 1 with q_k <= 2^l < q_{k+1}, as an inclusive range (may be empty)."""
    lo = max(1, (q_of(alpha, k) - 1).bit_length())
    hi = (q_of(alpha, k + 1) - 1).bit_length() - 1
    return lo, hi


def _dist_le(alpha: RealNumberSpec, q: int, thr: Fraction) -> bool:
    """Certified ||q alpha|| <= thr."""
    w = Fraction(1, 2 ** 64) * min(thr, Fraction(1)) if thr > 0 else Fraction(1, 2 ** 64)
    for _ in range(40):
        d = qdist(alpha, q, w)
        if d.hi <= thr:
            return True
        if d.lo > thr:
            return False
        if d.is_exact:
            return d.lo <= thr
        w /= 2 ** 32
    raise Ambiguous(f"||{q} alpha|| too close to {fmt(thr)}")


def dirichlet_solvable(alpha: RealNumberSpec, c, ell: int, brute: bool = False) -> bool:
    """Whether ||q alpha|| <= c 2^-l has a solution 0 < q <= 2^l."""
    c = as_fraction(c)
    if c <= 0 or ell < 0:
        raise PreconditionError("need c > 0 and l >= 0")
    thr = c / (1 << ell)
    if thr >= _HALF:
        return True
    if alpha.is_rational:
        return any(_dist_le(alpha, q, thr) for q in range(1, min(1 << ell, alpha.q) + 1))
    if brute:
        return _brute_solvable(alpha, thr, ell)
    return _dist_le(alpha, q_of(alpha, block_of_scale(alpha, ell)), thr)


def _brute_solvable(alpha: RealNumberSpec, thr: Fraction, ell: int) -> bool:
    """Check every q <= 2^l (l <= 20) through an integer residue frame."""
    if ell > 20:
        raise PreconditionError("the exhaustive check is limited to l <= 20")
    X = 1 << ell
    fr = residue_frame(alpha, X, 2 ** 40)
    r = fr.residues(np.arange(1, X + 1))
    d = np.minimum(r, fr.D - r)
    # ||q alpha|| lies within 1/D of d/D
    T = math.floor(thr * fr.D)
    if np.any(d + 1 <= T):
        return True
    maybe = np.flatnonzero(d - 1 <= T)
    return any(_dist_le(alpha, int(i) + 1, thr) for i in maybe)


@dataclass
class BlockInfo:
    k: int
    ell_lo: int
    ell_hi: int
    unsolvable: list
    predicted: list

    @property
    def matches(self) -> bool:
        return self.unsolvable == self.predicted


@dataclass
class DensityReport:
    c: Fraction
    N: int
    solvable_count: int
    bad_ell: list
    blocks: list = field(default_factory=list)

    @property
    def density(self) -> Fraction:
        return Fraction(self.solvable_count, self.N)

    def rows(self) -> list[dict]:
        bad = set(self.bad_ell)
        out = []
        for b in self.blocks:
            for ell in range(max(b.ell_lo, 1), min(b.ell_hi, self.N) + 1):
                out.append({"ell": ell, "solvable": int(ell not in bad), "block_k": b.k})
        return out

    def to_json(self) -> dict:
        return {"c": fmt(self.c), "N": self.N, "solvable_count": self.solvable_count,
                "density": fmt(self.density), "bad_ell": self.bad_ell,
                "blocks": [{"k": b.k, "ell_lo": b.ell_lo, "ell_hi": b.ell_hi, "unsolvable": b.unsolvable}
                           for b in self.blocks]}


def predicted_unsolvable(alpha: RealNumberSpec, c: Fraction, k: int) -> list[int]:
    """Integers l in the block with c/||q_k alpha|| < 2^l < q_{k+1}."""
    lo, hi = ell_range(alpha, k)
    out = []
    for ell in range(lo, hi + 1):
        thr = c / (1 << ell)
        if thr < _HALF and not _dist_le(alpha, q_of(alpha, k), thr):
            out.append(ell)
    return out


def singular_average_density(alpha: RealNumberSpec, c, N: int) -> DensityReport:
    """Exact count of solvable scales l = 1..N with the per-block breakdown."""
    c = as_fraction(c)
    if N < 1:
        raise PreconditionError("N must be >= 1")
    if c <= 0:
        raise PreconditionError("c must be positive")
    if alpha.is_rational:
        raise PreconditionError("alpha must be irrational")
    bad: list[int] = []
    blocks = []
    k = 0
    while True:
        lo, hi = ell_range(alpha, k)
        if lo > N:
            break
        if lo <= hi:
            uns = []
            for ell in range(lo, min(hi, N) + 1):
                if not dirichlet_solvable(alpha, c, ell):
                    uns.append(ell)
            pred = [e for e in predicted_unsolvable(alpha, c, k) if e <= N]
            blocks.append(BlockInfo(k, lo, hi, uns, pred))
            bad.extend(uns)
        k += 1
    return DensityReport(c, N, N - len(bad), bad, blocks)


def check_block_structure(report: DensityReport) -> None:
    """Unsolvable scales form a final segment of each block, at most log2(1/c) + 1 of them."""
    cap = math.log2(1 / report.c) + 1
    for b in report.blocks:
        if not b.matches:
            raise InvariantError(f"block {b.k}: unsolvable {b.unsolvable} != predicted {b.predicted}")
        if b.unsolvable and b.unsolvable != list(range(b.unsolvable[0], min(b.ell_hi, report.N) + 1)):
            raise InvariantError(f"block {b.k}: unsolvable scales are not a final segment")
        if len(b.unsolvable) > cap:
            raise InvariantError(f"block {b.k}: {len(b.unsolvable)} unsolvable scales exceed {cap}")


def converse_scales(alpha: RealNumberSpec, kmax: int) -> list[tuple[int, int]]:
    """(k, l) with l the integer in [log2 q_k - 1, log2 q_k), for k = 2, 4, ..., kmax."""
    out = []
    for k in range(2, kmax + 1, 2):
        q = q_of(alpha, k)
        if q < 2:
            continue
        out.append((k, (q - 1).bit_length() - 1))
    return out


def check_converse(alpha: RealNumberSpec, kmax: int, c=Fraction(1, 4)) -> list[int]:
    """Every scale l with q_k/2 <= 2^l < q_k is unsolvable for c = 1/4; returns those l."""
    c = as_fraction(c)
    out = []
    for k, ell in converse_scales(alpha, kmax):
        if dirichlet_solvable(alpha, c, ell):
            raise InvariantError(f"scale {ell} below q_{k} = {q_of(alpha, k)} is solvable")
        out.append(ell)
    return out


# ---------------------------------------------------------------------------
# growth and heaviness


def log_enclosure(n: int) -> RatInterval:
    """Enclosure of log n from the float value with a few ulps of slack."""
    if n <= 0:
        raise PreconditionError("log of a non-positive integer")
    v = math.log(n)
    slack = Fraction(abs(v)) * Fraction(1, 2 ** 48) + Fraction(1, 2 ** 60)
    return RatInterval(Fraction(v) - slack, Fraction(v) + slack)


@dataclass
class GrowthStats:
    ks: list
    log_qk_over_k: list       # RatInterval per k
    avg_log_a: list           # RatInterval per k

    def rows(self) -> list[dict]:
        return [{"k": k, "log_qk_over_k": float(a), "avg_log_a": float(b)}
                for k, a, b in zip(self.ks, self.log_qk_over_k, self.avg_log_a)]


def growth_stats(alpha: RealNumberSpec, K: int) -> GrowthStats:
    """(1/k) log q_k and (1/k) sum log a_i for k = 1..K, with prod a_i <= q_k <= prod (a_i + 1) checked."""
    if K < 2:
        raise PreconditionError("K must be >= 2")
    ks, lq, la = [], [], []
    lower = upper = 1
    for k in range(1, K + 1):
        a = a_of(alpha, k)
        lower *= a
        upper *= a + 1
        q = q_of(alpha, k)
        if not lower <= q <= upper:
            raise InvariantError(f"prod a_i <= q_k <= prod (a_i + 1) fails at k = {k}")
        ks.append(k)
        lq.append(log_enclosure(q) / k)
        la.append(log_enclosure(lower) / k)
    return GrowthStats(ks, lq, la)


def heaviness_stat(alpha: RealNumberSpec, eta, N: int) -> float:
    """(1/N) sum_{k<=N} max(log(eta a_k), 0)."""
    eta = as_fraction(eta)
    if eta <= 0 or N < 1:
        raise PreconditionError("need eta > 0 and N >= 1")
    total = 0.0
    for k in range(1, N + 1):
        t = eta * a_of(alpha, k)
        if t > 1:
            total += math.log(t.numerator) - math.log(t.denominator)
    return total / N


def heaviness_sweep(alpha: RealNumberSpec, delta, etas, N: int) -> list[dict]:
    delta = float(as_fraction(delta))
    return [{"eta": fmt(as_fraction(e)), "value": (v := heaviness_stat(alpha, e, N)), "below_delta": v <= delta}
            for e in etas]


# ---------------------------------------------------------------------------
# no irrational is singular


@dataclass
class NonSingularWitness:
    k: int
    X: int
    c: Fraction
    min_dist: RatInterval


def nonsingular_witness(alpha: RealNumberSpec, k: int, c=Fraction(1, 4)) -> NonSingularWitness:
    """X = q_{k+1} - 1 has no q <= X with ||q alpha|| <= c/X.

    Every 0 < q < q_{k+1} has ||q alpha|| >= ||q_k alpha|| > 1/(2 q_{k+1}),
    and c/X <= 1/(2 q_{k+1}) once X >= 2c q_{k+1}.
    """
    c = as_fraction(c)
    X = q_of(alpha, k + 1) - 1
    if X < max(1, q_of(alpha, k)):
        raise PreconditionError(f"q_(k+1) - 1 < q_k at k = {k}")
    if _dist_le(alpha, q_of(alpha, k), c / X):
        raise InvariantError(f"X = {X} admits a solution")
    return NonSingularWitness(k, X, c, qdist(alpha, q_of(alpha, k), Fraction(1, 2 ** 64)))
