"""Linear forms of a real n x m matrix: best approximations, Dirichlet density, grid sets, transference.

Conventions: A has n rows and m columns.  For an integer n-vector y the m
column forms are M_j(y) = sum_i a_ij y_i and M(y) = max_j ||M_j(y)||.  For an
integer m-vector q the n row forms are L_i(q) = sum_j a_ij q_j and
||Aq - x|| = max_i ||L_i(q) - x_i||.  Integer vectors are measured in the sup
norm; the grid construction measures real vectors in the Euclidean norm.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .cf import RealNumberSpec, alpha_enclosure
from .errors import (Ambiguous, BudgetError, HypothesisFail, InvariantError,
                     PreconditionError, RankSuspect)
from .interval import RatInterval, as_fraction, fmt
from .singular import DensityReport

_RANK_WIDTH = Fraction(1, 10 ** 30)
_MAX_BITS = 4096


@dataclass(frozen=True)
class MatrixSpec:
    n: int
    m: int
    entries: tuple  # n rows of m RealNumberSpec
    rank_assumption: bool = True

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise PreconditionError("matrix dimensions must be positive")
        if len(self.entries) != self.n or any(len(r) != self.m for r in self.entries):
            raise PreconditionError(f"entries must be {self.n} rows of {self.m}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RealNumberSpec]], rank_assumption: bool = True) -> "MatrixSpec":
        rows = tuple(tuple(r) for r in rows)
        return cls(len(rows), len(rows[0]) if rows else 0, rows, rank_assumption)

    @classmethod
    def column(cls, *alphas: RealNumberSpec) -> "MatrixSpec":
        """n x 1 matrix (one linear form in the dual, n row forms)."""
        return cls.from_rows([[a] for a in alphas])

    @classmethod
    def row(cls, *alphas: RealNumberSpec) -> "MatrixSpec":
        return cls.from_rows([list(alphas)])

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "rank_assumption": self.rank_assumption,
                "entries": [[a.to_json() for a in r] for r in self.entries]}

    @classmethod
    def from_json(cls, d: dict) -> "MatrixSpec":
        rows = [[RealNumberSpec.from_json(a) for a in r] for r in d["entries"]]
        return cls.from_rows(rows, bool(d.get("rank_assumption", True)))

    def floats(self) -> np.ndarray:
        return np.array([[float(alpha_enclosure(a, Fraction(1, 2 ** 60)).mid) for a in r]
                         for r in self.entries])


class FormFrame:
    """Cached enclosures of the entries at a working precision that can be raised."""

    def __init__(self, A: MatrixSpec, bits: int = 96):
        self.A = A
        self.bits = bits
        self._cache: dict = {}
        self.af = A.floats()

    def entry(self, i: int, j: int) -> RatInterval:
        key = (i, j, self.bits)
        if key not in self._cache:
            self._cache[key] = alpha_enclosure(self.A.entries[i][j], Fraction(1, 2 ** self.bits))
        return self._cache[key]

    def refine(self) -> None:
        if self.bits >= _MAX_BITS:
            raise Ambiguous("working precision exhausted")
        self.bits *= 2

    def _combo(self, terms) -> RatInterval:
        acc = RatInterval.point(0)
        for (i, j), c in terms:
            if c:
                acc = acc + self.entry(i, j) * int(c)
        return acc

    def col_form(self, y, j: int) -> RatInterval:
        return self._combo((((i, j), y[i]) for i in range(self.A.n)))

    def row_form(self, q, i: int) -> RatInterval:
        return self._combo((((i, j), q[j]) for j in range(self.A.m)))

    def M(self, y) -> RatInterval:
        """Enclosure of M(y) = max_j ||M_j(y)||, tightened away from 0."""
        if not any(y):
            raise PreconditionError("y must be non-zero")
        while True:
            ds = [self.col_form(y, j).dist_to_int() for j in range(self.A.m)]
            out = RatInterval(max(d.lo for d in ds), max(d.hi for d in ds))
            if out.lo > 0:
                return out
            if out.is_exact or out.width < _RANK_WIDTH:
                raise RankSuspect(f"M({tuple(y)}) is indistinguishable from 0")
            self.refine()

    def shifted(self, q, x) -> RatInterval:
        """Enclosure of ||Aq - x|| = max_i ||L_i(q) - x_i||."""
        ds = [(self.row_form(q, i) - as_fraction(x[i])).dist_to_int() for i in range(self.A.n)]
        return RatInterval(max(d.lo for d in ds), max(d.hi for d in ds))

    def compare(self, f, g) -> int:
        """Certified sign of f() - g(); both callables re-evaluate at the current precision."""
        while True:
            a, b = f(), g()
            if a.hi < b.lo:
                return -1
            if a.lo > b.hi:
                return 1
            if a.is_exact and b.is_exact:
                return (a.lo > b.lo) - (a.lo < b.lo)
            self.refine()


def form_dist(A: MatrixSpec, y, budget=Fraction(1, 10 ** 20)) -> RatInterval:
    """Enclosure of M(y) with width <= budget."""
    budget = as_fraction(budget)
    fr = FormFrame(A)
    while True:
        iv = fr.M(y)
        if iv.width <= budget:
            return iv
        fr.refine()


# ---------------------------------------------------------------------------
# best approximations


def shell(n: int, Y: int) -> np.ndarray:
    """Integer n-vectors of sup norm Y with first non-zero coordinate positive, lexicographic."""
    if Y < 1:
        raise PreconditionError("shell radius must be >= 1")
    grid = np.indices((2 * Y + 1,) * n).reshape(n, -1).T - Y
    sup = np.abs(grid).max(axis=1)
    nz = grid != 0
    first = grid[np.arange(len(grid)), np.argmax(nz, axis=1)]
    return grid[(sup == Y) & (first > 0)]


def _float_tol(Y: int, af: np.ndarray) -> float:
    k = af.shape[0] + af.shape[1]
    return 8.0 * k * Y * (1.0 + float(np.abs(af).max())) * 2.0 ** -52 + 2.0 ** -60


def _frac_dist(v: np.ndarray) -> np.ndarray:
    return np.abs(v - np.rint(v))


@dataclass
class BestApprox:
    y: tuple
    Y: int
    M: RatInterval


@dataclass
class BestApproxSeq:
    A: MatrixSpec
    items: list
    Y_max: int
    doubling_checks: int = 0

    @property
    def Ys(self) -> list[int]:
        return [it.Y for it in self.items]

    def index_for(self, bound_pow: Fraction, power: int) -> Optional[int]:
        """0-based k with Y_k^power <= bound_pow < Y_{k+1}^power, None when beyond the computed range."""
        for k in range(len(self.items) - 1):
            if self.items[k].Y ** power <= bound_pow < self.items[k + 1].Y ** power:
                return k
        return None

    def rows(self) -> list[dict]:
        out = []
        for i, it in enumerate(self.items, 1):
            r = {"i": i, "Y": it.Y}
            for t, v in enumerate(it.y, 1):
                r[f"y{t}"] = v
            r["M_lo"] = float(it.M.lo)
            r["M_hi"] = float(it.M.hi)
            out.append(r)
        return out

    def to_json(self) -> dict:
        return {"matrix": self.A.to_json(), "Y_max": self.Y_max, "rank_assumption": self.A.rank_assumption,
                "doubling_checks": self.doubling_checks,
                "items": [{"y": list(it.y), "Y": it.Y, "M": list(it.M.as_strings())} for it in self.items]}


def _argmin(fr: FormFrame, pts: list[tuple]) -> tuple:
    best = pts[0]
    for z in pts[1:]:
        if fr.compare(lambda: fr.M(z), lambda: fr.M(best)) < 0:
            best = z
    return best


def best_approx_sequence(A: MatrixSpec, Y_max: int, budget: int = 50_000_000) -> BestApproxSeq:
    """Inductive best approximations in the sup norm up to |y| <= Y_max.

    Shells of constant norm are scanned in order; a float pass selects the
    points that could beat the current record and exact enclosures decide.
    Ties in M are broken lexicographically.
    """
    n = A.n
    if Y_max < 1:
        raise PreconditionError("Y_max must be >= 1")
    if (2 * Y_max + 1) ** n > budget:
        raise BudgetError(f"(2*{Y_max}+1)^{n} points exceed the enumeration budget {budget}")
    fr = FormFrame(A)
    first = [tuple(int(v) for v in z) for z in shell(n, 1)]
    y = _argmin(fr, first)
    items = [BestApprox(y, 1, fr.M(y))]
    for Y in range(2, Y_max + 1):
        pts = shell(n, Y)
        vals = _frac_dist(pts @ fr.af).max(axis=1)
        cur = items[-1]
        cand = pts[vals < float(cur.M.hi) + _float_tol(Y, fr.af)]
        below = [tuple(int(v) for v in z) for z in cand]
        below = [z for z in below if fr.compare(lambda z=z: fr.M(z), lambda: fr.M(cur.y)) < 0]
        if below:
            z = _argmin(fr, below)
            items.append(BestApprox(z, Y, fr.M(z)))
    seq = BestApproxSeq(A, items, Y_max)
    seq.doubling_checks = check_doubling(seq)
    return seq


def check_doubling(seq: BestApproxSeq) -> int:
    """Y_{i + 3^(m+n)} >= 2 Y_{i+1} for every i where both exist; returns the number checked."""
    s = 3 ** (seq.A.m + seq.A.n)
    Y = [None] + seq.Ys  # 1-based
    count = 0
    for i in range(1, len(Y) - s):
        if Y[i + s] < 2 * Y[i + 1]:
            raise InvariantError(f"Y_{i + s} = {Y[i + s]} < 2 Y_{i + 1} = {2 * Y[i + 1]}")
        count += 1
    return count


def check_minimality(A: MatrixSpec, seq: BestApproxSeq) -> int:
    """Every non-zero y with |y| < Y_{i+1} has M(y) >= M_i; exhaustive over |y| <= Y_max."""
    fr = FormFrame(A)
    bounds = seq.Ys[1:] + [seq.Y_max + 1]
    checked = 0
    for Y in range(1, seq.Y_max + 1):
        i = next(t for t, b in enumerate(bounds) if Y < b)
        rec = seq.items[i]
        pts = shell(A.n, Y)
        vals = _frac_dist(pts @ fr.af).max(axis=1)
        for z in pts[vals < float(rec.M.hi) + _float_tol(Y, fr.af)]:
            z = tuple(int(v) for v in z)
            if z != rec.y and fr.compare(lambda: fr.M(z), lambda: fr.M(rec.y)) < 0:
                raise InvariantError(f"M{z} < M_{i + 1} with |y| = {Y} < {bounds[i]}")
        checked += len(pts)
    return checked


# ---------------------------------------------------------------------------
# Dirichlet density for the matrix system


def _halfspace_chunks(m: int, X: int) -> Iterator[np.ndarray]:
    """Integer m-vectors with 0 < |x| <= X and first non-zero coordinate positive."""
    if m == 1:
        yield np.arange(1, X + 1).reshape(-1, 1)
        return
    rest = np.indices((2 * X + 1,) * (m - 1)).reshape(m - 1, -1).T - X
    for x1 in range(1, X + 1):
        yield np.hstack([np.full((len(rest), 1), x1), rest])
    for sub in _halfspace_chunks(m - 1, X):
        yield np.hstack([np.zeros((len(sub), 1), dtype=sub.dtype), sub])


@dataclass
class MatrixDensityReport(DensityReport):
    requested_N: int = 0
    truncated: bool = False
    rank_assumption: bool = True

    def to_json(self) -> dict:
        d = super().to_json()
        d.update(requested_N=self.requested_N, truncated=self.truncated, rank_assumption=self.rank_assumption)
        return d

    def rows(self) -> list[dict]:
        bad = set(self.bad_ell)
        return [{"ell": e, "solvable": int(e not in bad)} for e in range(1, self.N + 1)]


def matrix_solvable(A: MatrixSpec, c, ell: int, fr: Optional[FormFrame] = None) -> bool:
    """Whether ||Ax|| <= c X^(-m/n), 0 < |x| <= X = 2^l has an integer solution (exhaustive)."""
    c = as_fraction(c)
    n, m = A.n, A.m
    X = 1 << ell
    thr_pow = c ** n / Fraction(2) ** (ell * m)  # compare ||Ax||^n with this
    if thr_pow >= Fraction(1, 2 ** n):
        return True
    fr = fr or FormFrame(A)
    thr_f = float(thr_pow) ** (1.0 / n)
    tol = _float_tol(X, fr.af)
    zero = [Fraction(0)] * n
    for pts in _halfspace_chunks(m, X):
        vals = _frac_dist(pts @ fr.af.T).max(axis=1)
        if vals.min() > thr_f + tol:
            continue
        order = np.argsort(vals)
        for idx in order:
            if vals[idx] > thr_f + tol:
                break
            q = tuple(int(v) for v in pts[idx])
            if fr.compare(lambda: fr.shifted(q, zero).pow(n), lambda: RatInterval.point(thr_pow)) <= 0:
                return True
    return False


def matrix_dirichlet_density(A: MatrixSpec, c, N: int, budget: int = 20_000_000) -> MatrixDensityReport:
    """Exhaustive solvability for l = 1..N; stops early (truncated) once the point budget is spent."""
    c = as_fraction(c)
    if c <= 0 or N < 1:
        raise PreconditionError("need c > 0 and N >= 1")
    fr = FormFrame(A)
    bad, spent, done = [], 0, 0
    truncated = False
    for ell in range(1, N + 1):
        pts = ((2 * (1 << ell) + 1) ** A.m - 1) // 2
        if spent + pts > budget:
            truncated = True
            break
        spent += pts
        if not matrix_solvable(A, c, ell, fr):
            bad.append(ell)
        done = ell
    if done == 0:
        raise BudgetError("enumeration budget too small for l = 1")
    return MatrixDensityReport(c, done, done - len(bad), bad, [], requested_N=N, truncated=truncated,
                               rank_assumption=A.rank_assumption)


# ---------------------------------------------------------------------------
# grid sets in [0, 1]^n


def _dot(y, x) -> Fraction:
    return sum((Fraction(a) * b for a, b in zip(y, x)), Fraction(0))


def _norm_int(z: Fraction) -> Fraction:
    return abs(z - math.floor(z + Fraction(1, 2)))


def _dist2(u, v) -> Fraction:
    return sum(((a - b) ** 2 for a, b in zip(u, v)), Fraction(0))


@dataclass
class GridSet:
    """Centers w(j) with ||y.w(j)|| = 1/2 and the common Euclidean radius (stored squared)."""

    y: tuple
    delta: Fraction
    h: int
    H: int
    centers: list
    radius_sq: Fraction

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)

    def offset(self, others: dict) -> Fraction:
        return _grid_offset(self.y, self.h, self.H, others)

    def center(self, j: Sequence[int]) -> tuple:
        others = {i: j[i] for i in range(len(self.y)) if i != self.h}
        t = self.offset(others)
        return tuple(Fraction(j[i], self.H) + (t if i == self.h else 0) for i in range(len(self.y)))

    def nearest(self, x: Sequence[Fraction]) -> tuple:
        """Center closest to x among the lattice neighbours of x."""
        n = len(self.y)
        base = [min(max(math.floor(Fraction(v) * self.H), 0), self.H - 1) for v in x]
        best, bd = None, None
        ranges = [range(max(b - 1, 0), min(b + 2, self.H)) for b in base]
        for j in np.ndindex(*[len(r) for r in ranges]):
            jj = [ranges[i][j[i]] for i in range(n)]
            w = self.center(jj)
            d = _dist2(w, x)
            if bd is None or d < bd:
                best, bd = w, d
        return best

    def to_json(self, limit: int = 1000) -> dict:
        return {"y": list(self.y), "delta": fmt(self.delta), "h": self.h + 1, "H": self.H,
                "radius_sq": fmt(self.radius_sq), "count": len(self.centers),
                "centers": [[fmt(v) for v in c] for c in self.centers[:limit]]}


def _grid_offset(y, h: int, H: int, others: dict) -> Fraction:
    """t in [0, 1/H) with y_h t + sum_{i != h} y_i j_i / H = 1/2 + p."""
    S = sum((Fraction(y[i] * j, H) for i, j in others.items()), Fraction(0))
    if y[h] > 0:
        return ((Fraction(1, 2) - S) % 1) / H
    return ((S - Fraction(1, 2)) % 1) / H


def grid_set(y: Sequence[int], delta, max_centers: int = 200_000, sample: int = 1000,
             seed: int = 0) -> GridSet:
    """Build the grid of centers for y and verify its identities exactly.

    h is the first index of a largest |y_i|, H = |y_h|, and the radius is
    (1 - 2 delta) / (2 |y|_2).  Checked: ||y.w|| = 1/2 at every center, center
    spacing >= 1/H, and ||y.(w + v)|| > delta for sampled v inside the ball.
    """
    y = tuple(int(v) for v in y)
    delta = as_fraction(delta)
    if not any(y):
        raise PreconditionError("y must be non-zero")
    if not 0 < delta < Fraction(1, 2):
        raise PreconditionError("delta must lie in (0, 1/2)")
    n = len(y)
    H = max(abs(v) for v in y)
    h = next(i for i, v in enumerate(y) if abs(v) == H)
    if H ** n > max_centers:
        raise BudgetError(f"{H}^{n} centers exceed {max_centers}")
    norm2 = sum(v * v for v in y)
    radius_sq = (1 - 2 * delta) ** 2 / (4 * norm2)
    centers = []
    for j in np.ndindex(*(H,) * n):
        others = {i: j[i] for i in range(n) if i != h}
        t = _grid_offset(y, h, H, others)
        if not 0 <= t < Fraction(1, H):
            raise InvariantError("offset outside [0, 1/H)")
        centers.append(tuple(Fraction(j[i], H) + (t if i == h else 0) for i in range(n)))
    g = GridSet(y, delta, h, H, centers, radius_sq)
    verify_grid(g, sample=sample, seed=seed)
    return g


def verify_grid(g: GridSet, sample: int = 1000, seed: int = 0, pair_cap: int = 1500) -> None:
    half = Fraction(1, 2)
    for w in g.centers:
        if _norm_int(_dot(g.y, w)) != half:
            raise InvariantError(f"||y.w|| != 1/2 at {w}")
    # spacing: exact on integer coordinates over the common denominator
    cs = g.centers if len(g.centers) <= pair_cap else random.Random(seed).sample(g.centers, pair_cap)
    D = math.lcm(*(v.denominator for c in cs for v in c))
    P = np.array([[int(v * D) for v in c] for c in cs], dtype=object)
    need = Fraction(D * D, g.H * g.H)
    for a in range(len(P)):
        d2 = ((P[a + 1:] - P[a]) ** 2).sum(axis=1) if a + 1 < len(P) else []
        for v in d2:
            if v < need:
                raise InvariantError("two centers closer than 1/H")
    rng = random.Random(seed)
    n = len(g.y)
    r = g.radius
    for _ in range(sample):
        d = [rng.gauss(0.0, 1.0) for _ in range(n)]
        s = math.sqrt(sum(v * v for v in d)) or 1.0
        scale = r * rng.uniform(0.9, 0.999999)
        v = [Fraction(c / s * scale) for c in d]
        if _dist2(v, [0] * n) >= g.radius_sq:
            continue
        if not abs(_dot(g.y, v)) < half - g.delta:
            raise InvariantError("|y.v| >= 1/2 - delta inside the ball")
        w = g.centers[rng.randrange(len(g.centers))]
        if not _norm_int(_dot(g.y, [a + b for a, b in zip(w, v)])) > g.delta:
            raise InvariantError("||y.(w + v)|| <= delta inside a ball")


def _ball_inside(c1, r1_sq: Fraction, c2, r2_sq: Fraction) -> bool:
    """Whether B(c2, r2) lies in B(c1, r1): r1 >= |c1 - c2| + r2, decided with squares."""
    d2 = _dist2(c1, c2)
    if r2_sq > r1_sq:
        return False
    base = r1_sq - d2 - r2_sq
    return base >= 0 and base * base >= 4 * d2 * r2_sq


@dataclass
class GridChain:
    ys: list
    delta: Fraction
    centers: list
    radii_sq: list

    @property
    def x(self) -> tuple:
        return self.centers[-1]

    def margins(self) -> list[Fraction]:
        return [_norm_int(_dot(y, self.x)) for y in self.ys]


def growth_subsequence(ys: Sequence[Sequence[int]], ratio) -> list[tuple]:
    """Greedy subsequence with |y_{k+1}|_2 >= ratio |y_k|_2."""
    ratio = as_fraction(ratio)
    out = []
    for y in ys:
        y = tuple(int(v) for v in y)
        if not out or sum(v * v for v in y) >= ratio ** 2 * sum(v * v for v in out[-1]):
            out.append(y)
    return out


def grid_chain(ys: Sequence[Sequence[int]], delta, max_centers: int = 10 ** 7) -> GridChain:
    """Nested balls: each level picks the center of the next grid nearest the current one."""
    delta = as_fraction(delta)
    ys = [tuple(int(v) for v in y) for y in ys]
    if not ys:
        raise PreconditionError("empty vector sequence")
    n = len(ys[0])
    R = 4 * n / (1 - 2 * delta) + 1
    for a, b in zip(ys, ys[1:]):
        if sum(v * v for v in b) < R ** 2 * sum(v * v for v in a):
            raise HypothesisFail(f"|y_(k+1)|/|y_k| < 4n/(1-2 delta)+1 = {fmt(R)} at {a} -> {b}")
    centers, radii = [], []
    for y in ys:
        H = max(abs(v) for v in y)
        h = next(i for i, v in enumerate(y) if abs(v) == H)
        r2 = (1 - 2 * delta) ** 2 / (4 * sum(v * v for v in y))
        g = GridSet(y, delta, h, H, [], r2)
        w = g.center([0] * n) if not centers else g.nearest(centers[-1])
        if centers and not _ball_inside(centers[-1], radii[-1], w, r2):
            raise InvariantError(f"no ball of the grid for {y} inside the previous ball")
        if _norm_int(_dot(y, w)) != Fraction(1, 2):
            raise InvariantError("chain center off the half-integer set")
        centers.append(w)
        radii.append(r2)
    chain = GridChain(ys, delta, centers, radii)
    if any(mg <= delta for mg in chain.margins()):
        raise InvariantError("chain point violates ||y_k.x|| > delta")
    return chain


# ---------------------------------------------------------------------------
# transference


def transference_constant(n: int, m: int, delta=None):
    """delta / (2n (2m/delta)^(m/n)) as an exact sympy number; delta -> 1/2 gives (4n)^-1 (4m)^(-m/n)."""
    import sympy as sp

    n_, m_ = sp.Integer(n), sp.Integer(m)
    if delta is None:
        d = sp.Symbol("delta", positive=True)
        expr = d / (2 * n_ * (2 * m_ / d) ** (m_ / n_))
        return sp.nsimplify(sp.limit(expr, d, sp.Rational(1, 2)))
    d = sp.Rational(str(as_fraction(delta)))
    return sp.nsimplify(d / (2 * n_ * (2 * m_ / d) ** (m_ / n_)))


@dataclass
class TransferenceCertificate:
    k: int
    y: tuple
    q: tuple
    x: tuple
    delta: Fraction
    lower_bound_pow: Fraction      # (delta / (2n (2m/delta)^(m/n)))^n
    lower_bound: float
    value_pow: RatInterval         # |q|^m ||Aq - x||^n
    slack_pow: RatInterval         # value_pow - lower_bound_pow
    inequality_margin: RatInterval  # n|y| ||Aq - x|| + m|q| M(y) - ||y.x||
    m_hypothesis_verified: bool
    lower_bound_exact: Optional[Fraction] = None  # available when n = 1

    def to_json(self) -> dict:
        return {"k": self.k + 1, "y": list(self.y), "q": list(self.q), "x": [fmt(v) for v in self.x],
                "delta": fmt(self.delta), "lower_bound_pow": fmt(self.lower_bound_pow),
                "lower_bound": self.lower_bound, "slack_pow": list(self.slack_pow.as_strings()),
                "inequality_margin_lo": float(self.inequality_margin.lo),
                "m_hypothesis_verified": self.m_hypothesis_verified}


def transference_certificate(A: MatrixSpec, bas: BestApproxSeq, delta, q: Sequence[int],
                             x: Sequence) -> TransferenceCertificate:
    """Certify |q|^(m/n) ||Aq - x|| >= delta / (2n (2m/delta)^(m/n)) for one q.

    k is fixed by Y_k <= (2m/delta)^(m/n) |q|^(m/n) < Y_{k+1}; comparisons are
    made on n-th powers so they stay rational.
    """
    n, m = A.n, A.m
    delta = as_fraction(delta)
    q = tuple(int(v) for v in q)
    x = tuple(as_fraction(v) for v in x)
    if len(q) != m or len(x) != n or not any(q):
        raise PreconditionError("q must be a non-zero integer m-vector and x a rational n-vector")
    Q = max(abs(v) for v in q)
    k = bas.index_for((2 * m / delta) ** m * Q ** m, n)
    if k is None:
        raise PreconditionError(f"|q| = {Q} selects an index beyond the computed sequence (Y_max = {bas.Y_max})")
    yk = bas.items[k].y
    Yk, Ynext = bas.items[k].Y, bas.items[k + 1].Y
    if _norm_int(_dot(yk, x)) < delta:
        raise HypothesisFail(f"||y_k.x|| < delta for y_k = {yk}")
    fr = FormFrame(A)
    Mk = fr.M(yk)
    # M(y_k) <= Y_{k+1}^(-n/m)  <=>  M^m Y_{k+1}^n <= 1
    verified = Mk.hi ** m * Ynext ** n <= 1
    lb_pow = delta ** n / ((2 * n) ** n * (2 * m / delta) ** m)
    lb = float(delta) / (2 * n * (2 * m / float(delta)) ** (m / n))
    dist = fr.shifted(q, x)
    value_pow = dist.pow(n) * (Q ** m)
    slack = value_pow - lb_pow
    margin = dist * (n * Yk) + Mk * (m * Q) - _norm_int(_dot(yk, x))
    if margin.hi < 0:
        raise InvariantError("the linear-form inequality fails")
    if verified and slack.hi < 0:
        raise InvariantError(f"transference bound fails at q = {q}")
    return TransferenceCertificate(k, yk, q, x, delta, lb_pow, lb, value_pow, slack, margin, verified,
                                    lb_pow if n == 1 else None)


def admissible_intervals(ys: Sequence[int], delta) -> list[tuple[Fraction, Fraction]]:
    """Closed intervals of x in [0, 1] with ||y x|| >= delta for every y in ys (one variable)."""
    delta = as_fraction(delta)
    cur = [(Fraction(0), Fraction(1))]
    for y in ys:
        y = abs(int(y))
        if y == 0:
            raise PreconditionError("y must be non-zero")
        nxt = []
        for lo, hi in cur:
            for p in range(math.floor(lo * y) - 1, math.ceil(hi * y) + 1):
                a, b = max(lo, (p + delta) / y), min(hi, (p + 1 - delta) / y)
                if a <= b:
                    nxt.append((a, b))
        cur = nxt
        if not cur:
            break
    return cur


def admissible_point(ys: Sequence[int], delta) -> Fraction:
    """Midpoint of the longest admissible interval."""
    ivs = admissible_intervals(ys, delta)
    if not ivs:
        raise HypothesisFail(f"no x has ||y x|| >= {fmt(as_fraction(delta))} for all given y")
    lo, hi = max(ivs, key=lambda t: t[1] - t[0])
    return (lo + hi) / 2
