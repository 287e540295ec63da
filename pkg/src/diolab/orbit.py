"""Fast exact positions of orbit points j*alpha mod 1.

alpha is replaced by a convergent P/D with q_{K+1} > max|j|, so that
|j alpha - j P/D| < 1/D for every j used.  The residue r_j = j P mod D then
places j alpha inside (r_j - 1, r_j + 1)/D, and all comparisons reduce to
integer comparisons against thresholds scaled by D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cf import RealNumberSpec, p_of, q_of
from .errors import InvariantError, PrecisionError, PreconditionError
from .interval import RatInterval

_INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class ResidueFrame:
    P: int
    D: int
    jmax: int

    def residues(self, js) -> np.ndarray:
        js = np.asarray(js)
        if self.jmax * self.P < _INT64_SAFE and self.D < _INT64_SAFE:
            return np.mod(js.astype(np.int64) * np.int64(self.P), np.int64(self.D))
        return np.array([(int(j) * self.P) % self.D for j in js], dtype=object)

    def residue(self, j: int) -> int:
        return (j * self.P) % self.D


def residue_frame(x: RealNumberSpec, jmax: int, resolution: int) -> ResidueFrame:
    """Frame valid for |j| <= jmax, with denominator D >= resolution."""
    if x.is_rational:
        raise PreconditionError("orbit residues need an irrational alpha")
    K = 0
    while not (q_of(x, K) >= resolution and q_of(x, K + 1) > jmax):
        K += 1
    return ResidueFrame(P=p_of(x, K), D=q_of(x, K), jmax=jmax)


def sorted_orbit(x: RealNumberSpec, N: int) -> tuple[list[int], np.ndarray, ResidueFrame]:
    """Indices 1..N sorted by the position of j*alpha on [0, 1), certified.

    Returns (order, sorted residues, frame).  Raises PrecisionError if two
    points are not separated by the frame error.
    """
    D_min = 64 * N * N + 64
    for _ in range(6):
        fr = residue_frame(x, N, D_min)
        js = np.arange(1, N + 1)
        r = fr.residues(js)
        order = np.argsort(r, kind="stable")
        rs = r[order]
        gaps_ok = bool(np.all(np.diff(rs) >= 3)) if N > 1 else True
        wrap_ok = int(rs[0]) >= 2 and int(rs[-1]) <= fr.D - 2 and (N == 1 or fr.D - int(rs[-1]) + int(rs[0]) >= 3)
        if gaps_ok and wrap_ok:
            return [int(j) for j in js[order]], rs, fr
        D_min *= 2 ** 20
    raise PrecisionError(f"cannot certify the order of {N} orbit points")


def arc_test(x: RealNumberSpec, start_index: int, direction: int, length: RatInterval,
             ms, fr: ResidueFrame | None = None) -> np.ndarray:
    """For each m in ``ms``: 1 if m*alpha lies in the open arc starting at
    start_index*alpha, running in ``direction`` for ``length``; 0 if not;
    -1 if undecided at the frame precision.
    """
    ms = np.asarray(ms)
    if ms.size == 0:
        return np.zeros(0, dtype=np.int8)
    jmax = int(np.max(np.abs(ms - start_index))) + 1
    if fr is None:
        res = max(2 ** 20 * (length.lo.denominator // max(length.lo.numerator, 1) + 1), 2 ** 24)
        fr = residue_frame(x, jmax, res)
    js = (ms - start_index) * direction
    if isinstance(js, np.ndarray) and js.dtype != object:
        r = fr.residues(np.abs(js))
        r = np.where(js < 0, np.mod(-r, fr.D), r)
    else:
        r = np.array([(int(j) * fr.P) % fr.D for j in js], dtype=object)
    t_in = math.floor(length.lo * fr.D) - 1
    t_out = math.ceil(length.hi * fr.D) + 1
    out = np.full(ms.shape, -1, dtype=np.int8)
    out[(r >= 1) & (r <= t_in)] = 1
    out[(r >= t_out) & (r <= fr.D - 1)] = 0
    return out


def check_frame(fr: ResidueFrame, x: RealNumberSpec) -> None:
    """|alpha - P/D| < 1/(D*jmax) must hold (the frame's error guarantee)."""
    from .cf import alpha_enclosure

    a = alpha_enclosure(x, Fraction(1, fr.D * fr.D * (fr.jmax + 1) * 4))
    err = max(abs(a.lo - Fraction(fr.P, fr.D)), abs(a.hi - Fraction(fr.P, fr.D)))
    if not err * fr.jmax * fr.D < 1:
        raise InvariantError("residue frame error bound violated")
