import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from diolab.cf import RealNumberSpec, expand_cf
from diolab.errors import HypothesisFail, PreconditionError, RankSuspect
from diolab.matrix import (FormFrame, MatrixSpec, admissible_intervals, admissible_point, best_approx_sequence,
                           check_minimality, grid_chain, grid_set, growth_subsequence, matrix_dirichlet_density,
                           transference_certificate, transference_constant)
from diolab.singular import singular_average_density

from conftest import ORACLES, mp_alpha, mp_dist, mp_of


def oracle_best_approx(rows, Y_max):
    """Exhaustive mpmath enumeration of the sup-norm best approximation sequence.

    rows: n x m matrix of oracle names; M(y) = max_j ||sum_i a_ij y_i||.
    """
    A = [[mp_alpha(name) for name in r] for r in rows]
    n, m = len(A), len(A[0])
    pts = []
    for y in itertools.product(range(-Y_max, Y_max + 1), repeat=n):
        nz = [v for v in y if v]
        if not nz or nz[0] < 0:
            continue
        M = max(mp_dist(sum(A[i][j] * y[i] for i in range(n))) for j in range(m))
        pts.append((max(abs(v) for v in y), y, M))
    pts.sort(key=lambda t: (t[0], t[1]))
    out, rec = [], None
    for Y, grp in itertools.groupby(pts, key=lambda t: t[0]):
        grp = list(grp)
        best = min(grp, key=lambda t: t[2])
        if rec is None or best[2] < rec:
            rec = best[2]
            out.append((best[1], Y))
    return out


def distinct_denominators(alpha, Y):
    seq = expand_cf(alpha, 60)
    return sorted({seq.qk(k) for k in range(len(seq.a)) if seq.qk(k) <= Y})


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_one_dimensional_matches_convergents(fx, name):
    a = fx[name]
    seq = best_approx_sequence(MatrixSpec.column(a), 2000)
    assert seq.Ys == distinct_denominators(a, 2000)


@pytest.mark.parametrize("rows", [
    [["sqrt2m1"], ["sqrt3m1"]],
    [["golden"], ["sqrt7m2"]],
    [["sqrt2m1", "sqrt3m1"]],
])
def test_matches_exhaustive_oracle(fx, rows):
    A = MatrixSpec.from_rows([[fx[name] for name in r] for r in rows])
    Y_max = 50 if A.n == 2 else 300
    seq = best_approx_sequence(A, Y_max)
    assert [(it.y, it.Y) for it in seq.items] == oracle_best_approx(rows, Y_max)
    assert check_minimality(A, seq) >= 0


def test_two_by_one_known_sequence(fx):
    A = MatrixSpec.column(fx["sqrt2m1"], fx["sqrt3m1"])
    assert best_approx_sequence(A, 400).Ys == [1, 2, 3, 5, 21, 25, 35, 71, 312, 370]


def test_sequence_json_round_trip(fx):
    A = MatrixSpec.row(fx["golden"], fx["em2"])
    assert MatrixSpec.from_json(A.to_json()) == A
    seq = best_approx_sequence(A, 20)
    doc = seq.to_json()
    assert [it["Y"] for it in doc["items"]] == seq.Ys
    assert {"i", "Y", "y1", "M_lo", "M_hi"} <= set(seq.rows()[0])


def test_enumeration_budget(fx):
    from diolab.errors import BudgetError

    with pytest.raises(BudgetError):
        best_approx_sequence(MatrixSpec.column(fx["golden"], fx["em2"]), 10 ** 4, budget=10 ** 6)


def test_rank_suspect_on_rational_entry():
    A = MatrixSpec.column(RealNumberSpec.rational(Fraction(1, 2)))
    with pytest.raises(RankSuspect):
        FormFrame(A).M((2,))


def test_one_dimensional_density_matches_scalar(fx):
    a = fx["sqrt2m1"]
    mat = matrix_dirichlet_density(MatrixSpec.column(a), Fraction(1, 4), 16)
    sc = singular_average_density(a, Fraction(1, 4), 16)
    assert mat.bad_ell == sc.bad_ell and not mat.truncated


# --- grids --------------------------------------------------------------------------


def exact_dot_dist(y, x):
    s = sum(v * Fraction(c) for v, c in zip(y, x))
    return abs(s - round(s))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-12, 12), min_size=2, max_size=3).filter(any),
       st.sampled_from([Fraction(1, 4), Fraction(1, 3), Fraction(2, 5)]))
def test_grid_identities(y, delta):
    g = grid_set(y, delta, sample=100)
    H = max(abs(v) for v in y)
    assert len(g.centers) == H ** len(y)
    for w in g.centers[:50]:
        assert exact_dot_dist(y, w) == Fraction(1, 2)
    assert g.radius_sq == (1 - 2 * delta) ** 2 / (4 * sum(v * v for v in y))


def test_grid_small_example():
    g = grid_set([2, 1], Fraction(1, 4))
    assert g.h == 0 and g.H == 2
    assert g.centers[0] == (Fraction(1, 4), Fraction(0))
    with pytest.raises(PreconditionError):
        grid_set([0, 0], Fraction(1, 4))


def test_chain_point():
    chain = grid_chain([[1], [29], [408]], Fraction(1, 4))
    assert all(m > Fraction(1, 4) for m in chain.margins())
    assert chain.x == (Fraction(407, 816),)
    with pytest.raises(HypothesisFail):
        grid_chain([[1], [2]], Fraction(1, 4))


def test_growth_subsequence():
    ys = [(1, 0), (1, 1), (3, 2), (20, 5), (21, 6), (300, 1)]
    assert growth_subsequence(ys, 9) == [(1, 0), (20, 5), (300, 1)]


# --- transference ---------------------------------------------------------------------


@pytest.mark.parametrize("n,m", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2)])
def test_transference_constant_limit(n, m):
    expect = sp.Rational(1, 4 * n) * sp.Integer(4 * m) ** sp.Rational(-m, n)
    assert sp.simplify(transference_constant(n, m) - expect) == 0
    assert transference_constant(1, 1) == sp.Rational(1, 16)


def test_admissible_point_bounds():
    ys = [1, 2, 5, 12, 29, 70, 169]
    assert admissible_intervals(ys, Fraction(1, 3)) == []
    with pytest.raises(HypothesisFail):
        admissible_point(ys, Fraction(1, 3))
    x = admissible_point(ys, Fraction(1, 4))
    for y in ys:
        d = y * x - round(y * x)
        assert abs(d) >= Fraction(1, 4)


def test_certificates_against_direct_values(fx):
    a = fx["sqrt2m1"]
    A = MatrixSpec.column(a)
    bas = best_approx_sequence(A, 20000)
    delta = Fraction(1, 4)
    x = admissible_point(bas.Ys, delta)
    al = mp_alpha("sqrt2m1")
    for q in random.Random(3).sample(range(1, 1500), 120):
        cert = transference_certificate(A, bas, delta, (q,), (x,))
        assert cert.m_hypothesis_verified
        direct = q * mp_dist(q * al - mp_of(x))
        assert direct >= mp_of(cert.lower_bound_exact)
        assert cert.inequality_margin.hi >= 0


def test_certificate_rejects_out_of_range(fx):
    A = MatrixSpec.column(fx["sqrt2m1"])
    bas = best_approx_sequence(A, 30)
    with pytest.raises(PreconditionError):
        transference_certificate(A, bas, Fraction(1, 4), (10 ** 6,), (Fraction(1, 3),))
