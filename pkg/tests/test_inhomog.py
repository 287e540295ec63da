from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from diolab.cf import parse_alpha, q_of
from diolab.circle import CirclePoint
from diolab.errors import HypothesisFail, PreconditionError
from diolab.inhomog import (CertifiedOut, TentativelyIn, bad_membership, check_onesided_lemmas, emptiness_descent,
                            triangle_bound_holds, liminf_scan, one_sided_build)

from conftest import mp_alpha, mp_dist, mp_of


def brute_min(name, x, q_lo, q_hi, mode):
    al = mp_alpha(name)
    xv = mp_of(Fraction(x))
    best = None
    for q in range(q_lo, q_hi + 1):
        vals = [q * mp_dist(q * al - xv)]
        if mode == "two_sided":
            vals.append(q * mp_dist(q * al + xv))
        for v in vals:
            if best is None or v < best:
                best = v
    return best


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["golden", "sqrt2m1", "growing", "em2"]),
       st.fractions(min_value=0, max_value=1, max_denominator=97),
       st.integers(1, 40), st.sampled_from(["two_sided", "positive"]))
def test_scan_matches_brute_force(name, x, q_lo, mode):
    a = parse_alpha(name)
    q_hi = q_lo + 400
    s = liminf_scan(a, x, q_lo, q_hi, mode)
    ref = brute_min(name, x, q_lo, q_hi, mode)
    assert mp_of(s.min_value.lo) - mpmath.mpf(10) ** -30 <= ref <= mp_of(s.min_value.hi) + mpmath.mpf(10) ** -30
    assert q_lo <= abs(s.argmin) <= q_hi


def test_golden_half_minimum(fx):
    s = liminf_scan(fx["golden"], Fraction(1, 2), 1, 1000)
    assert abs(s.argmin) == 4
    assert abs(float(s.min_value.lo) - 0.11146) < 1e-4


def test_orbit_point_gives_zero(fx):
    s = liminf_scan(fx["sqrt2m1"], CirclePoint(7, Fraction(0)), 1, 100, "positive")
    assert s.argmin == 7 and s.min_value.hi == 0


def test_threshold_trace_is_sorted(fx):
    s = liminf_scan(fx["sqrt2m1"], Fraction(1, 3), 1, 10 ** 5, threshold=Fraction(1, 4))
    qs = [abs(q) for q, _ in s.trace]
    assert qs == sorted(qs)
    assert all(v.lo < Fraction(1, 4) for _, v in s.trace)


def test_scan_rejects_bad_input(fx):
    with pytest.raises(PreconditionError):
        liminf_scan(fx["golden"], Fraction(1, 3), 5, 2)
    with pytest.raises(PreconditionError):
        liminf_scan(fx["golden"], Fraction(1, 3), 1, 2, mode="sideways")


def test_bad_membership_outcomes(fx):
    a = fx["golden"]
    out = bad_membership(a, Fraction(1, 2), Fraction(1, 4), 3, 10 ** 4)
    assert isinstance(out, CertifiedOut)
    tent = bad_membership(a, Fraction(1, 2), Fraction(1, 1000), 3, 10 ** 4)
    assert isinstance(tent, TentativelyIn) and not tent.certified
    with pytest.raises(PreconditionError):
        bad_membership(a, Fraction(1, 2), Fraction(1, 4), 10, 5)


def test_one_sided_chain_passes_lemma_checks(fx):
    ots = one_sided_build(fx["growing"], Fraction(1, 25), 40, 4)
    assert len(ots.generations) == 5
    for g in ots.generations[:-1]:
        rep = check_onesided_lemmas(ots, g.k)
        assert rep.ok, rep.failures
        assert all(m.lo > 0 for m in rep.margins_a)
        assert rep.containment_margin.lo > 0
    assert ots.x is not None


def test_one_sided_small_level_exhaustive(fx):
    # a constant gamma lets the chain start low enough for a direct check of every n
    ots = one_sided_build(fx["growing"], Fraction(1, 25), 5, 2, gamma_rule=lambda _: Fraction(1, 10))
    for k in (5, 6):
        rep = check_onesided_lemmas(ots, k, exhaustive_cap=10 ** 5)
        assert rep.ok and rep.exhaustive_checked > 0


def test_one_sided_point_scan(fx):
    a = fx["growing"]
    ots = one_sided_build(a, Fraction(1, 25), 5, 2, gamma_rule=lambda _: Fraction(1, 10))
    qK = q_of(a, 5)
    s = liminf_scan(a, ots.x, qK + 1, q_of(a, ots.x_level - 1), "positive")
    assert s.min_value.lo > 0


def test_one_sided_golden_fails_hypothesis(fx):
    with pytest.raises(HypothesisFail):
        one_sided_build(fx["golden"], Fraction(1, 25), 5, 3)


@pytest.mark.parametrize("x", [Fraction(1, 3), Fraction(2, 7), Fraction(5, 11), Fraction(99, 101)])
def test_descent_refutes_large_constant(fx, x):
    tr = emptiness_descent(fx["growing"], Fraction(3, 10), x, Fraction(1, 100))
    assert tr.max_segment_steps <= 34
    if tr.outcome == "witness":
        assert tr.witness_beyond_K
        assert tr.witness_value.hi < Fraction(3, 10)


def test_descent_precondition(fx):
    with pytest.raises(PreconditionError):
        emptiness_descent(fx["growing"], Fraction(1, 4), Fraction(1, 3), Fraction(1, 100))


@pytest.mark.parametrize("y,k", [(3, 5), (7, 2), (12, 29), (1, 1)])
def test_triangle_inequality_helper(fx, y, k):
    assert triangle_bound_holds(fx["sqrt2m1"], Fraction(1, 3), y, k)
