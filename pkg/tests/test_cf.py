from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from diolab.cf import (RealNumberSpec, a_of, alpha_enclosure, expand_cf, orbit_point, parse_alpha, q_of,
                       qdist, signed_residual)
from diolab.errors import PrecisionError, PreconditionError
from diolab.interval import RatInterval, as_fraction, fmt, sqrt_enclosure
from diolab.orbit import residue_frame, sorted_orbit

from conftest import ORACLES, mp_alpha, mp_dist, mp_frac, mp_of

IRRATIONAL = sorted(ORACLES)


# --- intervals -----------------------------------------------------------------

def test_as_fraction_parses_exactly():
    assert as_fraction("3/7") == Fraction(3, 7)
    assert as_fraction("0.1") == Fraction(1, 10)
    assert as_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(TypeError):
        as_fraction(object())


@given(st.fractions(), st.fractions(), st.fractions(), st.fractions())
def test_interval_arithmetic_contains_pointwise_results(a, b, c, d):
    I = RatInterval.hull(a, b)
    J = RatInterval.hull(c, d)
    for x in (a, b):
        for y in (c, d):
            assert x + y in I + J
            assert x - y in I - J
            assert x * y in I * J


@given(st.fractions(min_value=-5, max_value=5), st.fractions(min_value=0, max_value=1))
def test_dist_to_int_encloses_every_point(z, w):
    I = RatInterval(z, z + w)
    D = I.dist_to_int()
    for t in (z, z + w, z + w / 2):
        assert D.lo <= abs(t - round(t)) <= D.hi


def test_sqrt_enclosure_brackets():
    e = sqrt_enclosure(2)
    assert e.lo ** 2 < 2 < e.hi ** 2
    assert e.width < Fraction(1, 2 ** 100)


def test_fmt_uses_p_over_q():
    assert fmt(Fraction(-3, 4)) == "-3/4"
    assert fmt(Fraction(5)) == "5"


# --- continued fractions ----------------------------------------------------------

def test_sqrt2_convergents(fx):
    seq = expand_cf(fx["sqrt2m1"], 4)
    assert list(seq.a) == [0, 2, 2, 2, 2]
    assert [seq.qk(k) for k in range(5)] == [1, 2, 5, 12, 29]


def test_rational_terminates():
    seq = expand_cf(RealNumberSpec.rational(Fraction(1, 2)), 5)
    assert list(seq.a) == [0, 2]
    assert seq.terminated


def test_golden_fibonacci(fx):
    seq = expand_cf(fx["golden"], 6)
    assert [seq.qk(k) for k in range(7)] == [1, 1, 2, 3, 5, 8, 13]


def test_nonheavy_terms(fx):
    a = fx["nonheavy_bounded"]
    assert [a_of(a, k) for k in range(1, 9)] == [3, 9, 1, 81, 1, 1, 1, 3 ** 8]


def test_growing_factorial_bound(fx):
    import math
    a = fx["growing"]
    for k in range(1, 30):
        assert a_of(a, k) == k
        assert q_of(a, k) >= math.factorial(k)


@pytest.mark.parametrize("name", IRRATIONAL)
def test_recurrence_and_determinant_identities(fx, name):
    K = 40 if name == "superexp" else 200
    expand_cf(fx[name], K).check()


@pytest.mark.parametrize("name", IRRATIONAL)
def test_convergent_gap_bound(fx, name):
    a = fx[name]
    # at k = 1 with a_1 = 1 the nearest integer to alpha is 1, not p_0 = 0
    for k in range(1 if a_of(a, 1) > 1 else 2, 25):
        d = qdist(a, q_of(a, k - 1), Fraction(1, 10 ** 40) / q_of(a, k))
        assert Fraction(1, 2 * q_of(a, k)) < d.lo and d.hi < Fraction(1, q_of(a, k))


@pytest.mark.parametrize("name", IRRATIONAL)
def test_residual_signs_alternate(fx, name):
    a = fx[name]
    for k in range(0, 12):
        r = signed_residual(a, k)
        assert (r.lo > 0) == (k % 2 == 0) and (r.hi < 0) == (k % 2 == 1)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(IRRATIONAL), st.integers(min_value=1, max_value=10 ** 12))
def test_qdist_contains_oracle(name, q):
    a = parse_alpha(name)
    budget = Fraction(1, 10 ** 15)
    d = qdist(a, q, budget)
    assert d.width <= budget
    ref = mp_dist(q * mp_alpha(name))
    assert mp_of(d.lo) <= ref <= mp_of(d.hi)


def test_qdist_examples(fx):
    d = qdist(fx["sqrt2m1"], 5, Fraction(1, 10 ** 6))
    assert d.lo < Fraction(710678, 10 ** 7) < d.hi + Fraction(1, 10 ** 7)
    g = qdist(fx["golden"], 1, Fraction(1, 10 ** 3))
    assert mp_of(g.lo) <= (3 - mpmath.sqrt(5)) / 2 <= mp_of(g.hi)


def test_orbit_point_examples(fx):
    p = orbit_point(fx["sqrt2m1"], 2, Fraction(1, 10 ** 6))
    assert mp_of(p.lo) <= mp_frac(2 * mp_alpha("sqrt2m1")) <= mp_of(p.hi)
    p = orbit_point(fx["golden"], 3, Fraction(1, 10 ** 6))
    assert mp_of(p.lo) <= mp_frac(3 * mp_alpha("golden")) <= mp_of(p.hi)
    assert orbit_point(RealNumberSpec.rational(Fraction(1, 3)), 3).is_exact


def test_alpha_enclosure_width(fx):
    e = alpha_enclosure(fx["em2"], Fraction(1, 10 ** 50))
    assert e.width <= Fraction(1, 10 ** 50)
    assert mp_of(e.lo) <= mp_alpha("em2") <= mp_of(e.hi)


def test_depth_cap(fx, monkeypatch):
    monkeypatch.setenv("DIOLAB_MAX_DEPTH", "30")
    with pytest.raises(PrecisionError):
        q_of(fx["golden"], 60)


def test_json_round_trip(fx):
    for a in fx.values():
        assert RealNumberSpec.from_json(a.to_json()) == a
    assert parse_alpha('{"kind": "quadratic", "preperiod": [0], "period": [2]}').period == (2,)


def test_bad_spec_rejected():
    with pytest.raises(PreconditionError):
        RealNumberSpec("quadratic", preperiod=(0,), period=())


# --- orbit frames -------------------------------------------------------------------

def test_residue_frame_matches_oracle(fx):
    a = fx["sqrt3m1"]
    fr = residue_frame(a, 5000, 2 ** 40)
    ref = mp_alpha("sqrt3m1")
    for j in (1, 17, 999, 5000):
        approx = mpmath.mpf(fr.residue(j)) / fr.D
        assert abs(approx - mp_frac(j * ref)) < mpmath.mpf(2) / fr.D


def test_sorted_orbit_is_sorted(fx):
    order, res, fr = sorted_orbit(fx["golden"], 200)
    assert sorted(order) == list(range(1, 201))
    assert all(res[i] < res[i + 1] for i in range(len(res) - 1))
