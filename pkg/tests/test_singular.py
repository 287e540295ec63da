import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diolab.cf import a_of, parse_alpha, q_of
from diolab.errors import PreconditionError
from diolab.singular import (block_of_scale, check_block_structure, check_converse, dirichlet_solvable, ell_range,
                             growth_stats, heaviness_stat, heaviness_sweep, nonsingular_witness,
                             singular_average_density)

from conftest import mp_alpha, mp_dist, mp_of

QUARTER = Fraction(1, 4)


def mp_solvable(name, c, ell):
    al = mp_alpha(name)
    thr = mp_of(Fraction(c)) / 2 ** ell
    return any(mp_dist(q * al) <= thr for q in range(1, 2 ** ell + 1))


@pytest.mark.parametrize("name", ["golden", "sqrt2m1", "growing", "nonheavy_bounded"])
def test_solvability_matches_mpmath(fx, name):
    for ell in range(0, 12):
        assert dirichlet_solvable(fx[name], QUARTER, ell) == mp_solvable(name, QUARTER, ell), ell


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["golden", "sqrt2m1", "sqrt3m1", "growing", "em2"]),
       st.fractions(min_value=Fraction(1, 64), max_value=Fraction(1, 2), max_denominator=64),
       st.integers(0, 16))
def test_fast_and_brute_agree(name, c, ell):
    a = parse_alpha(name)
    assert dirichlet_solvable(a, c, ell) == dirichlet_solvable(a, c, ell, brute=True)


def test_blocks_tile_the_scales(fx):
    a = fx["sqrt2m1"]
    for ell in range(1, 60):
        k = block_of_scale(a, ell)
        assert q_of(a, k) <= 2 ** ell < q_of(a, k + 1)
        lo, hi = ell_range(a, k)
        assert lo <= ell <= hi


@pytest.mark.parametrize("name", ["golden", "nonheavy_bounded", "sqrt2m1"])
def test_block_structure(fx, name):
    rep = singular_average_density(fx[name], QUARTER, 120)
    check_block_structure(rep)
    assert all(len(b.unsolvable) <= 3 for b in rep.blocks)
    assert rep.solvable_count + len(rep.bad_ell) == rep.N


def test_golden_is_never_singular_on_average(fx):
    rep = singular_average_density(fx["golden"], QUARTER, 80)
    assert rep.density < Fraction(1, 10)


def test_growing_density_increases(fx):
    a = fx["growing"]
    vals = [singular_average_density(a, QUARTER, N).density for N in (60, 90, 120)]
    assert vals[0] < vals[1] < vals[2]


def test_density_rows_and_json(fx):
    rep = singular_average_density(fx["sqrt2m1"], QUARTER, 30)
    rows = rep.rows()
    assert [r["ell"] for r in rows] == list(range(1, 31))
    assert sum(r["solvable"] for r in rows) == rep.solvable_count
    assert rep.to_json()["N"] == 30


@pytest.mark.parametrize("name", ["golden", "nonheavy_bounded"])
def test_converse_scales_unsolvable(fx, name):
    ells = check_converse(fx[name], 40)
    assert len(ells) >= 15
    for ell in [e for e in ells if e <= 14]:
        assert not mp_solvable(name, QUARTER, ell)


def test_growth_stats_golden(fx):
    gs = growth_stats(fx["golden"], 200)
    limit = math.log((1 + math.sqrt(5)) / 2)
    assert abs(float(gs.log_qk_over_k[-1]) - limit) < 0.01
    assert len(gs.rows()) == 200


def test_growth_stats_growing_unbounded(fx):
    gs = growth_stats(fx["growing"], 60)
    vals = [float(v) for v in gs.log_qk_over_k]
    assert vals[-1] > vals[20] > vals[5]


def test_heaviness(fx):
    a = fx["nonheavy_bounded"]
    N = 64
    manual = sum(max(math.log(Fraction(1, 10) * a_of(a, k)), 0) for k in range(1, N + 1)) / N
    assert heaviness_stat(a, Fraction(1, 10), N) == pytest.approx(manual, rel=1e-12)
    assert heaviness_stat(fx["golden"], Fraction(1, 2), N) == 0
    rows = heaviness_sweep(a, Fraction(1, 10), [Fraction(1, 10), Fraction(1, 1000)], N)
    assert rows[1]["value"] <= rows[0]["value"]
    with pytest.raises(PreconditionError):
        heaviness_stat(a, 0, N)


@pytest.mark.parametrize("name", ["golden", "sqrt2m1", "growing"])
def test_nonsingular_witness(fx, name):
    for k in range(2, 12):
        w = nonsingular_witness(fx[name], k)
        thr = mp_of(w.c / w.X)
        al = mp_alpha(name)
        if w.X <= 5000:
            assert all(mp_dist(q * al) > thr for q in range(1, w.X + 1))
