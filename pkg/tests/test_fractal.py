import io
import json
import math
from fractions import Fraction

import pytest

from diolab.cf import q_of
from diolab.errors import PreconditionError
from diolab.fractal import (bad_cover_pipeline, box_dimension_estimate, cantor_middle_thirds, cover_stats_rows,
                            erdos_taylor_cover, et_constant, export_cover_jsonl, mass_dist_from_stats,
                            mass_dist_lower_bound, mass_dist_trend, phi_subsequence, sparse_times,
                            survivor_cover, verify_cover)

DELTA = Fraction(1, 4)


def eight_seq(depth):
    return [2 * 8 ** k for k in range(1, depth + 1)]


def brute_children(j, n_prev, n, delta):
    """Indices i whose interval fits inside parent j, by direct comparison."""
    plo, phi = (j + delta) / n_prev, (j + 1 - delta) / n_prev
    first = math.floor(plo * n) - 1
    return [i for i in range(first, first + n // n_prev + 3) if (i + delta) / n >= plo and (i + 1 - delta) / n <= phi]


def test_cover_children_match_direct_count():
    covers = erdos_taylor_cover(eight_seq(4), DELTA)
    assert [len(c) for c in covers] == [1, 16, 64, 256, 1024]
    for g in range(2, 5):
        prev, cur = covers[g - 1], covers[g]
        expect = []
        for j in prev.js:
            expect.extend(brute_children(j, prev.n, cur.n, DELTA))
        assert expect == cur.js
    verify_cover(covers, sample=200)


def test_cover_stats():
    covers = erdos_taylor_cover(eight_seq(3), DELTA)
    assert [c.stats.m for c in covers[1:]] == [16, 4, 4]
    for c in covers[1:]:
        assert c.stats.gap == 2 * DELTA / c.n
        assert c.stats.len_max == (1 - 2 * DELTA) / c.n
    rows = cover_stats_rows(covers)
    assert len(rows) == len(covers) - 1


def test_hypothesis_on_growth_ratio():
    with pytest.raises(PreconditionError):
        erdos_taylor_cover([2, 4, 8], DELTA)
    with pytest.raises(PreconditionError):
        erdos_taylor_cover([2, 100], Fraction(1, 2))


@pytest.mark.parametrize("g", [3, 4, 5, 6])
def test_mass_distribution_formula(g):
    covers = erdos_taylor_cover(eight_seq(g), DELTA)
    # 16 children at the root, 4 per parent after that, gap 1/(2 n_g)
    expect = math.log(16 * 4 ** (g - 2)) / -math.log(4 / (2 * 2 * 8 ** g))
    assert mass_dist_lower_bound(covers) == pytest.approx(expect, rel=1e-12)


def test_mass_distribution_trend_is_flat_for_geometric_growth():
    # log(16 * 4^(g-2)) / log(8^g) = 2/3 at every depth
    trend = mass_dist_trend(erdos_taylor_cover(eight_seq(6), DELTA))
    assert len(trend) == 4
    assert trend == pytest.approx([2 / 3] * 4, rel=1e-12)


def test_synthetic_stats_tend_to_half():
    g = 20
    v = mass_dist_from_stats([2] * g, [Fraction(1, 4 ** k) for k in range(1, g + 1)])
    assert abs(v - 0.5) < 0.02
    with pytest.raises(PreconditionError):
        mass_dist_from_stats([1, 2, 2], [Fraction(1, 4)] * 3)


def test_export_jsonl():
    covers = erdos_taylor_cover(eight_seq(2), DELTA)
    buf = io.StringIO()
    count = export_cover_jsonl(covers, buf)
    lines = buf.getvalue().splitlines()
    assert count == len(lines) == sum(len(c) for c in covers[1:])
    assert set(json.loads(lines[-1])) == {"gen", "lo", "hi"}


@pytest.mark.parametrize("name", ["growing", "superexp"])
def test_phi_subsequence_properties(fx, name):
    a = fx[name]
    R = Fraction(12)
    phi = phi_subsequence(a, R, kmax=60)
    for x, y in zip(phi, phi[1:]):
        assert y > x
        assert q_of(a, y) >= R * q_of(a, x)
        assert R * q_of(a, x + 1) >= q_of(a, y)


@pytest.mark.parametrize("name", ["golden", "sqrt2m1"])
def test_phi_needs_unbounded_growth(fx, name):
    with pytest.raises(PreconditionError):
        phi_subsequence(fx[name], 12, kmax=60)


def test_pipeline_constant(fx):
    out = bad_cover_pipeline(fx["growing"], depth=3)
    assert out["R"] == 12
    assert out["constant"] == et_constant(Fraction(1, 3), 72) == Fraction(1, 3 * 72) - Fraction(12, 72 ** 2)
    assert len(out["covers"]) == 4


def test_sparse_times_gaps(fx):
    ks, gap = sparse_times(fx["golden"], Fraction(1, 10), 2, 6)
    assert len(ks) == 7
    for x, y in zip(ks, ks[1:]):
        assert 12 * q_of(fx["golden"], x) < Fraction(1, 10) * q_of(fx["golden"], y)
        assert not 12 * q_of(fx["golden"], x) < Fraction(1, 10) * q_of(fx["golden"], y - 1)


def test_survivor_cover_golden(fx):
    cov = survivor_cover(fx["golden"], Fraction(1, 10), 2, 6)
    for N, b in zip(cov.counts, cov.bounds):
        assert N <= b
    assert all(r <= 1 - Fraction(1, 320) for r in cov.parent_ratio_max)
    assert cov.upper_bound == pytest.approx(1 + math.log(1 - 0.1 / 32) / math.log(cov.M))
    for i in cov.M_applicable:
        assert q_of(fx["golden"], cov.ks[i]) <= cov.M ** i


def test_survivor_flag_matches_counts(fx):
    cov = survivor_cover(fx["golden"], Fraction(1, 10), 2, 2)
    for i in (1, 2):
        q = q_of(fx["golden"], cov.ks[i])
        assert sum(cov.is_survivor(i, n) for n in range(1, q + 1)) == cov.counts[i]


def test_box_count_unit_interval():
    est = box_dimension_estimate([(Fraction(0), Fraction(1))], range(2, 14))
    assert est.slope == pytest.approx(1.0, abs=1e-9)


def test_box_count_cantor():
    est = box_dimension_estimate(cantor_middle_thirds(12), range(3, 16))
    assert abs(est.slope - math.log(2) / math.log(3)) < 0.03


def test_box_count_rejects_degenerate():
    with pytest.raises(PreconditionError):
        box_dimension_estimate([Fraction(1, 2)], range(2, 12))
    with pytest.raises(PreconditionError):
        box_dimension_estimate([(0, 1)], [1, 2, 3])
