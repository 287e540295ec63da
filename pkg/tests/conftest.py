"""Shared fixtures and independent high-precision oracles."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from diolab.cf import fixtures

mpmath.mp.dps = 80


def _cf_value(terms) -> mpmath.mpf:
    v = mpmath.mpf(terms[-1])
    for t in reversed(terms[:-1]):
        v = t + 1 / v
    return v


def _terms_growing(n):
    return [0] + list(range(1, n))


def _terms_superexp(n):
    return [0] + [2 ** (2 ** min(k, 6)) for k in range(1, n)]


def _terms_nonheavy(n):
    return [0] + [3 ** k if (k & (k - 1)) == 0 else 1 for k in range(1, n)]


# closed forms where known, otherwise a long independent expansion
ORACLES = {
    "golden": lambda: (mpmath.sqrt(5) - 1) / 2,
    "sqrt2m1": lambda: mpmath.sqrt(2) - 1,
    "sqrt3m1": lambda: mpmath.sqrt(3) - 1,
    "sqrt7m2": lambda: mpmath.sqrt(7) - 2,
    "em2": lambda: mpmath.e - 2,
    "const3": lambda: (mpmath.sqrt(13) - 3) / 2,
    "odd": lambda: mpmath.tanh(1),
    "growing": lambda: _cf_value(_terms_growing(80)),
    "superexp": lambda: _cf_value(_terms_superexp(8)),
    "nonheavy_bounded": lambda: _cf_value(_terms_nonheavy(70)),
}


def mp_alpha(name: str) -> mpmath.mpf:
    return ORACLES[name]()


def mp_dist(v) -> mpmath.mpf:
    return abs(v - mpmath.nint(v))


def mp_frac(v):
    return v - mpmath.floor(v)


def mp_of(fr: Fraction):
    return mpmath.mpf(fr.numerator) / fr.denominator


@pytest.fixture(scope="session")
def fx():
    return fixtures()


# one verdict line per acceptance check, repeated in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
