"""Partial quotients, convergents and certified enclosures of ||q alpha||.

A real number is described symbolically by :class:`RealNumberSpec`.  All
returned values are exact rationals or :class:`RatInterval` enclosures; the
enclosure of alpha at depth K is the interval between the convergents
p_K/q_K and p_{K+1}/q_{K+1}, of width 1/(q_K q_{K+1}).

Indexing follows the usual convention q_{-1} = 0, q_0 = 1, p_{-1} = 1, p_0 = a_0.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PrecisionError, PreconditionError
from .interval import RatInterval, as_fraction, fmt

DEFAULT_MAX_DEPTH = 500

RULES = ("constant", "linear", "power_of_two_support", "doubly_exponential", "e")


def max_depth() -> int:
    return int(os.environ.get("DIOLAB_MAX_DEPTH", DEFAULT_MAX_DEPTH))


@dataclass(frozen=True)
class RealNumberSpec:
    """Symbolic real number.

    ``kind`` is one of ``"rational"``, ``"quadratic"`` or ``"rule"``.
    """

    kind: str
    p: int = 0
    q: int = 1
    preperiod: tuple = ()
    period: tuple = ()
    rule: str = ""
    params: tuple = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "rational":
            if self.q <= 0 or math.gcd(self.p, self.q) != 1:
                raise PreconditionError("rational spec needs q > 0 and gcd(p, q) = 1")
        elif self.kind == "quadratic":
            if not self.period:
                raise PreconditionError("quadratic irrational needs a non-empty period")
            if any(a < 1 for a in self.period) or any(a < 1 for a in self.preperiod[1:]):
                raise PreconditionError("partial quotients a_k (k >= 1) must be >= 1")
        elif self.kind == "rule":
            if self.rule not in RULES:
                raise PreconditionError(f"unknown rule {self.rule!r}; known: {', '.join(RULES)}")
        else:
            raise PreconditionError(f"unknown kind {self.kind!r}")

    # constructors
    @classmethod
    def rational(cls, value, name: str = "") -> "RealNumberSpec":
        v = as_fraction(value)
        return cls("rational", p=v.numerator, q=v.denominator, name=name)

    @classmethod
    def quadratic(cls, preperiod, period, name: str = "") -> "RealNumberSpec":
        return cls("quadratic", preperiod=tuple(preperiod), period=tuple(period), name=name)

    @classmethod
    def from_rule(cls, rule: str, *params, name: str = "") -> "RealNumberSpec":
        return cls("rule", rule=rule, params=tuple(params), name=name)

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def label(self) -> str:
        return self.name or self.describe()

    def describe(self) -> str:
        if self.kind == "rational":
            return fmt(Fraction(self.p, self.q))
        if self.kind == "quadratic":
            pre = ",".join(map(str, self.preperiod))
            per = ",".join(map(str, self.period))
            return f"[{pre};({per})]"
        return f"{self.rule}({','.join(map(str, self.params))})"

    def partial_quotient(self, k: int) -> int:
        """a_k for an irrational spec."""
        if self.kind == "quadratic":
            if k < len(self.preperiod):
                return self.preperiod[k]
            return self.period[(k - len(self.preperiod)) % len(self.period)]
        if self.kind == "rule":
            a = _rule_term(self.rule, self.params, k)
            if k >= 1 and a < 1:
                raise PreconditionError(f"rule {self.rule} produced a_{k} = {a} < 1")
            return a
        raise PreconditionError("rational specs have a finite expansion; use expand_cf")

    def to_json(self) -> dict:
        if self.kind == "rational":
            d = {"kind": "rational", "value": fmt(Fraction(self.p, self.q))}
        elif self.kind == "quadratic":
            d = {"kind": "quadratic", "preperiod": list(self.preperiod), "period": list(self.period)}
        else:
            d = {"kind": "rule", "rule": self.rule, "params": list(self.params)}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, d) -> "RealNumberSpec":
        if isinstance(d, str):
            d = json.loads(d)
        kind = d.get("kind")
        name = d.get("name", "")
        if kind == "fixture":
            return fixtures()[d["name"]]
        if kind == "rational":
            return cls.rational(d["value"], name=name)
        if kind == "quadratic":
            return cls.quadratic(d.get("preperiod", [0]), d["period"], name=name)
        if kind == "rule":
            return cls.from_rule(d["rule"], *d.get("params", []), name=name)
        raise PreconditionError(f"unknown RealNumberSpec kind {kind!r}")


def _rule_term(rule: str, params: tuple, k: int) -> int:
    a0 = params[0] if params else 0
    if k == 0:
        return 2 if rule == "e" and not params else a0
    if rule == "constant":
        return params[1]
    if rule == "linear":
        slope, offset = params[1], params[2]
        return slope * k + offset
    if rule == "power_of_two_support":
        base = params[1]
        return base ** k if k & (k - 1) == 0 else 1
    if rule == "doubly_exponential":
        cap = params[1]
        return 2 ** (2 ** min(k, cap))
    if rule == "e":
        return 2 * (k + 1) // 3 if k % 3 == 2 else 1
    raise PreconditionError(f"unknown rule {rule!r}")


@dataclass(frozen=True)
class ConvergentSeq:
    """Partial quotients a_0..a_K with numerators/denominators p_k, q_k for k = -1..K."""

    a: tuple
    p: tuple
    q: tuple
    terminated: bool = False

    @property
    def K(self) -> int:
        return len(self.a) - 1

    def qk(self, k: int) -> int:
        return self.q[k + 1]

    def pk(self, k: int) -> int:
        return self.p[k + 1]

    def ak(self, k: int) -> int:
        return self.a[k]

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.pk(k), self.qk(k))

    def check(self) -> None:
        """Recurrence, determinant and growth identities (raises InvariantError)."""
        from .errors import InvariantError

        for k in range(1, self.K + 1):
            if self.qk(k) != self.a[k] * self.qk(k - 1) + self.qk(k - 2):
                raise InvariantError(f"q recurrence fails at k={k}")
            if self.pk(k) != self.a[k] * self.pk(k - 1) + self.pk(k - 2):
                raise InvariantError(f"p recurrence fails at k={k}")
        for k in range(0, self.K + 1):
            if self.pk(k) * self.qk(k - 1) - self.pk(k - 1) * self.qk(k) != (-1) ** (k - 1):
                raise InvariantError(f"determinant identity fails at k={k}")
        for k in range(1, self.K):
            if not self.qk(k + 1) > self.qk(k):
                raise InvariantError(f"q not increasing at k={k}")
        # strict from k = 1 on; at k = 0 equality occurs when a_1 = 1
        for k in range(1, self.K - 1):
            if not self.qk(k + 2) > 2 * self.qk(k):
                raise InvariantError(f"q_(k+2) > 2 q_k fails at k={k}")


class _Expansion:
    """Growing cache of the expansion of one spec."""

    def __init__(self, spec: RealNumberSpec):
        self.spec = spec
        self.a: list[int] = []
        self.p = [1]
        self.q = [0]
        self.terminated = False
        if spec.is_rational:
            self._rational_terms = _rational_cf(spec.p, spec.q)

    def extend(self, K: int) -> None:
        while len(self.a) <= K and not self.terminated:
            k = len(self.a)
            if self.spec.is_rational:
                if k >= len(self._rational_terms):
                    self.terminated = True
                    break
                a = self._rational_terms[k]
            else:
                a = self.spec.partial_quotient(k)
            self.a.append(a)
            if k == 0:
                self.p.append(a)
                self.q.append(1)
            else:
                self.p.append(a * self.p[-1] + self.p[-2])
                self.q.append(a * self.q[-1] + self.q[-2])
        if self.spec.is_rational and len(self.a) >= len(self._rational_terms):
            self.terminated = True


def _rational_cf(p: int, q: int) -> list[int]:
    terms = []
    while q:
        a, r = divmod(p, q)
        terms.append(a)
        p, q = q, r
    return terms


_CACHE: dict[RealNumberSpec, _Expansion] = {}


def _expansion(x: RealNumberSpec, K: int) -> _Expansion:
    e = _CACHE.get(x)
    if e is None:
        e = _CACHE[x] = _Expansion(x)
    if K > max_depth() and not x.is_rational:
        raise PrecisionError(f"depth {K} exceeds maximum depth {max_depth()} (DIOLAB_MAX_DEPTH)")
    e.extend(K)
    return e


def expand_cf(x: RealNumberSpec, K: int) -> ConvergentSeq:
    """a_0..a_K and the convergents; a rational stops early with ``terminated`` set."""
    if K < 0:
        raise PreconditionError("K must be >= 0")
    e = _expansion(x, K)
    n = min(K + 1, len(e.a))
    return ConvergentSeq(tuple(e.a[:n]), tuple(e.p[: n + 1]), tuple(e.q[: n + 1]),
                         terminated=e.terminated and n < K + 1)


def q_of(x: RealNumberSpec, k: int) -> int:
    """q_k, extending the cached expansion as needed."""
    return _expansion(x, k).q[k + 1]


def p_of(x: RealNumberSpec, k: int) -> int:
    return _expansion(x, k).p[k + 1]


def a_of(x: RealNumberSpec, k: int) -> int:
    return _expansion(x, k).a[k]


def level_for(x: RealNumberSpec, bound: int) -> int:
    """Smallest k >= 0 with q_k >= bound."""
    k = 0
    while q_of(x, k) < bound:
        k += 1
    return k


def alpha_enclosure(x: RealNumberSpec, width: Fraction) -> RatInterval:
    """Enclosure of alpha of width <= ``width``."""
    if x.is_rational:
        return RatInterval.point(Fraction(x.p, x.q))
    width = Fraction(width)
    if width <= 0:
        raise PreconditionError("width must be positive")
    K = 0
    while True:
        if q_of(x, K) * q_of(x, K + 1) * width >= 1:
            break
        K += 1
    e = _expansion(x, K + 1)
    c0 = Fraction(e.p[K + 1], e.q[K + 1])
    c1 = Fraction(e.p[K + 2], e.q[K + 2])
    return RatInterval.hull(c0, c1)


def linear_enclosure(x: RealNumberSpec, m: int, r: Fraction = Fraction(0),
                     width: Fraction = Fraction(1, 10 ** 30)) -> RatInterval:
    """Enclosure of m*alpha - r of width <= ``width``."""
    if m == 0:
        return RatInterval.point(-Fraction(r))
    a = alpha_enclosure(x, Fraction(width) / abs(m))
    return a * m - Fraction(r)


def signed_residual(x: RealNumberSpec, k: int) -> RatInterval:
    """Enclosure of q_k alpha - p_k (its sign is (-1)^k for irrational alpha)."""
    q, p = q_of(x, k), p_of(x, k)
    width = Fraction(1, 2 ** 40 * q_of(x, k + 1) ** 2)
    while True:
        iv = linear_enclosure(x, q, Fraction(p), width)
        if iv.lo > 0 or iv.hi < 0 or iv.is_exact:
            return iv
        width /= 2 ** 32


def conv_gap(x: RealNumberSpec, k: int, width: Fraction | None = None) -> RatInterval:
    """Enclosure of D_k = |q_k alpha - p_k| (D_{-1} = 1)."""
    if k == -1:
        return RatInterval.point(1)
    if width is None:
        return abs(signed_residual(x, k))
    return abs(linear_enclosure(x, q_of(x, k), Fraction(p_of(x, k)), width))


def qdist(x: RealNumberSpec, q: int, width_budget=Fraction(1, 10 ** 12)) -> RatInterval:
    """Enclosure of ||q alpha|| with width <= ``width_budget``."""
    return shifted_dist(x, q, Fraction(0), width_budget)


def shifted_dist(x: RealNumberSpec, m: int, r: Fraction, width_budget=Fraction(1, 10 ** 12)) -> RatInterval:
    """Enclosure of ||m alpha - r||; re-tightens when a half-integer is enclosed."""
    budget = as_fraction(width_budget)
    if budget <= 0:
        raise PreconditionError("width budget must be positive")
    if x.is_rational:
        return RatInterval.point(Fraction(m * x.p, x.q) - Fraction(r)).dist_to_int()
    w = budget
    for _ in range(64):
        iv = linear_enclosure(x, m, r, w)
        d = iv.dist_to_int()
        if d.hi < Fraction(1, 2) or iv.is_exact:
            return d
        w /= 2 ** 16
    raise PrecisionError(f"cannot separate ||{m} alpha - {r}|| from 1/2")


def orbit_point(x: RealNumberSpec, m: int, width_budget=Fraction(1, 10 ** 12)) -> RatInterval:
    """Enclosure of frac(m alpha) in [0, 1).

    Irrational orbit points are never integers, so the enclosure is tightened
    until it lies strictly inside one unit interval.
    """
    if x.is_rational:
        return RatInterval.point(Fraction(m * x.p, x.q) % 1)
    w = as_fraction(width_budget)
    for _ in range(64):
        iv = linear_enclosure(x, m, Fraction(0), w)
        if math.floor(iv.lo) == math.floor(iv.hi) and iv.lo != math.floor(iv.lo):
            return iv.frac()
        w /= 2 ** 16
    raise PrecisionError(f"cannot place {m} alpha away from an integer")


def fixtures() -> dict[str, RealNumberSpec]:
    """Named test numbers."""
    return dict(_FIXTURES)


_FIXTURES = {
    "golden": RealNumberSpec.from_rule("constant", 0, 1, name="golden"),
    "sqrt2m1": RealNumberSpec.quadratic([0], [2], name="sqrt2m1"),
    "growing": RealNumberSpec.from_rule("linear", 0, 1, 0, name="growing"),
    "superexp": RealNumberSpec.from_rule("doubly_exponential", 0, 6, name="superexp"),
    "nonheavy_bounded": RealNumberSpec.from_rule("power_of_two_support", 0, 3, name="nonheavy_bounded"),
    "sqrt3m1": RealNumberSpec.quadratic([0], [1, 2], name="sqrt3m1"),
    "sqrt7m2": RealNumberSpec.quadratic([0], [1, 1, 1, 4], name="sqrt7m2"),
    "em2": RealNumberSpec.from_rule("e", 0, name="em2"),
    "const3": RealNumberSpec.from_rule("constant", 0, 3, name="const3"),
    "odd": RealNumberSpec.from_rule("linear", 0, 2, -1, name="odd"),
}


def parse_alpha(text: str) -> RealNumberSpec:
    """A fixture name, a JSON object, or a path to a JSON file."""
    if text in _FIXTURES:
        return _FIXTURES[text]
    if text.lstrip().startswith("{"):
        return RealNumberSpec.from_json(text)
    with open(text) as fh:
        return RealNumberSpec.from_json(json.load(fh))
