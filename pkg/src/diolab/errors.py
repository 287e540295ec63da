"""Exception hierarchy.

Each family maps to one CLI exit status (see ``diolab.cli``).
"""


class DiolabError(Exception):
    exit_code = 1


class PreconditionError(DiolabError, ValueError):
    exit_code = 2


class PrecisionError(DiolabError, ArithmeticError):
    exit_code = 3


class BudgetError(DiolabError):
    exit_code = 4


class InvariantError(DiolabError, AssertionError):
    """An invariant that the construction guarantees was falsified."""

    exit_code = 5


class EndpointHit(PreconditionError):
    pass


class Ambiguous(PrecisionError):
    pass


class NotInLevel(PreconditionError):
    pass


class RankSuspect(PrecisionError):
    """A form value is indistinguishable from zero: rk(A Z^m + Z^n) < m + n is suspected."""


class NoAdmissibleIndex(PreconditionError):
    pass


class HypothesisFail(PreconditionError):
    pass
