"""Exception taxonomy.

Data problems (bad labels, empty credal sets) are kept apart from budget
problems (subset-lattice or vertex blow-ups) and from numerical
non-convergence, so callers and the CLI can map them to distinct exit codes.
"""

from __future__ import annotations


class ImcError(Exception):
    """Base class for all errors raised by this package."""


class UnknownState(ImcError):
    """A state label does not belong to the state space."""


class DimensionMismatch(ImcError):
    """A gamble, row or mass function has the wrong length for the space."""


class EmptyCredalSet(ImcError):
    """Probability-interval bounds admit no probability mass function."""


class VertexBudgetExceeded(ImcError):
    """Extreme-point enumeration or operator materialization grew past the
    configured vertex cap."""


class StateBudgetExceeded(ImcError):
    """A subset-lattice operation was requested on a space larger than the
    configured state cap (these operations are exponential in |X|)."""


class PowerCapExceeded(ImcError):
    """A materialized operator power beyond the configured cap was requested."""


class RegularityCapExceeded(ImcError):
    """No regularity step r within the configured power cap qualifies."""


class EmptyRestriction(ImcError):
    """Restricting an operator power to a class left some row empty; the
    strong self-accessibility precondition failed numerically."""


class AbsorbingViolation(ImcError):
    """An operation requiring an absorbing set received a non-absorbing one."""


class NotPrecise(ImcError):
    """A precise-chain-only operation received an imprecise row."""


class BudgetExceeded(ImcError):
    """A brute-force oracle was called outside its (intentionally tiny)
    budget."""


class NonConvergent(ImcError):
    """An iteration hit its cap or oscillated instead of settling.

    ``bracket`` holds the (low, high) envelope of the trailing values, which
    for periodic classes brackets the oscillation.
    """

    def __init__(self, message: str, bracket: tuple[float, float] | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations
