"""The imprecise transition operator and its powers.

An operator holds one credal row per state, with separately specified rows:
any combination of per-state row choices is admissible.  Applied to a gamble
it returns the per-state upper (or lower) conditional expectation; applied to
an interval of gambles it returns the interval [lower of lower, upper of
upper], which is how powers propagate.

Powers are applied lazily (gamble recursion) everywhere except where an
explicit credal set of the n-step rows is required (restriction to a class,
oracles); materialization is capped and deduplicated.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from itertools import product

import numpy as np

from .credal import (
    CredalRow,
    Ief,
    IntervalRow,
    VertexRow,
    can_concentrate,
    coherence_normalize,
    row_vertices,
)
from .errors import (
    DimensionMismatch,
    EmptyRestriction,
    PowerCapExceeded,
    VertexBudgetExceeded,
)
from .model import Config, Gamble, GambleInterval, StateSpace

__all__ = ["Ito", "MaterializedPower", "evolve", "materialize_power",
           "restrict_to_class"]


class Ito:
    """Imprecise transition operator: one coherent credal row per state."""

    __slots__ = ("space", "rows", "config")

    def __init__(self, space: StateSpace, rows: Sequence[CredalRow],
                 config: Config | None = None):
        rows = tuple(rows)
        if len(rows) != space.size:
            raise DimensionMismatch(
                f"{len(rows)} rows for a space of size {space.size}")
        normalized = []
        for row in rows:
            if row.dimension != space.size:
                raise DimensionMismatch("row dimension differs from space size")
            normalized.append(coherence_normalize(row)
                              if isinstance(row, IntervalRow) else row)
        self.space = space
        self.rows = tuple(normalized)
        self.config = config or Config()

    def _check(self, f: Gamble) -> Gamble:
        if f.space != self.space:
            raise DimensionMismatch("gamble lives on a different state space")
        return f

    def upper(self, f: Gamble) -> Gamble:
        """Per-state upper conditional expectation of the gamble."""
        values = self._check(f).values
        return Gamble(self.space, np.array([row.upper(values) for row in self.rows]))

    def lower(self, f: Gamble) -> Gamble:
        values = self._check(f).values
        return Gamble(self.space, np.array([row.lower(values) for row in self.rows]))

    def step_interval(self, interval: GambleInterval) -> GambleInterval:
        """One application to an interval of gambles: [lower g-, upper g+]."""
        return GambleInterval(self.lower(interval.lower), self.upper(interval.upper))

    def power_interval(self, n: int, f: Gamble) -> GambleInterval:
        """n-fold interval application starting from the degenerate [f, f]."""
        if n < 0:
            raise ValueError("step count must be nonnegative")
        interval = GambleInterval.degenerate(self._check(f))
        for _ in range(n):
            interval = self.step_interval(interval)
        return interval

    def is_precise(self) -> bool:
        return all(row.is_precise() for row in self.rows)


class MaterializedPower:
    """Explicit vertex form of the r-step rows of an operator.

    rows[x] spans the credal set of r-step conditional distributions from x;
    its upper expectations agree with the lazy gamble recursion.
    """

    __slots__ = ("space", "r", "rows", "config")

    def __init__(self, space: StateSpace, r: int, rows: Sequence[VertexRow],
                 config: Config | None = None):
        if r < 1:
            raise ValueError("power must be a positive integer")
        self.space = space
        self.r = r
        self.rows = tuple(rows)
        self.config = config or Config()
        if len(self.rows) != space.size:
            raise DimensionMismatch("one vertex row per state required")

    def upper(self, f: Gamble) -> Gamble:
        if f.space != self.space:
            raise DimensionMismatch("gamble lives on a different state space")
        return Gamble(self.space,
                      np.array([row.upper(f.values) for row in self.rows]))

    def lower(self, f: Gamble) -> Gamble:
        return -self.upper(-f)


def evolve(initial: Ief, ito: Ito, n: int, f: Gamble) -> tuple[float, float]:
    """Expectation interval of the gamble at time n from an initial functional.

    Returns [initial lower of the n-step lower gamble, initial upper of the
    n-step upper gamble].
    """
    interval = ito.power_interval(n, f)
    return (initial.lower(interval.lower), initial.upper(interval.upper))


def _product_rows(weights: np.ndarray, base_rows: Sequence[VertexRow],
                  cap: int) -> list[np.ndarray]:
    """All products p.M where M picks one vertex per state with p-mass > 0."""
    support = np.flatnonzero(weights > 0.0)
    choices = [base_rows[y].vertices for y in support]
    count = int(np.prod([c.shape[0] for c in choices], dtype=float))
    if count > cap:
        raise VertexBudgetExceeded(
            f"{count} vertex combinations exceed the cap of {cap}")
    out = []
    for picks in product(*(range(c.shape[0]) for c in choices)):
        rows = np.stack([choices[k][i] for k, i in enumerate(picks)])
        out.append(weights[support] @ rows)
    return out


def materialize_power(ito: Ito, r: int) -> MaterializedPower:
    """Explicit vertex rows of the r-step operator, built recursively.

    The r-step distributions from x are the products of a one-step vertex of
    row x with any selection matrix of (r-1)-step vertices; duplicates are
    removed within 1e-12.  Growth is capped by ``max_vertices``.
    """
    config = ito.config
    if r < 1:
        raise ValueError("power must be a positive integer")
    if r > config.max_power_r:
        raise PowerCapExceeded(
            f"power {r} exceeds the cap of {config.max_power_r}")
    base = [row_vertices(row, config) for row in ito.rows]
    current = base
    for _ in range(r - 1):
        step = []
        for row in current:
            produced: dict[tuple, np.ndarray] = {}
            for vertex in row.vertices:
                for p in _product_rows(vertex, base, config.max_vertices):
                    produced.setdefault(tuple(np.round(p, 12)), p)
                if len(produced) > config.max_vertices:
                    raise VertexBudgetExceeded(
                        f"materialized row grew past {config.max_vertices} vertices")
            step.append(VertexRow(np.array(list(produced.values())), atol=1e-10))
        current = step
    return MaterializedPower(ito.space, r, current, config)


def restrict_to_class(ito: Ito, members: Iterable[str], r: int) -> MaterializedPower:
    """The r-step operators that surely keep mass inside the class.

    For states in the class only the r-step vertices with full mass on the
    class are retained; rows outside are kept unrestricted (the definition
    constrains class states only, and downstream evaluation is supported on
    the class).  An empty retained row signals that strong self-accessibility
    at step r fails numerically.
    """
    config = ito.config
    mask = ito.space.subset_mask(members)
    power = materialize_power(ito, r)
    rows = []
    for x, row in enumerate(power.rows):
        if not mask[x]:
            rows.append(row)
            continue
        inside = row.vertices[:, mask].sum(axis=1)
        kept = row.vertices[inside >= 1.0 - config.eps_one]
        if kept.shape[0] == 0:
            raise EmptyRestriction(
                f"state {ito.space.labels[x]!r} has no r-step vertex with full "
                f"mass on the class")
        rows.append(VertexRow(kept, atol=1e-10))
    return MaterializedPower(ito.space, r, rows, config)
