"""Credal sets for transition rows and unconditional distributions.

A credal row is a closed convex set of probability mass functions over the
state space, given either by its finite vertex list or by per-state
probability intervals.  Upper and lower expectations are the max/min of the
linear expectation over the set; the two are conjugate, lower(f) equals
-upper(-f).

Interval rows are evaluated by greedy allocation (states sorted by descending
gamble value receive their upper bound first), which solves the underlying
linear program exactly for proper intervals; the vertex enumeration in
``row_vertices`` provides the independent cross-check used by the tests.

Unconditional imprecise expectation functionals come in explicit flavours
(precise, vertex set, interval set, vacuous-on-a-subset, mixture); iterated
limit functionals live in :mod:`imc.invariant` and share the same evaluation
interface.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCredalSet,
    StateBudgetExceeded,
    VertexBudgetExceeded,
)
from .model import Config, Gamble, StateSpace

__all__ = [
    "VertexRow", "IntervalRow", "CredalRow",
    "coherence_normalize", "row_vertices", "can_concentrate",
    "Ief", "PreciseIef", "VertexSetIef", "IntervalSetIef", "VacuousIef",
    "MixtureIef", "support", "essential_max", "min_positive_lower",
]

_ATOL = 1e-12


def _as_values(f, size: int) -> np.ndarray:
    values = f.values if isinstance(f, Gamble) else np.asarray(f, dtype=float)
    if values.shape != (size,):
        raise DimensionMismatch(
            f"gamble of length {values.shape} against dimension {size}")
    return values


class VertexRow:
    """Credal row given by the vertices of its convex hull.

    Each vertex must be a probability mass function: nonnegative and summing
    to one within ``atol`` (1e-12 for user input; materialized operator powers
    use 1e-10 to absorb product round-off).
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices, atol: float = _ATOL):
        vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        if vertices.size == 0:
            raise EmptyCredalSet("vertex row needs at least one mass function")
        if np.any(vertices < -atol):
            raise ValueError("vertex has a negative entry")
        sums = vertices.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > atol):
            raise ValueError("vertex does not sum to one")
        vertices.flags.writeable = False
        self.vertices = vertices

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def upper(self, f) -> float:
        values = _as_values(f, self.dimension)
        return float((self.vertices @ values).max())

    def lower(self, f) -> float:
        values = _as_values(f, self.dimension)
        return -self.upper(-values)

    def is_precise(self) -> bool:
        return self.vertices.shape[0] == 1

    def __repr__(self) -> str:
        return f"VertexRow({self.vertices.shape[0]} vertices, dim {self.dimension})"


class IntervalRow:
    """Credal row given by per-state probability intervals.

    The bounds must be proper: 0 <= lower <= upper <= 1 pointwise with
    sum(lower) <= 1 <= sum(upper); otherwise the set of compatible mass
    functions is empty and EmptyCredalSet is raised.  ``coherence_normalize``
    tightens proper bounds so each one is attained by some mass function.
    """

    __slots__ = ("lower_bounds", "upper_bounds")

    def __init__(self, lower_bounds, upper_bounds):
        lo = np.asarray(lower_bounds, dtype=float).copy()
        hi = np.asarray(upper_bounds, dtype=float).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch("lower/upper bound vectors differ in shape")
        if np.any(lo < -_ATOL) or np.any(hi > 1.0 + _ATOL):
            raise ValueError("probability bounds must lie in [0, 1]")
        if np.any(lo > hi + _ATOL):
            raise ValueError("some lower bound exceeds its upper bound")
        if lo.sum() > 1.0 + _ATOL:
            raise EmptyCredalSet("lower bounds sum beyond 1")
        if hi.sum() < 1.0 - _ATOL:
            raise EmptyCredalSet("upper bounds sum below 1")
        lo.flags.writeable = False
        hi.flags.writeable = False
        self.lower_bounds = lo
        self.upper_bounds = hi

    @property
    def dimension(self) -> int:
        return self.lower_bounds.shape[0]

    def upper(self, f) -> float:
        """Greedy allocation: descending gamble values get upper bounds first.

        Ties in gamble values are broken by state input order; the optimum is
        tie-independent even though the allocation is not.
        """
        values = _as_values(f, self.dimension)
        p = self.lower_bounds.copy()
        slack = 1.0 - p.sum()
        for i in np.argsort(-values, kind="stable"):
            if slack <= 0.0:
                break
            take = min(self.upper_bounds[i] - p[i], slack)
            p[i] += take
            slack -= take
        return float(p @ values)

    def lower(self, f) -> float:
        values = _as_values(f, self.dimension)
        return -self.upper(-values)

    def is_precise(self) -> bool:
        return bool(np.all(np.abs(self.upper_bounds - self.lower_bounds) <= _ATOL))

    def __repr__(self) -> str:
        return f"IntervalRow(dim {self.dimension})"


CredalRow = Union[VertexRow, IntervalRow]


def coherence_normalize(row: IntervalRow) -> IntervalRow:
    """Tighten interval bounds so every bound is attained (reachable).

    lower_i := max(lower_i, 1 - sum_{j != i} upper_j) and
    upper_i := min(upper_i, 1 - sum_{j != i} lower_j).  The operation is
    idempotent and describes the same credal set.
    """
    lo, hi = row.lower_bounds, row.upper_bounds
    new_lo = np.maximum(lo, 1.0 - (hi.sum() - hi))
    new_hi = np.minimum(hi, 1.0 - (lo.sum() - lo))
    if np.any(new_lo > new_hi + _ATOL):
        raise EmptyCredalSet("tightening yields lower > upper")
    return IntervalRow(np.clip(new_lo, 0.0, 1.0), np.clip(new_hi, 0.0, 1.0))


def row_vertices(row: CredalRow, config: Config | None = None) -> VertexRow:
    """Vertex form of a credal row.

    For interval rows, enumerates all extreme points of the bounded
    simplex slice {p : lower <= p <= upper, sum p = 1}: at an extreme point
    at most one coordinate sits strictly between its bounds, so candidates
    are generated by fixing all but one coordinate at a bound and letting
    normalization determine the remaining one.  Results are deduplicated
    within 1e-12.
    """
    config = config or Config()
    if isinstance(row, VertexRow):
        return row
    row = coherence_normalize(row)
    lo, hi = row.lower_bounds, row.upper_bounds
    n = row.dimension
    if n == 1:
        return VertexRow(np.ones((1, 1)))
    if n * (1 << (n - 1)) > 64 * config.max_vertices:
        raise VertexBudgetExceeded(
            f"vertex enumeration in dimension {n} exceeds the configured cap")
    seen: dict[tuple, np.ndarray] = {}
    others_template = np.arange(n)
    for free in range(n):
        others = others_template[others_template != free]
        for bits in range(1 << (n - 1)):
            p = lo.copy()
            for k in range(n - 1):
                if bits >> k & 1:
                    p[others[k]] = hi[others[k]]
            rest = 1.0 - (p.sum() - p[free])
            if lo[free] - _ATOL <= rest <= hi[free] + _ATOL:
                p[free] = min(max(rest, lo[free]), hi[free])
                seen.setdefault(tuple(np.round(p, 12)), p)
    points = list(seen.values())
    if len(points) > config.max_vertices:
        raise VertexBudgetExceeded(
            f"{len(points)} extreme points exceed the cap of {config.max_vertices}")
    return VertexRow(np.array(points))


def can_concentrate(row: CredalRow, mask: np.ndarray, config: Config | None = None) -> bool:
    """Whether some mass function in the row puts all its mass on ``mask``.

    Equivalent to the row's upper probability of the subset being one.  For
    vertex rows it suffices to look at vertices because the maximizing face's
    vertices are vertices of the polytope; for interval rows the condition is
    that no mass is pinned outside (sum of outside lower bounds ~ 0) and the
    inside upper bounds can carry everything (sum >= 1).
    """
    config = config or Config()
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (row.dimension,):
        raise DimensionMismatch("subset mask has wrong length")
    if isinstance(row, VertexRow):
        inside_mass = row.vertices[:, mask].sum(axis=1)
        return bool(inside_mass.max(initial=0.0) >= 1.0 - config.eps_one)
    outside_pinned = row.lower_bounds[~mask].sum()
    inside_capacity = row.upper_bounds[mask].sum()
    return bool(outside_pinned <= config.eps_pos and inside_capacity >= 1.0 - config.eps_one)


# ---------------------------------------------------------------------------
# Unconditional imprecise expectation functionals
# ---------------------------------------------------------------------------

class Ief:
    """A closed convex set of expectation functionals, summarized by its
    upper/lower envelopes.

    Subclasses implement ``upper``; ``lower`` follows by conjugacy.  Explicit
    handles (everything except iterated limits) answer in closed form.
    """

    space: StateSpace
    is_explicit = True

    def upper(self, f: Gamble) -> float:
        raise NotImplementedError

    def lower(self, f: Gamble) -> float:
        return -self.upper(-f)

    def _check(self, f: Gamble) -> Gamble:
        if f.space != self.space:
            raise DimensionMismatch("gamble lives on a different state space")
        return f

    def support_mask(self, config: Config | None = None) -> np.ndarray:
        """States whose singleton upper probability is strictly positive."""
        config = config or Config()
        mask = np.zeros(self.space.size, dtype=bool)
        for i in range(self.space.size):
            values = np.zeros(self.space.size)
            values[i] = 1.0
            mask[i] = self.upper(Gamble(self.space, values)) > config.eps_pos
        return mask


class PreciseIef(Ief):
    """A single probability mass function; upper and lower coincide."""

    def __init__(self, space: StateSpace, weights):
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (space.size,):
            raise DimensionMismatch("mass function has wrong length")
        if np.any(weights < -_ATOL) or abs(weights.sum() - 1.0) > _ATOL:
            raise ValueError("weights must be a probability mass function")
        self.space = space
        self.weights = weights

    def upper(self, f: Gamble) -> float:
        return float(self.weights @ self._check(f).values)

    def lower(self, f: Gamble) -> float:
        return self.upper(f)


class VertexSetIef(Ief):
    """Convex hull of finitely many mass functions."""

    def __init__(self, space: StateSpace, vertices):
        self.space = space
        self.row = VertexRow(vertices)
        if self.row.dimension != space.size:
            raise DimensionMismatch("vertices have wrong length")

    def upper(self, f: Gamble) -> float:
        return self.row.upper(self._check(f).values)


class IntervalSetIef(Ief):
    """All mass functions between per-state lower and upper bounds.

    Bounds are coherence-tightened at construction so the greedy evaluation
    attains them.
    """

    def __init__(self, space: StateSpace, lower_bounds, upper_bounds):
        self.space = space
        self.row = coherence_normalize(IntervalRow(lower_bounds, upper_bounds))
        if self.row.dimension != space.size:
            raise DimensionMismatch("bounds have wrong length")

    def upper(self, f: Gamble) -> float:
        return self.row.upper(self._check(f).values)


class VacuousIef(Ief):
    """All mass functions supported on a given non-empty subset.

    The least committal functional on its subset: upper is the max of the
    gamble over the subset, lower the min.
    """

    def __init__(self, space: StateSpace, members: Iterable[str]):
        self.space = space
        self.mask = space.subset_mask(members)
        if not self.mask.any():
            raise ValueError("vacuous functional needs a non-empty subset")

    @property
    def members(self) -> tuple[str, ...]:
        return self.space.labels_of(self.mask)

    def upper(self, f: Gamble) -> float:
        return float(self._check(f).values[self.mask].max())

    def lower(self, f: Gamble) -> float:
        return float(self._check(f).values[self.mask].min())


class MixtureIef(Ief):
    """Convex combination of functionals; envelopes mix coordinate-wise.

    Upper and lower expectations of a mixture are the same convex
    combinations of the component envelopes.
    """

    def __init__(self, weights: Sequence[float], components: Sequence[Ief]):
        if len(weights) != len(components) or not components:
            raise ValueError("need one weight per component")
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < -_ATOL) or abs(weights.sum() - 1.0) > _ATOL:
            raise ValueError("mixture weights must be nonnegative and sum to one")
        spaces = {c.space for c in components}
        if len(spaces) != 1:
            raise DimensionMismatch("mixture components live on different spaces")
        self.space = components[0].space
        self.weights = weights
        self.components = tuple(components)

    @property
    def is_explicit(self) -> bool:  # type: ignore[override]
        return all(c.is_explicit for c in self.components)

    def upper(self, f: Gamble) -> float:
        self._check(f)
        return float(sum(w * c.upper(f) for w, c in zip(self.weights, self.components)))

    def lower(self, f: Gamble) -> float:
        self._check(f)
        return float(sum(w * c.lower(f) for w, c in zip(self.weights, self.components)))


def support(handle: Ief, config: Config | None = None) -> tuple[str, ...]:
    """States with strictly positive singleton upper probability."""
    return handle.space.labels_of(handle.support_mask(config))


def essential_max(handle: Ief, f: Gamble, config: Config | None = None) -> float:
    """Largest gamble level whose superlevel set has positive lower probability.

    The minimum of the gamble always qualifies because the lower probability
    of the whole space is one.
    """
    if not handle.is_explicit:
        raise TypeError("essential_max needs an explicit handle; materialize "
                        "indicator values of limit functionals first")
    config = config or Config()
    space = handle.space
    values = f.values
    for a in sorted(set(values.tolist()), reverse=True):
        event = Gamble(space, (values >= a).astype(float))
        if handle.lower(event) > config.eps_pos:
            return float(a)
    return float(values.min())


def min_positive_lower(handle: Ief, config: Config | None = None) -> float:
    """Smallest strictly positive lower probability over all events.

    Enumerates the full subset lattice, so the space is gated by
    ``max_strong_states``.
    """
    if not handle.is_explicit:
        raise TypeError("min_positive_lower needs an explicit handle")
    config = config or Config()
    n = handle.space.size
    if n > config.max_strong_states:
        raise StateBudgetExceeded(
            f"{n} states exceed the subset-lattice cap of {config.max_strong_states}")
    best = 1.0
    for bits in range(1, 1 << n):
        values = np.array([(bits >> i) & 1 for i in range(n)], dtype=float)
        p = handle.lower(Gamble(handle.space, values))
        if p > config.eps_pos:
            best = min(best, p)
    return best
