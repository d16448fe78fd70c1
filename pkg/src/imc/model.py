"""Finite state spaces, gambles and the shared numerical configuration.

A gamble is a real-valued map on the state space; every operator in the
package acts on gambles or on intervals of gambles.  All values are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, UnknownState

__all__ = ["StateSpace", "Gamble", "GambleInterval", "Config", "indicator"]


@dataclass(frozen=True)
class Config:
    """Numerical thresholds and budgets shared by all modules.

    Strict inequalities of the theory (">0", "=1") are realized numerically
    through ``eps_pos`` and ``eps_one``; they are never hard-coded at call
    sites.  The caps turn intrinsically exponential operations into explicit
    errors instead of silent truncation.
    """

    eps_pos: float = 1e-9
    eps_one: float = 1e-9
    eps_conv: float = 1e-10
    max_iter: int = 100_000
    max_strong_states: int = 12
    max_power_r: int = 16
    max_vertices: int = 4096

    def __post_init__(self):
        for name in ("eps_pos", "eps_one", "eps_conv"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("max_iter", "max_strong_states", "max_power_r", "max_vertices"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a strictly positive integer")


class StateSpace:
    """An ordered, finite set of distinct state labels.

    Iteration order is the input order and is stable; every report in the
    package sorts subsets by this order so output is deterministic.
    """

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(x) for x in labels)
        if not labels:
            raise ValueError("state space must contain at least one state")
        index = {label: i for i, label in enumerate(labels)}
        if len(index) != len(labels):
            raise ValueError("state labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("StateSpace is immutable")

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, StateSpace) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"StateSpace({list(self.labels)!r})"

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownState(f"unknown state {label!r}") from None

    def subset_mask(self, labels: Iterable[str]) -> np.ndarray:
        """Boolean membership vector for a subset given by labels."""
        mask = np.zeros(self.size, dtype=bool)
        for label in labels:
            mask[self.index(label)] = True
        return mask

    def labels_of(self, mask: np.ndarray) -> tuple[str, ...]:
        """Labels of a boolean membership vector, in input order."""
        return tuple(self.labels[i] for i in np.flatnonzero(mask))


@dataclass(frozen=True)
class Gamble:
    """A real-valued map on the state space."""

    space: StateSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.space.size,):
            raise DimensionMismatch(
                f"gamble has {values.shape} values for a space of size {self.space.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("gamble values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, space: StateSpace, value: float) -> Gamble:
        return cls(space, np.full(space.size, float(value)))

    def __neg__(self) -> Gamble:
        return Gamble(self.space, -self.values)

    def __add__(self, other: Gamble) -> Gamble:
        return Gamble(self.space, self.values + other.values)

    def __mul__(self, scalar: float) -> Gamble:
        return Gamble(self.space, self.values * float(scalar))

    __rmul__ = __mul__

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.space.index(label)])

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def restrict(self, mask: np.ndarray) -> Gamble:
        """Pointwise product with the indicator of ``mask``."""
        return Gamble(self.space, np.where(mask, self.values, 0.0))


@dataclass(frozen=True)
class GambleInterval:
    """The order interval [lower, upper] of gambles."""

    lower: Gamble
    upper: Gamble

    def __post_init__(self):
        if self.lower.space != self.upper.space:
            raise DimensionMismatch("interval endpoints live on different spaces")
        if np.any(self.lower.values > self.upper.values + 1e-12):
            raise ValueError("interval lower endpoint exceeds upper endpoint")

    @classmethod
    def degenerate(cls, f: Gamble) -> GambleInterval:
        return cls(f, f)

    @property
    def space(self) -> StateSpace:
        return self.lower.space


def indicator(space: StateSpace, subset: Iterable[str]) -> Gamble:
    """The 0/1 gamble of a subset of states.

    Raises UnknownState for labels outside the space.  Indicators are
    additive over disjoint subsets and complement to the constant 1.
    """
    return Gamble(space, space.subset_mask(subset).astype(float))
