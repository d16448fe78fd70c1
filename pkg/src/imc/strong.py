"""Strong accessibility between sets of states and permanent classes.

A set A strongly leads to B in one step when every state of A can certainly
move into B: its row contains a mass function with full mass on B.  Unlike
weak accessibility this is a relation between sets, and a set may strongly
lead into two disjoint sets at once, which is what makes the imprecise
structure richer than the precise one.

Two Boolean devices organize the bookkeeping: the family of subsets carrying
full upper mass under a functional (upward closed, stored as its antichain of
minimal members) and the one-step certain-move relation (stored per state as
the antichain of minimal certain targets; the value on a source set is the
conjunction over its states).  Star products compose these and agree with the
relations induced by operator products, which the oracle cross-checks.

A permanent class is a set that arbitrarily late certain moves can land in;
the minimal ones with B strongly leading to itself are the imprecise
counterpart of essential classes.  All subset-lattice work here is gated by
``max_strong_states``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .credal import Ief, can_concentrate
from .errors import RegularityCapExceeded, StateBudgetExceeded
from .model import Config, Gamble, StateSpace, indicator
from .transition import Ito
from .weak import access_graph, strongly_connected_components

__all__ = [
    "SetFunction", "SetRelation",
    "certain_supports", "one_step_relation", "certainly_moves",
    "has_full_upper_mass", "full_mass_sets",
    "propagate_mass_sets", "compose_relations", "relation_power",
    "strongly_leads", "is_permanent", "minimal_permanent_classes",
    "regularity_step",
]


# ---------------------------------------------------------------------------
# Bitmask plumbing
# ---------------------------------------------------------------------------

def _bits_of(space: StateSpace, members) -> int:
    bits = 0
    for label in members:
        bits |= 1 << space.index(label)
    return bits


def _labels_of(space: StateSpace, bits: int) -> tuple[str, ...]:
    return tuple(space.labels[i] for i in range(space.size) if bits >> i & 1)


def _bit_indices(bits: int):
    i = 0
    while bits:
        if bits & 1:
            yield i
        bits >>= 1
        i += 1


def _minimize(masks) -> tuple[int, ...]:
    """Antichain of inclusion-minimal masks, deterministically ordered."""
    unique = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    kept: list[int] = []
    for m in unique:
        if not any(k & ~m == 0 for k in kept):
            kept.append(m)
    return tuple(kept)


def _minimal_unions(antichains) -> tuple[int, ...]:
    """Minimal unions picking one mask from each antichain."""
    acc: tuple[int, ...] = (0,)
    for chain in antichains:
        acc = _minimize(a | m for a in acc for m in chain)
    return acc


def _check_budget(space: StateSpace, config: Config):
    if space.size > config.max_strong_states:
        raise StateBudgetExceeded(
            f"{space.size} states exceed the subset-lattice cap of "
            f"{config.max_strong_states}")


# ---------------------------------------------------------------------------
# Boolean set functions and set relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetFunction:
    """Upward-closed Boolean function on subsets, stored as the antichain of
    its minimal one-sets."""

    space: StateSpace
    minimal: tuple[int, ...]

    def value(self, members) -> bool:
        bits = _bits_of(self.space, members) if not isinstance(members, int) else members
        return any(m & ~bits == 0 for m in self.minimal)

    def minimal_sets(self) -> tuple[tuple[str, ...], ...]:
        return tuple(_labels_of(self.space, m) for m in self.minimal)

    def propagate(self, relation: SetRelation) -> SetFunction:
        """Star product with a relation: the sets certainly reachable from
        some current full-mass set."""
        if relation.space != self.space:
            raise ValueError("set function and relation live on different spaces")
        targets = []
        for m in self.minimal:
            targets.extend(relation.minimal_targets(m))
        return SetFunction(self.space, _minimize(targets))


@dataclass(frozen=True)
class SetRelation:
    """One-step certain-move relation between subsets.

    Monotone: shrinking the source or growing the target preserves the value,
    and the value on a union of sources is the conjunction of the values, so
    per-state antichains of minimal targets determine the whole relation.
    """

    space: StateSpace
    successors: tuple[tuple[int, ...], ...]

    def minimal_targets(self, source_bits: int) -> tuple[int, ...]:
        """Antichain of minimal sets the whole source certainly reaches."""
        chains = [self.successors[x] for x in _bit_indices(source_bits)]
        if not chains:
            return ()
        if any(not chain for chain in chains):
            return ()
        return _minimal_unions(chains)

    def value(self, source, target) -> bool:
        src = _bits_of(self.space, source) if not isinstance(source, int) else source
        dst = _bits_of(self.space, target) if not isinstance(target, int) else target
        if src == 0:
            raise ValueError("source subset must be non-empty")
        return all(any(m & ~dst == 0 for m in self.successors[x])
                   for x in _bit_indices(src))

    def compose(self, other: SetRelation) -> SetRelation:
        """Star product: certain two-leg moves through any intermediate set."""
        if other.space != self.space:
            raise ValueError("relations live on different spaces")
        successors = []
        for chain in self.successors:
            targets = []
            for m in chain:
                targets.extend(other.minimal_targets(m))
            successors.append(_minimize(targets))
        return SetRelation(self.space, tuple(successors))


def propagate_mass_sets(sf: SetFunction, relation: SetRelation) -> SetFunction:
    return sf.propagate(relation)


def compose_relations(first: SetRelation, second: SetRelation) -> SetRelation:
    return first.compose(second)


def relation_power(relation: SetRelation, n: int) -> SetRelation:
    if n < 1:
        raise ValueError("relation power needs n >= 1")
    result = relation
    for _ in range(n - 1):
        result = result.compose(relation)
    return result


# ---------------------------------------------------------------------------
# Relations induced by operators and functionals
# ---------------------------------------------------------------------------

def _certain_support_masks(rows, space: StateSpace, x: int, config: Config) -> tuple[int, ...]:
    """Minimal subsets the row at x can put full mass on, by direct
    enumeration of the subset lattice."""
    n = space.size
    qualifying = []
    for bits in range(1, 1 << n):
        mask = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
        if can_concentrate(rows[x], mask, config):
            qualifying.append(bits)
    return _minimize(qualifying)


def certain_supports(ito: Ito, state: str) -> tuple[tuple[str, ...], ...]:
    """Antichain of minimal sets the state's row can certainly move into."""
    _check_budget(ito.space, ito.config)
    masks = _certain_support_masks(ito.rows, ito.space, ito.space.index(state), ito.config)
    return tuple(_labels_of(ito.space, m) for m in masks)


def one_step_relation(operator) -> SetRelation:
    """The certain-move relation of an operator (an Ito or a materialized
    power, anything exposing coherent per-state rows)."""
    space, config = operator.space, operator.config
    _check_budget(space, config)
    successors = tuple(
        _certain_support_masks(operator.rows, space, x, config)
        for x in range(space.size))
    return SetRelation(space, successors)


def certainly_moves(ito: Ito, source, target) -> bool:
    """Whether every state of the source can certainly move into the target
    in one step."""
    src = ito.space.subset_mask(source)
    dst = ito.space.subset_mask(target)
    if not src.any():
        raise ValueError("source subset must be non-empty")
    return all(can_concentrate(ito.rows[x], dst, ito.config)
               for x in np.flatnonzero(src))


def has_full_upper_mass(handle: Ief, members, config: Config | None = None) -> bool:
    """Whether the subset carries upper probability one under the functional."""
    config = config or Config()
    return handle.upper(indicator(handle.space, members)) >= 1.0 - config.eps_one


def full_mass_sets(handle: Ief, config: Config | None = None) -> SetFunction:
    """All subsets of full upper mass, as the antichain of minimal ones."""
    config = config or Config()
    space = handle.space
    _check_budget(space, config)
    n = space.size
    qualifying = []
    for bits in range(1, 1 << n):
        values = np.array([(bits >> i) & 1 for i in range(n)], dtype=float)
        if handle.upper(Gamble(space, values)) >= 1.0 - config.eps_one:
            qualifying.append(bits)
    return SetFunction(space, _minimize(qualifying))


# ---------------------------------------------------------------------------
# Reachability on the subset lattice
# ---------------------------------------------------------------------------

class _LatticeWalk:
    """Memoized successor expansion over antichains of subset masks."""

    def __init__(self, relation: SetRelation):
        self.relation = relation
        self._memo: dict[int, tuple[int, ...]] = {}

    def targets(self, bits: int) -> tuple[int, ...]:
        got = self._memo.get(bits)
        if got is None:
            got = self.relation.minimal_targets(bits)
            self._memo[bits] = got
        return got

    def leads(self, src_bits: int, dst_bits: int, n: int | None) -> bool:
        """src strongly leads to dst (in exactly n steps, or in some n >= 1).

        Frontiers keep only inclusion-minimal masks: a superset's successors
        are dominated by a subset's, so pruning is lossless both for exact
        step counts and for the existential search.
        """
        if n is not None:
            if n < 1:
                raise ValueError("step count must be a positive integer")
            frontier: tuple[int, ...] = (src_bits,)
            for _ in range(n):
                frontier = _minimize(
                    t for m in frontier for t in self.targets(m))
                if not frontier:
                    return False
            return any(m & ~dst_bits == 0 for m in frontier)
        visited: list[int] = []
        queue = [src_bits]
        while queue:
            current = queue.pop(0)
            for t in self.targets(current):
                if t & ~dst_bits == 0:
                    return True
                if any(v & ~t == 0 for v in visited):
                    continue
                visited[:] = [v for v in visited if not (t & ~v == 0)]
                visited.append(t)
                queue.append(t)
        return False


def strongly_leads(ito: Ito, source, target, n: int | None = None) -> bool:
    """Whether the source set strongly leads to the target set.

    With ``n``, asks for certain arrival in exactly n steps; without, for
    some positive number of steps.  Implemented as breadth-first search on
    the subset lattice over minimal-successor antichains.
    """
    space = ito.space
    _check_budget(space, ito.config)
    src = _bits_of(space, source)
    dst = _bits_of(space, target)
    if src == 0 or dst == 0:
        raise ValueError("source and target subsets must be non-empty")
    walk = _LatticeWalk(one_step_relation(ito))
    return walk.leads(src, dst, n)


def minimal_permanent_classes(ito: Ito) -> list[tuple[str, ...]]:
    """All inclusion-minimal sets that strongly lead to themselves.

    Each returned class lies within a single communication class; that
    structural fact is checked on every output.
    """
    space = ito.space
    _check_budget(space, ito.config)
    walk = _LatticeWalk(one_step_relation(ito))
    n = space.size
    found: list[int] = []
    for bits in sorted(range(1, 1 << n), key=lambda b: (bin(b).count("1"), b)):
        if any(f & ~bits == 0 for f in found):
            continue
        if walk.leads(bits, bits, None):
            found.append(bits)

    membership = {}
    for c, members in enumerate(strongly_connected_components(access_graph(ito).matrix)):
        for v in members:
            membership[v] = c
    for bits in found:
        classes = {membership[i] for i in _bit_indices(bits)}
        assert len(classes) == 1, \
            "minimal permanent class spans several communication classes"
    return [_labels_of(space, bits) for bits in found]


def is_permanent(ito: Ito, members) -> bool:
    """Whether arbitrarily late certain moves can land in the set.

    Decided through the equivalence with minimal permanent classes: the set
    is permanent iff it strongly leads to itself or some minimal permanent
    class strongly leads to it.
    """
    space = ito.space
    _check_budget(space, ito.config)
    bits = _bits_of(space, members)
    if bits == 0:
        return False
    walk = _LatticeWalk(one_step_relation(ito))
    if walk.leads(bits, bits, None):
        return True
    for cls in minimal_permanent_classes(ito):
        cls_bits = _bits_of(space, cls)
        if cls_bits == bits or walk.leads(cls_bits, bits, None):
            return True
    return False


def regularity_step(ito: Ito, members) -> int:
    """Smallest r with the r-step uppers pairwise positive on the class and
    the class certainly retained from each of its states.

    Valid for minimal permanent classes; raises RegularityCapExceeded when no
    r within ``max_power_r`` qualifies (periodic classes need r equal to a
    multiple of the period).
    """
    space = ito.space
    config = ito.config
    mask = space.subset_mask(members)
    member_idx = np.flatnonzero(mask)
    if member_idx.size == 0:
        raise ValueError("class must be non-empty")
    eye = np.eye(space.size)
    singleton_uppers = [Gamble(space, eye[y]) for y in member_idx]
    retained = Gamble(space, mask.astype(float))
    for r in range(1, config.max_power_r + 1):
        singleton_uppers = [ito.upper(g) for g in singleton_uppers]
        retained = ito.upper(retained)
        pairwise = all(
            g.values[x] > config.eps_pos
            for g in singleton_uppers for x in member_idx)
        kept = bool(np.all(retained.values[member_idx] >= 1.0 - config.eps_one))
        if pairwise and kept:
            return r
    raise RegularityCapExceeded(
        f"no regularity step r <= {config.max_power_r} for class "
        f"{tuple(members)!r}")
