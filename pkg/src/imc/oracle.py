"""Brute-force reference implementations for the test suite.

Everything here maximizes by direct enumeration over selection sequences of
vertex matrices, deliberately avoiding the per-state recursive maximization
used by the main path, so equivalence tests between the two are meaningful.
Budgets are hard errors, never silent truncation; the defaults cover spaces
of at most four states, three vertices per row and four steps, and callers
may widen them explicitly (interval rows converted to vertex form can carry
more than three extreme points).
"""

from __future__ import annotations

from collections.abc import Sequence
from itertools import product

import numpy as np

from .credal import row_vertices
from .errors import BudgetExceeded, NotPrecise
from .model import Gamble
from .transition import Ito

__all__ = ["brute_seq_upper", "brute_power_upper", "brute_tau_table",
           "brute_minimal_permanent", "classical_recurrent_classes"]

_WORK_CAP = 64_000_000


def _selection_matrices(ito: Ito, max_row_vertices: int) -> np.ndarray:
    """All transition matrices assembled from one vertex choice per row."""
    rows = [row_vertices(row, ito.config).vertices for row in ito.rows]
    for v in rows:
        if v.shape[0] > max_row_vertices:
            raise BudgetExceeded(
                f"row with {v.shape[0]} vertices exceeds the oracle budget "
                f"of {max_row_vertices}")
    n = ito.space.size
    count = int(np.prod([v.shape[0] for v in rows]))
    mats = np.empty((count, n, n))
    for j, picks in enumerate(product(*(range(v.shape[0]) for v in rows))):
        for x, i in enumerate(picks):
            mats[j, x] = rows[x][i]
    return mats


def brute_seq_upper(itos: Sequence[Ito], f: Gamble, *, max_states: int = 4,
                    max_row_vertices: int = 3, max_steps: int = 4,
                    work_cap: int = _WORK_CAP) -> Gamble:
    """Upper envelope of an operator-sequence image of a gamble.

    For operators T1..Tk the composed image is T1[T2[...Tk f]]; the oracle
    enumerates every selection of a vertex matrix per factor and maximizes
    the resulting gamble coordinate-wise at the end.  The last factor is
    applied first, so intermediate achievable-gamble sets are materialized
    and the outermost application is streamed in chunks.
    """
    if not itos:
        return f
    space = itos[0].space
    if any(t.space != space for t in itos):
        raise ValueError("operator sequence must share one state space")
    if space.size > max_states:
        raise BudgetExceeded(f"{space.size} states exceed the oracle budget")
    if len(itos) > max_steps:
        raise BudgetExceeded(f"{len(itos)} steps exceed the oracle budget")

    per_step = [_selection_matrices(t, max_row_vertices) for t in itos]
    achievable = f.values[None, :]
    for step, mats in enumerate(reversed(per_step)):
        m, q = mats.shape[0], achievable.shape[0]
        if m * q > work_cap:
            raise BudgetExceeded(
                f"{m * q} selection sequences exceed the oracle work cap")
        last = step == len(per_step) - 1
        if last:
            envelope = np.full(space.size, -np.inf)
            chunk = max(1, 4_000_000 // (m * space.size))
            for start in range(0, q, chunk):
                block = np.einsum("msy,qy->mqs", mats,
                                  achievable[start:start + chunk])
                envelope = np.maximum(envelope, block.max(axis=(0, 1)))
            return Gamble(space, envelope)
        achievable = np.einsum("msy,qy->mqs", mats,
                               achievable).reshape(-1, space.size)
    return Gamble(space, achievable.max(axis=0))


def brute_power_upper(ito: Ito, n: int, f: Gamble, *, max_states: int = 4,
                      max_row_vertices: int = 3, max_steps: int = 4,
                      work_cap: int = _WORK_CAP) -> Gamble:
    """Exact n-step upper envelope by enumerating selection sequences."""
    if n < 0:
        raise ValueError("step count must be nonnegative")
    return brute_seq_upper([ito] * n, f, max_states=max_states,
                           max_row_vertices=max_row_vertices,
                           max_steps=max_steps, work_cap=work_cap)


def brute_tau_table(ito: Ito, n: int = 1, *, max_states: int = 4,
                    max_row_vertices: int = 3, max_steps: int = 4) -> dict:
    """Full n-step certain-move table over pairs of non-empty subsets.

    Keys are (source labels, target labels) tuples; the value is whether every
    source state reaches the target with n-step upper probability one,
    straight from the brute-force envelopes of indicator gambles.
    """
    if n < 1:
        raise BudgetExceeded("certain-move tables need n >= 1")
    space = ito.space
    if space.size > max_states:
        raise BudgetExceeded(f"{space.size} states exceed the oracle budget")
    size = space.size
    eps_one = ito.config.eps_one
    table = {}
    for dst_bits in range(1, 1 << size):
        dst = [i for i in range(size) if dst_bits >> i & 1]
        values = np.zeros(size)
        values[dst] = 1.0
        envelope = brute_power_upper(
            ito, n, Gamble(space, values), max_states=max_states,
            max_row_vertices=max_row_vertices, max_steps=max_steps).values
        for src_bits in range(1, 1 << size):
            src = [i for i in range(size) if src_bits >> i & 1]
            key = (tuple(space.labels[i] for i in src),
                   tuple(space.labels[i] for i in dst))
            table[key] = bool(np.all(envelope[src] >= 1.0 - eps_one))
    return table


def brute_minimal_permanent(ito: Ito) -> list[tuple[str, ...]]:
    """Ground-truth minimal permanent classes by exhaustive subset search.

    Builds the full one-step certain-move table, takes the transitive closure
    of the induced digraph on non-empty subsets (paths of length up to the
    lattice size), and keeps the inclusion-minimal subsets lying on a cycle
    through themselves.
    """
    space = ito.space
    if space.size > 4:
        raise BudgetExceeded(f"{space.size} states exceed the oracle budget")
    size = space.size
    table = brute_tau_table(ito, 1)
    subsets = list(range(1, 1 << size))
    index = {bits: i for i, bits in enumerate(subsets)}

    def labels(bits):
        return tuple(space.labels[i] for i in range(size) if bits >> i & 1)

    adjacency = np.zeros((len(subsets), len(subsets)), dtype=bool)
    for a in subsets:
        for b in subsets:
            adjacency[index[a], index[b]] = table[(labels(a), labels(b))]
    closure = adjacency.copy()
    for _ in range(len(subsets).bit_length()):
        closure = closure | ((closure.astype(np.uint8) @ closure.astype(np.uint8)) > 0)
    self_leading = [bits for bits in subsets if closure[index[bits], index[bits]]]

    minimal = []
    for bits in sorted(self_leading, key=lambda b: (bin(b).count("1"), b)):
        if not any(m & ~bits == 0 for m in minimal):
            minimal.append(bits)
    return [labels(bits) for bits in minimal]


def classical_recurrent_classes(ito: Ito) -> list[tuple[str, ...]]:
    """Closed recurrent classes of a precise chain, via Warshall closure.

    Raises NotPrecise when any row is a non-degenerate credal set.  The
    imprecise minimal permanent classes refine these (cyclic sub-classes);
    suites compare closed-class unions.
    """
    rows = []
    for label, row in zip(ito.space.labels, ito.rows):
        if not row.is_precise():
            raise NotPrecise(f"row {label!r} is not precise")
        rows.append(row_vertices(row, ito.config).vertices[0])
    matrix = np.stack(rows)
    size = ito.space.size
    adjacency = matrix > ito.config.eps_pos

    reach = adjacency | np.eye(size, dtype=bool)
    for k in range(size):
        reach = reach | (reach[:, k, None] & reach[None, k, :])

    mutual = reach & reach.T
    assigned = np.full(size, -1)
    classes: list[list[int]] = []
    for x in range(size):
        if assigned[x] >= 0:
            continue
        members = sorted(np.flatnonzero(mutual[x]).tolist())
        for y in members:
            assigned[y] = len(classes)
        classes.append(members)

    closed = []
    for members in classes:
        reachable = np.zeros(size, dtype=bool)
        for x in members:
            reachable |= reach[x]
        if set(np.flatnonzero(reachable)) <= set(members):
            closed.append(tuple(ito.space.labels[i] for i in members))
    return sorted(closed, key=lambda c: ito.space.index(c[0]))
