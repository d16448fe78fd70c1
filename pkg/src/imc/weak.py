"""Weak accessibility: the upper-probability reachability structure.

State y is accessible from x when the upper probability of reaching y from x
in some number of steps is strictly positive.  Mutual accessibility partitions
the space into communication classes; the quotient is a DAG whose unique sink,
when it exists, is the top class.  A class is regular when its internal
accessibility is eventually all-pairs at every sufficiently large step count
(period one); the chain is regularly absorbing when additionally the lower
probability of eventually entering the top class is positive from every
outside state, the gate under which the cited unique-convergence theorem
applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .model import Config, Gamble, StateSpace
from .transition import Ito

__all__ = ["AccessGraph", "access_graph", "accessible", "is_absorbing",
           "ClassInfo", "Classification", "classify",
           "strongly_connected_components"]


@dataclass(frozen=True)
class AccessGraph:
    """One-step accessibility: edge x -> y iff the row at x gives y positive
    upper probability."""

    space: StateSpace
    matrix: np.ndarray  # boolean adjacency

    def __post_init__(self):
        self.matrix.flags.writeable = False


def access_graph(ito: Ito) -> AccessGraph:
    n = ito.space.size
    matrix = np.zeros((n, n), dtype=bool)
    eye = np.eye(n)
    for x, row in enumerate(ito.rows):
        for y in range(n):
            matrix[x, y] = row.upper(eye[y]) > ito.config.eps_pos
    return AccessGraph(ito.space, matrix)


def _bool_power(matrix: np.ndarray, n: int) -> np.ndarray:
    """Boolean matrix power by squaring; entry (x, y) marks an x->y walk of
    length exactly n."""
    result = np.eye(matrix.shape[0], dtype=bool)
    base = matrix.copy()
    while n > 0:
        if n & 1:
            result = (result.astype(np.uint8) @ base.astype(np.uint8)) > 0
        base = (base.astype(np.uint8) @ base.astype(np.uint8)) > 0
        n >>= 1
    return result


def reachability(matrix: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a boolean adjacency matrix."""
    closure = matrix | np.eye(matrix.shape[0], dtype=bool)
    for _ in range(max(1, matrix.shape[0].bit_length())):
        closure = (closure.astype(np.uint8) @ closure.astype(np.uint8)) > 0
    return closure


def accessible(graph: AccessGraph, x: str, y: str, n: int | None = None) -> bool:
    """Whether y is accessible from x (walk of length exactly n, or any
    length including zero when n is omitted)."""
    i, j = graph.space.index(x), graph.space.index(y)
    if n is None:
        return bool(reachability(graph.matrix)[i, j])
    if n < 0:
        raise ValueError("step count must be nonnegative")
    return bool(_bool_power(graph.matrix, n)[i, j])


def is_absorbing(graph: AccessGraph, members) -> bool:
    """True when no one-step edge leaves the subset."""
    mask = graph.space.subset_mask(members)
    return not graph.matrix[mask][:, ~mask].any()


def strongly_connected_components(matrix: np.ndarray) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components sorted by smallest member."""
    n = matrix.shape[0]
    order = np.full(n, -1)
    low = np.zeros(n, dtype=int)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    successors = [list(np.flatnonzero(matrix[v])) for v in range(n)]

    for root in range(n):
        if order[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pointer = work.pop()
            if pointer == 0:
                order[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(pointer, len(successors[v])):
                w = successors[v][k]
                if order[w] == -1:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], order[w])
            if advanced:
                continue
            if low[v] == order[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                components.append(sorted(component))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    components.sort(key=min)
    return components


def _class_period(matrix: np.ndarray, members: list[int]) -> int | None:
    """gcd of internal cycle lengths, or None when the class has no cycle.

    Uses BFS levels from an arbitrary root: within a strongly connected
    subgraph the period is the gcd of depth(u) + 1 - depth(v) over internal
    edges (u, v).
    """
    sub = matrix[np.ix_(members, members)]
    m = len(members)
    if not sub.any():
        return None
    depth = np.full(m, -1)
    depth[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(sub[u]):
                if depth[v] == -1:
                    depth[v] = depth[u] + 1
                    nxt.append(v)
        frontier = nxt
    period = 0
    for u in range(m):
        for v in np.flatnonzero(sub[u]):
            period = gcd(period, int(depth[u]) + 1 - int(depth[v]))
    return abs(period) or None


def _regularity_witness(matrix: np.ndarray, members: list[int]) -> int | None:
    """Smallest r with all-pairs internal access at every step count >= r.

    Bounded by Wielandt's primitivity index (m-1)^2 + 1; all-ones boolean
    powers are absorbing for strongly connected subgraphs, so the first
    all-ones power is the witness.
    """
    sub = matrix[np.ix_(members, members)]
    m = len(members)
    power = sub.copy()
    for r in range(1, (m - 1) ** 2 + 2):
        if power.all():
            return r
        power = (power.astype(np.uint8) @ sub.astype(np.uint8)) > 0
    return None


@dataclass(frozen=True)
class ClassInfo:
    members: tuple[str, ...]
    regular: bool
    period: int | None
    regularity_witness: int | None
    absorbing: bool
    closure: tuple[str, ...]


@dataclass(frozen=True)
class Classification:
    space: StateSpace
    classes: tuple[ClassInfo, ...]
    edges: tuple[tuple[int, int], ...]
    maximal: tuple[int, ...]
    top: int | None
    regularly_absorbing: bool
    absorption_witness: int | None
    thresholds: tuple[tuple[str, float], ...]

    @property
    def top_class(self) -> ClassInfo | None:
        return None if self.top is None else self.classes[self.top]


def classify(ito: Ito) -> Classification:
    """Full weak-accessibility classification of the chain.

    Communication classes are the strongly connected components of the access
    graph.  The regular-absorption check iterates the lower operator on the
    top-class indicator; that sequence is pointwise non-decreasing (the top
    class is absorbing), so the positive region grows or stabilizes and |X|
    steps suffice for the witness search.
    """
    config = ito.config
    graph = access_graph(ito)
    matrix = graph.matrix
    space = ito.space
    components = strongly_connected_components(matrix)
    membership = np.zeros(space.size, dtype=int)
    for c, members in enumerate(components):
        for v in members:
            membership[v] = c

    edge_set = set()
    for x in range(space.size):
        for y in np.flatnonzero(matrix[x]):
            if membership[x] != membership[y]:
                edge_set.add((membership[x], int(membership[y])))
    edges = tuple(sorted(edge_set))

    closure_matrix = reachability(matrix)
    infos = []
    for members in components:
        period = _class_period(matrix, members)
        regular = period == 1
        witness = _regularity_witness(matrix, members) if regular else None
        closure = np.zeros(space.size, dtype=bool)
        for v in members:
            closure |= closure_matrix[v]
        member_labels = tuple(space.labels[v] for v in members)
        infos.append(ClassInfo(
            members=member_labels,
            regular=regular,
            period=period,
            regularity_witness=witness,
            absorbing=is_absorbing(graph, member_labels),
            closure=space.labels_of(closure),
        ))

    outgoing = {c for c, _ in edges}
    maximal = tuple(c for c in range(len(components)) if c not in outgoing)
    top = maximal[0] if len(maximal) == 1 else None

    regularly_absorbing = False
    absorption_witness: int | None = None
    if top is not None and infos[top].regular:
        top_mask = space.subset_mask(infos[top].members)
        if top_mask.all():
            regularly_absorbing = True
            absorption_witness = 0
        else:
            g = Gamble(space, top_mask.astype(float))
            for n in range(1, space.size + 1):
                g = ito.lower(g)
                if np.all(g.values[~top_mask] > config.eps_pos):
                    regularly_absorbing = True
                    absorption_witness = n
                    break

    return Classification(
        space=space,
        classes=tuple(infos),
        edges=edges,
        maximal=maximal,
        top=top,
        regularly_absorbing=regularly_absorbing,
        absorption_witness=absorption_witness,
        thresholds=(("eps_pos", config.eps_pos), ("eps_one", config.eps_one)),
    )
