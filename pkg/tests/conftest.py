"""Shared fixtures: the worked examples and random-instance generators."""

from __future__ import annotations

import numpy as np
import pytest

from imc import (
    Config,
    Gamble,
    IntervalRow,
    Ito,
    StateSpace,
    VertexRow,
)


@pytest.fixture
def two_state() -> Ito:
    """Rows a:(1,0), b:(0.5,0.5); a absorbs, b leaks to a with mass 1/2."""
    space = StateSpace(["a", "b"])
    return Ito(space, [VertexRow([[1.0, 0.0]]), VertexRow([[0.5, 0.5]])])


@pytest.fixture
def swap() -> Ito:
    """Deterministic two-cycle: a -> b -> a."""
    space = StateSpace(["a", "b"])
    return Ito(space, [VertexRow([[0.0, 1.0]]), VertexRow([[1.0, 0.0]])])


def make_example1(config: Config | None = None) -> Ito:
    """Block operator: precise doubly-stochastic top block {a,b}; rows c,d
    interval with upper (but zero lower) mass back into the top block."""
    space = StateSpace(["a", "b", "c", "d"])
    top = VertexRow([[0.5, 0.5, 0.0, 0.0]])
    leak = IntervalRow([0.0, 0.0, 0.3, 0.3], [0.2, 0.2, 0.7, 0.7])
    return Ito(space, [top, top, leak,
                       IntervalRow([0.0, 0.0, 0.3, 0.3], [0.2, 0.2, 0.7, 0.7])],
               config)


@pytest.fixture
def example1() -> Ito:
    return make_example1()


@pytest.fixture
def three_blocks() -> Ito:
    """Three isolated precise regular absorbing blocks, zero cross mass."""
    space = StateSpace(["a", "b", "c", "d"])
    top = VertexRow([[0.5, 0.5, 0.0, 0.0]])
    return Ito(space, [top, top,
                       VertexRow([[0.0, 0.0, 1.0, 0.0]]),
                       VertexRow([[0.0, 0.0, 0.0, 1.0]])])


def make_triangular(interval_escape: bool) -> Ito:
    """Transient state t with strictly positive lower escape into the regular
    block {a,b}; state c is a separate absorbing singleton."""
    space = StateSpace(["a", "b", "c", "t"])
    top = VertexRow([[0.5, 0.5, 0.0, 0.0]])
    c_row = VertexRow([[0.0, 0.0, 1.0, 0.0]])
    if interval_escape:
        t_row = IntervalRow([0.2, 0.2, 0.0, 0.0], [0.4, 0.4, 0.0, 0.6])
    else:
        t_row = VertexRow([[0.3, 0.3, 0.0, 0.4]])
    return Ito(space, [top, top, c_row, t_row])


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def random_vertex_row(rng: np.random.Generator, n: int,
                      max_vertices: int = 3) -> VertexRow:
    count = int(rng.integers(1, max_vertices + 1))
    vertices = []
    for _ in range(count):
        support_size = int(rng.integers(1, n + 1))
        support = rng.choice(n, size=support_size, replace=False)
        weights = rng.dirichlet(np.ones(support_size))
        vertex = np.zeros(n)
        vertex[support] = weights
        vertices.append(vertex)
    return VertexRow(np.array(vertices))


def random_interval_row(rng: np.random.Generator, n: int) -> IntervalRow:
    support_size = int(rng.integers(1, n + 1))
    support = rng.choice(n, size=support_size, replace=False)
    center = np.zeros(n)
    center[support] = rng.dirichlet(np.ones(support_size))
    width = rng.uniform(0.0, 0.5, n)
    lower = np.clip(center - width, 0.0, 1.0)
    upper = np.clip(center + width, 0.0, 1.0)
    unreachable = (center == 0.0) & (rng.random(n) < 0.5)
    upper[unreachable] = 0.0
    return IntervalRow(lower, upper)


def random_ito(rng: np.random.Generator, n: int, forms: str = "mixed",
               max_vertices: int = 3, config: Config | None = None) -> Ito:
    space = StateSpace([f"s{i}" for i in range(n)])
    rows = []
    for _ in range(n):
        if forms == "vertex" or (forms == "mixed" and rng.random() < 0.6):
            rows.append(random_vertex_row(rng, n, max_vertices))
        else:
            rows.append(random_interval_row(rng, n))
    return Ito(space, rows, config)


def random_precise_ito(rng: np.random.Generator, n: int) -> Ito:
    space = StateSpace([f"s{i}" for i in range(n)])
    rows = []
    for _ in range(n):
        support_size = int(rng.integers(1, n + 1))
        support = rng.choice(n, size=support_size, replace=False)
        vertex = np.zeros(n)
        vertex[support] = rng.dirichlet(np.ones(support_size))
        rows.append(VertexRow([vertex]))
    return Ito(space, rows)


def random_lazy_ito(rng: np.random.Generator, n: int) -> Ito:
    """Random operator with self-loop mass on every vertex, so every
    communication class is aperiodic and vacuous iterations settle."""
    space = StateSpace([f"s{i}" for i in range(n)])
    rows = []
    for x in range(n):
        base = random_vertex_row(rng, n).vertices
        hold = rng.uniform(0.2, 0.6)
        lazy = (1.0 - hold) * base
        lazy[:, x] += hold
        rows.append(VertexRow(lazy))
    return Ito(space, rows)


def random_gamble(rng: np.random.Generator, space: StateSpace,
                  low: float = -1.0, high: float = 1.0) -> Gamble:
    return Gamble(space, rng.uniform(low, high, space.size))
