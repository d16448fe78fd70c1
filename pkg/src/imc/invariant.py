"""Invariant imprecise expectation functionals and convergence analysis.

The least committal invariant functional supported on an absorbing set S is
the limit of iterating the upper operator from the vacuous functional on S:
per gamble, the sequence max over S of the iterated upper gamble is
non-increasing (asserted at every step) and its limit is the upper envelope
of the invariant functional.

Per-class invariants nest two iterations: an inner one through the restricted
r-step operator that surely keeps mass inside the class (vacuous-on-class
evaluation, non-increasing), and an outer continuation through the full
operator (non-decreasing when the regularity step is one).  Inner and outer
tolerances are separated by a factor of ten so stacking cannot mask
non-convergence, and periodic oscillation surfaces as NonConvergent with the
oscillation bracket rather than being averaged away.

Equality of limit functionals is certified on a finite test family (all
subset indicators plus 32 seeded random [0, 1] gambles) and reported as
agreement on that family, never as full equality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .credal import Ief, VacuousIef
from .errors import AbsorbingViolation, NonConvergent
from .model import Config, Gamble, StateSpace
from .strong import minimal_permanent_classes, regularity_step
from .transition import Ito, MaterializedPower, restrict_to_class
from .weak import access_graph, classify, is_absorbing, reachability

__all__ = [
    "LimitFunctional", "VacuousLimit", "ClassLimit",
    "support_closure", "least_committal_invariant", "is_extremal",
    "class_invariant", "ClassVerdict", "ConvergenceReport",
    "classify_convergence", "ExtremalInvariant", "extremal_invariants",
    "indicator_family", "test_family",
]

_MONOTONE_SLACK = 1e-12
_FAMILY_SEED = 202_406


class LimitFunctional(Ief):
    """Lazily iterated limit of an expectation functional under an operator.

    Evaluation is deterministic given the configuration; per-gamble values
    are cached and reproducible.  ``last_iterations`` and ``last_residual``
    expose the convergence metadata of the most recent uncached evaluation.
    """

    is_explicit = False

    def __init__(self, ito: Ito):
        self.ito = ito
        self.space = ito.space
        self.config = ito.config
        self.last_iterations = 0
        self.last_residual = float("nan")
        self._cache: dict[bytes, float] = {}

    @property
    def base(self) -> Ief:
        raise NotImplementedError

    @property
    def chain(self) -> tuple[tuple[object, str], ...]:
        raise NotImplementedError

    def _compute(self, values: np.ndarray) -> float:
        raise NotImplementedError

    def upper(self, f: Gamble) -> float:
        self._check(f)
        key = f.values.tobytes()
        got = self._cache.get(key)
        if got is None:
            got = self._compute(f.values)
            self._cache[key] = got
        return got


class VacuousLimit(LimitFunctional):
    """Least committal invariant functional on an absorbing set.

    upper(f) = lim_n max over S of the n-fold upper image of f; the sequence
    is non-increasing because S is absorbing, and iteration stops once
    successive values differ by at most ``eps_conv``.
    """

    def __init__(self, ito: Ito, members):
        super().__init__(ito)
        self.mask = ito.space.subset_mask(members)
        if not self.mask.any():
            raise ValueError("absorbing set must be non-empty")

    @property
    def members(self) -> tuple[str, ...]:
        return self.space.labels_of(self.mask)

    @property
    def base(self) -> Ief:
        return VacuousIef(self.space, self.members)

    @property
    def chain(self) -> tuple[tuple[object, str], ...]:
        return ((self.ito, "upper-envelope"),)

    def _compute(self, values: np.ndarray) -> float:
        config = self.config
        rows = self.ito.rows
        g = values
        v = float(g[self.mask].max())
        trail = [v]
        for it in range(1, config.max_iter + 1):
            g = np.array([row.upper(g) for row in rows])
            v_next = float(g[self.mask].max())
            assert v_next <= v + _MONOTONE_SLACK, \
                "vacuous iteration increased on an absorbing set"
            trail.append(v_next)
            if abs(v - v_next) <= config.eps_conv:
                self.last_iterations = it
                self.last_residual = abs(v - v_next)
                return v_next
            v = v_next
        tail = trail[-8:]
        raise NonConvergent(
            f"no convergence within {config.max_iter} iterations",
            bracket=(min(tail), max(tail)), iterations=config.max_iter)


class ClassLimit(LimitFunctional):
    """Per-class invariant functional via nested restricted/full iteration.

    The inner stage evaluates the vacuous-on-class functional through the
    restricted r-step operator until the class maximum stabilizes at
    ``eps_conv``; the outer stage continues through the full operator at
    tolerance ``10 * eps_conv``.  With regularity step one the outer values
    are non-decreasing (asserted); for larger steps each residue class mod r
    is monotone, and residues that stabilize at different values raise
    NonConvergent with the oscillation bracket.
    """

    def __init__(self, ito: Ito, members, r: int, restricted: MaterializedPower):
        super().__init__(ito)
        self.mask = ito.space.subset_mask(members)
        if not self.mask.any():
            raise ValueError("class must be non-empty")
        self.r = r
        self.restricted = restricted
        self.inner_iterations = 0

    @property
    def members(self) -> tuple[str, ...]:
        return self.space.labels_of(self.mask)

    @property
    def base(self) -> Ief:
        return VacuousIef(self.space, self.members)

    @property
    def chain(self) -> tuple[tuple[object, str], ...]:
        return ((self.restricted, "inner-restricted"), (self.ito, "outer-full"))

    def _inner(self, values: np.ndarray) -> float:
        config = self.config
        rows = self.restricted.rows
        h = values
        w = float(h[self.mask].max())
        for it in range(1, config.max_iter + 1):
            h = np.array([row.upper(h) for row in rows])
            w_next = float(h[self.mask].max())
            assert w_next <= w + _MONOTONE_SLACK, \
                "restricted iteration increased on the class"
            if abs(w - w_next) <= config.eps_conv:
                self.inner_iterations += it
                return w_next
            w = w_next
        raise NonConvergent(
            f"inner restricted iteration did not settle within {config.max_iter}",
            bracket=(w, w), iterations=config.max_iter)

    def _compute(self, values: np.ndarray) -> float:
        config = self.config
        outer_tol = 10.0 * config.eps_conv
        rows = self.ito.rows
        r = self.r
        g = values
        history: list[float] = []
        for m in range(config.max_iter):
            history.append(self._inner(g))
            if r == 1 and len(history) >= 2:
                assert history[-1] >= history[-2] - _MONOTONE_SLACK, \
                    "outer iteration decreased at regularity step one"
            if len(history) >= 2 * r:
                window = history[-2 * r:]
                if max(window) - min(window) <= outer_tol:
                    self.last_iterations = m + 1
                    self.last_residual = max(window) - min(window)
                    return history[-1]
                if all(abs(window[i + r] - window[i]) <= outer_tol for i in range(r)):
                    cycle = window[-r:]
                    raise NonConvergent(
                        "outer iteration oscillates with the class period",
                        bracket=(min(cycle), max(cycle)), iterations=m + 1)
            g = np.array([row.upper(g) for row in rows])
        tail = history[-2 * r:] or history
        raise NonConvergent(
            f"no outer convergence within {config.max_iter} iterations",
            bracket=(min(tail), max(tail)), iterations=config.max_iter)


def support_closure(handle: Ief, ito: Ito) -> tuple[str, ...]:
    """Weak-accessibility closure of the functional's support; absorbing by
    construction (and asserted)."""
    if not handle.is_explicit:
        raise TypeError("support_closure needs an explicit handle")
    graph = access_graph(ito)
    closure_matrix = reachability(graph.matrix)
    mask = handle.support_mask(ito.config)
    closed = np.zeros(ito.space.size, dtype=bool)
    for i in np.flatnonzero(mask):
        closed |= closure_matrix[i]
    labels = ito.space.labels_of(closed)
    assert is_absorbing(graph, labels), "support closure is not absorbing"
    return labels


def least_committal_invariant(ito: Ito, members) -> VacuousLimit:
    """Limit of vacuous iteration on an absorbing set (checked)."""
    if not is_absorbing(access_graph(ito), members):
        raise AbsorbingViolation(f"{tuple(members)!r} is not absorbing")
    return VacuousLimit(ito, members)


def is_extremal(handle: Ief, classes, config: Config | None = None) -> bool:
    """Whether every minimal permanent class carries upper probability 0 or 1."""
    config = config or Config()
    for members in classes:
        mask = handle.space.subset_mask(members)
        u = handle.upper(Gamble(handle.space, mask.astype(float)))
        if config.eps_one < u < 1.0 - config.eps_one:
            return False
    return True


def class_invariant(ito: Ito, members) -> ClassLimit:
    """Invariant functional associated with a minimal permanent class."""
    r = regularity_step(ito, members)
    restricted = restrict_to_class(ito, members, r)
    return ClassLimit(ito, members, r, restricted)


# ---------------------------------------------------------------------------
# Test family and convergence classification
# ---------------------------------------------------------------------------

def indicator_family(space: StateSpace, config: Config | None = None) -> list[Gamble]:
    """Indicators of all subsets (singletons and the full space only when the
    lattice is over budget), in deterministic order."""
    config = config or Config()
    n = space.size
    if n <= config.max_strong_states:
        masks = [np.array([(bits >> i) & 1 for i in range(n)], dtype=float)
                 for bits in sorted(range(1 << n),
                                    key=lambda b: (bin(b).count("1"), b))]
    else:
        masks = [np.zeros(n)] + [np.eye(n)[i] for i in range(n)] + [np.ones(n)]
    return [Gamble(space, m) for m in masks]


def test_family(space: StateSpace, config: Config | None = None) -> list[Gamble]:
    """Subset indicators plus 32 seeded random [0, 1] gambles."""
    rng = np.random.default_rng(_FAMILY_SEED)
    family = indicator_family(space, config)
    family.extend(Gamble(space, rng.uniform(0.0, 1.0, space.size))
                  for _ in range(32))
    return family


@dataclass(frozen=True)
class ClassVerdict:
    members: tuple[str, ...]
    verdict: str                 # "one" | "zero" | "indeterminate"
    limit_upper: float
    settled_at: int | None


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of the two-theorem convergence pipeline for one initial
    functional.

    ``extremal_over_window`` records whether every observed iterate assigned
    each minimal permanent class upper probability 0 or 1; it certifies the
    iteration window only, not every step of the infinite sequence.
    The limit functional is present only when every class verdict settled to
    0 or 1; residuals are maxima over the test family, so equality statements
    are agreement on that family.
    """

    classes: tuple[ClassVerdict, ...]
    closure: tuple[str, ...]
    extremal_over_window: bool
    window: int
    limit: VacuousLimit | None
    invariance_residual: float | None
    agreement_residual: float | None
    thresholds: tuple[tuple[str, float], ...]
    warnings: tuple[str, ...]

    @property
    def all_settled(self) -> bool:
        return all(c.verdict in ("one", "zero") for c in self.classes)


def _direct_limit(initial: Ief, ito: Ito, f: Gamble, tol: float,
                  cap: int) -> tuple[float, bool]:
    """Iterated value initial upper of the n-step upper image, stopped after
    three consecutive sub-tolerance moves."""
    g = f
    value = initial.upper(g)
    quiet = 0
    for _ in range(cap):
        g = ito.upper(g)
        nxt = initial.upper(g)
        quiet = quiet + 1 if abs(nxt - value) <= tol else 0
        value = nxt
        if quiet >= 3:
            return value, True
    return value, False


def classify_convergence(initial: Ief, ito: Ito) -> ConvergenceReport:
    """Track per-class upper probabilities, settle 0/1 verdicts, and when all
    settle return the limit functional with its certification residuals.

    A verdict settles once the value stays inside [0, eps_one] or
    [1 - eps_one, 1] for three consecutive iterations; class uppers are
    non-decreasing along regularity-step multiples once positive, which the
    stability rule exploits.  When every verdict is 0 or 1 the limit equals
    the least committal invariant on the closure of the initial support, and
    the report carries the invariance residual of that functional plus the
    agreement between it and the directly iterated initial values over the
    test family.
    """
    if not initial.is_explicit:
        raise TypeError("classify_convergence needs an explicit initial handle")
    config = ito.config
    space = ito.space
    classes = minimal_permanent_classes(ito)
    warnings: list[str] = []

    gambles = [Gamble(space, space.subset_mask(m).astype(float)) for m in classes]
    uppers = [initial.upper(g) for g in gambles]
    streaks = [0] * len(classes)
    bands = [None] * len(classes)
    settled: list[int | None] = [None] * len(classes)
    extremal_ok = True
    window = 0

    for n in range(config.max_iter + 1):
        window = n + 1
        for k, u in enumerate(uppers):
            in_one = u >= 1.0 - config.eps_one
            in_zero = u <= config.eps_one
            if not (in_one or in_zero):
                extremal_ok = False
                streaks[k] = 0
                bands[k] = None
            else:
                band = "one" if in_one else "zero"
                streaks[k] = streaks[k] + 1 if bands[k] == band else 1
                bands[k] = band
                if streaks[k] >= 3 and settled[k] is None:
                    settled[k] = n
        if all(s is not None for s in settled):
            break
        if n == config.max_iter:
            break
        gambles = [ito.upper(g) for g in gambles]
        uppers = [initial.upper(g) for g in gambles]

    verdicts = []
    for k, members in enumerate(classes):
        if settled[k] is not None:
            verdicts.append(ClassVerdict(members, bands[k], uppers[k], settled[k]))
        else:
            verdicts.append(ClassVerdict(members, "indeterminate", uppers[k], None))
            warnings.append(
                f"class {members!r} upper probability did not settle within "
                f"{config.max_iter} iterations")

    closure = support_closure(initial, ito)
    limit = None
    invariance_residual = None
    agreement_residual = None
    if all(s is not None for s in settled):
        limit = least_committal_invariant(ito, closure)
        family = test_family(space, config)
        invariance_residual = 0.0
        agreement_residual = 0.0
        for f in family:
            m_f = limit.upper(f)
            invariance_residual = max(invariance_residual,
                                      abs(limit.upper(ito.upper(f)) - m_f))
            direct, ok = _direct_limit(initial, ito, f, 10.0 * config.eps_conv,
                                       config.max_iter)
            if not ok:
                warnings.append("direct iteration did not settle on a test gamble")
            agreement_residual = max(agreement_residual, abs(direct - m_f))

    return ConvergenceReport(
        classes=tuple(verdicts),
        closure=closure,
        extremal_over_window=extremal_ok,
        window=window,
        limit=limit,
        invariance_residual=invariance_residual,
        agreement_residual=agreement_residual,
        thresholds=(("eps_pos", config.eps_pos), ("eps_one", config.eps_one),
                    ("eps_conv", config.eps_conv)),
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class ExtremalInvariant:
    """One extremal invariant functional, keyed by the family of minimal
    permanent classes it gives upper probability one."""

    classes: tuple[tuple[str, ...], ...]
    closure: tuple[str, ...]
    functional: VacuousLimit


def extremal_invariants(ito: Ito) -> list[ExtremalInvariant]:
    """One extremal invariant per realizable family of minimal permanent
    classes.

    Non-empty absorbing sets are exactly the downward-closed unions of
    communication classes; two with the same family of contained minimal
    permanent classes share their limit, so families are deduplicated and
    each is evaluated on its canonical closure (the weak closure of the
    union of its classes).
    """
    space = ito.space
    mpcs = minimal_permanent_classes(ito)
    mpc_masks = [space.subset_mask(m) for m in mpcs]
    classification = classify(ito)
    members_per_class = [space.subset_mask(c.members)
                         for c in classification.classes]
    k = len(classification.classes)
    descendants = [set() for _ in range(k)]
    for a, b in classification.edges:
        descendants[a].add(b)
    changed = True
    while changed:
        changed = False
        for c in range(k):
            extra = set().union(*(descendants[d] for d in descendants[c])) \
                if descendants[c] else set()
            if not extra <= descendants[c]:
                descendants[c] |= extra
                changed = True

    closure_matrix = reachability(access_graph(ito).matrix)
    families: dict[frozenset[int], None] = {}
    for bits in sorted(range(1, 1 << k), key=lambda b: (bin(b).count("1"), b)):
        chosen = [c for c in range(k) if bits >> c & 1]
        if any(not descendants[c] <= set(chosen) for c in chosen):
            continue
        absorbing_mask = np.zeros(space.size, dtype=bool)
        for c in chosen:
            absorbing_mask |= members_per_class[c]
        family = frozenset(
            i for i, m in enumerate(mpc_masks)
            if bool(np.all(absorbing_mask[m])))
        assert family, "non-empty absorbing set without a minimal permanent class"
        families.setdefault(family, None)

    out = []
    for family in sorted(families, key=lambda f: (len(f), sorted(f))):
        union = np.zeros(space.size, dtype=bool)
        for i in family:
            union |= mpc_masks[i]
        closed = np.zeros(space.size, dtype=bool)
        for i in np.flatnonzero(union):
            closed |= closure_matrix[i]
        closure_labels = space.labels_of(closed)
        out.append(ExtremalInvariant(
            classes=tuple(mpcs[i] for i in sorted(family)),
            closure=closure_labels,
            functional=least_committal_invariant(ito, closure_labels),
        ))
    return out
