"""Imprecise Markov chains.

Credal transition rows, upper/lower expectation operators, weak and strong
accessibility structure, minimal permanent classes, and extremal invariant
imprecise expectation functionals with convergence diagnostics.
"""

from .credal import (
    Ief,
    IntervalRow,
    IntervalSetIef,
    MixtureIef,
    PreciseIef,
    VacuousIef,
    VertexRow,
    VertexSetIef,
    can_concentrate,
    coherence_normalize,
    essential_max,
    min_positive_lower,
    row_vertices,
    support,
)
from .errors import (
    AbsorbingViolation,
    BudgetExceeded,
    DimensionMismatch,
    EmptyCredalSet,
    EmptyRestriction,
    ImcError,
    NonConvergent,
    NotPrecise,
    PowerCapExceeded,
    RegularityCapExceeded,
    StateBudgetExceeded,
    UnknownState,
    VertexBudgetExceeded,
)
from .invariant import (
    ClassLimit,
    ConvergenceReport,
    ExtremalInvariant,
    LimitFunctional,
    VacuousLimit,
    class_invariant,
    classify_convergence,
    extremal_invariants,
    indicator_family,
    is_extremal,
    least_committal_invariant,
    support_closure,
    test_family,
)
from .model import Config, Gamble, GambleInterval, StateSpace, indicator
from .strong import (
    SetFunction,
    SetRelation,
    certain_supports,
    certainly_moves,
    compose_relations,
    full_mass_sets,
    has_full_upper_mass,
    is_permanent,
    minimal_permanent_classes,
    one_step_relation,
    propagate_mass_sets,
    regularity_step,
    relation_power,
    strongly_leads,
)
from .transition import (
    Ito,
    MaterializedPower,
    evolve,
    materialize_power,
    restrict_to_class,
)
from .weak import (
    AccessGraph,
    Classification,
    ClassInfo,
    access_graph,
    accessible,
    classify,
    is_absorbing,
)

__version__ = "0.1.0"
