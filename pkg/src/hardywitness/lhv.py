"""Local-model certification by deterministic-strategy enumeration and LP.

A local hidden-variable model for a joint probability table is, without loss
of generality, a probability mixture of deterministic local strategies: one
outcome pinned per setting per party, sides independent.  Whether such a
mixture reproduces the table exactly is a linear-programming feasibility
question over the strategy weights; infeasibility comes with a Farkas dual
vector, which reads as a Bell-type linear inequality every local model obeys
and the quantum table violates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, TooLarge
from .hardy import (
    FLAGGED_CONDITION,
    ZERO_CONDITIONS,
    HardyCondition,
    JointProbabilityTable,
    WitnessReport,
)
from .simplex import DEFAULT_FEAS_TOL, solve_equality_feasibility

STRATEGY_CAP = 10**6
# Strategy-side dual slack allowed on a verified infeasibility certificate.
DUAL_SLACK_TOL = 1e-12
# Quantum-side violation a certificate must exhibit to count.
MIN_MARGIN = 1e-9
# A feasible mixture must reproduce every table entry this well.
MIXTURE_TOL = 1e-8


@dataclass(frozen=True)
class DeterministicStrategy:
    """One outcome per setting per party; parties answer independently."""

    assignments: tuple[tuple[int, ...], ...]

    def outcome(self, party: int, setting_index: int) -> int:
        return self.assignments[party][setting_index]


def enumerate_strategies(
    settings_per_party, outcomes_per_party
) -> tuple[DeterministicStrategy, ...]:
    """Full Cartesian enumeration of deterministic local strategies.

    ``settings_per_party`` counts the settings of each party;
    ``outcomes_per_party`` gives each party's outcome alphabet.
    """
    counts = [int(s) for s in settings_per_party]
    alphabets = [tuple(o) for o in outcomes_per_party]
    if len(counts) != len(alphabets):
        raise ValueError("settings and outcomes must list the same parties")
    total = 1
    for s, outs in zip(counts, alphabets):
        total *= len(outs) ** s
    if total > STRATEGY_CAP:
        raise TooLarge(f"{total} strategies exceed the cap of {STRATEGY_CAP}")
    per_party = [
        tuple(itertools.product(outs, repeat=s)) for s, outs in zip(counts, alphabets)
    ]
    return tuple(
        DeterministicStrategy(tuple(assignment))
        for assignment in itertools.product(*per_party)
    )


def strategies_for_table(table: JointProbabilityTable) -> tuple[DeterministicStrategy, ...]:
    return enumerate_strategies(
        [len(s) for s in table.party_settings], table.party_outcomes
    )


@dataclass
class LhvCertificate:
    """Feasibility verdict for a table, with the evidence either way.

    Feasible: ``weights`` is a probability vector over ``strategies`` whose
    mixture reproduces every entry.  Infeasible: ``dual`` (indexed by
    ``entry_keys`` plus a trailing normalization component) satisfies
    dual . column <= 0 for every strategy and dual . table = ``margin`` > 0.
    """

    feasible: bool
    strategies: tuple[DeterministicStrategy, ...]
    entry_keys: tuple
    weights: np.ndarray | None = None
    dual: np.ndarray | None = None
    margin: float | None = None
    max_strategy_dot: float | None = None


def _strategy_column(
    strategy: DeterministicStrategy,
    table: JointProbabilityTable,
    keys,
) -> np.ndarray:
    column = np.zeros(len(keys) + 1)
    setting_idx = [
        {label: k for k, label in enumerate(labels)}
        for labels in table.party_settings
    ]
    for row, (choice, outcomes) in enumerate(keys):
        hit = all(
            strategy.outcome(party, setting_idx[party][choice[party]]) == outcomes[party]
            for party in range(table.n_parties)
        )
        if hit:
            column[row] = 1.0
    column[-1] = 1.0  # normalization row
    return column


def _constraint_system(table: JointProbabilityTable):
    keys = tuple(table.ordered_keys())
    strategies = strategies_for_table(table)
    a = np.zeros((len(keys) + 1, len(strategies)))
    for col, strategy in enumerate(strategies):
        a[:, col] = _strategy_column(strategy, table, keys)
    b = np.array([table.entries[key] for key in keys] + [1.0])
    return keys, strategies, a, b


def certify(table: JointProbabilityTable, *, feas_tol: float = DEFAULT_FEAS_TOL) -> LhvCertificate:
    """Decide whether any local mixture reproduces the table exactly.

    The table is certified as measured, tiny entries included.  Both outcomes
    are verified against the raw constraint data before being returned;
    failing that verification raises, since it means the solver (not the
    physics) broke.
    """
    keys, strategies, a, b = _constraint_system(table)
    result = solve_equality_feasibility(a, b, feas_tol=feas_tol)
    if result.feasible:
        weights = np.asarray(result.x)
        if weights.min() < -1e-12:
            raise NumericalFailure(f"negative strategy weight {weights.min()!r}")
        weights = np.clip(weights, 0.0, None)
        weights = weights / weights.sum()
        residual = float(np.max(np.abs(a[:-1] @ weights - b[:-1])))
        if residual > MIXTURE_TOL:
            raise NumericalFailure(
                f"feasible mixture misses the table by {residual!r}"
            )
        return LhvCertificate(True, strategies, keys, weights=weights)
    y = np.asarray(result.dual)
    dots = y @ a
    max_dot = float(dots.max())
    margin = float(y @ b)
    if max_dot > DUAL_SLACK_TOL or margin < MIN_MARGIN:
        raise NumericalFailure(
            f"Farkas certificate failed verification: max strategy dot "
            f"{max_dot!r}, margin {margin!r}"
        )
    return LhvCertificate(
        False, strategies, keys, dual=y, margin=margin, max_strategy_dot=max_dot
    )


def certify_multipartite(
    table: JointProbabilityTable, *, feas_tol: float = DEFAULT_FEAS_TOL
) -> LhvCertificate:
    """Same LP with one strategy factor per party, for three or more parties."""
    if table.n_parties < 3:
        raise ValueError("multipartite certification expects at least three parties")
    return certify(table, feas_tol=feas_tol)


@dataclass(frozen=True)
class HardyConditionSet:
    """The five zero conditions plus the flagged requirement of one test."""

    zero_conditions: tuple[HardyCondition, ...]
    flagged: HardyCondition
    flagged_value: float


def conditions_from_report(report: WitnessReport) -> HardyConditionSet:
    if not report.applicable:
        raise ValueError("report is not applicable; there are no conditions to check")
    return HardyConditionSet(ZERO_CONDITIONS, FLAGGED_CONDITION, report.hardy_measured)


def idealized_table(
    table: JointProbabilityTable, conditions: HardyConditionSet
) -> JointProbabilityTable:
    """Copy of the table with the designated zero entries snapped to exact 0."""
    entries = dict(table.entries)
    for cond in conditions.zero_conditions:
        entries[(cond.settings, cond.outcomes)] = 0.0
    return JointProbabilityTable(table.party_settings, table.party_outcomes, entries)


@dataclass(frozen=True)
class StrategyClassification:
    strategy: DeterministicStrategy
    targets_flagged: bool
    violated: tuple[str, ...]
    region: str  # "A": X1 != +1, "B": X2 != +1, "C": both +1


@dataclass(frozen=True)
class ContradictionTrace:
    """Exhaustive check that no local strategy survives the zero conditions.

    ``contradiction`` is true exactly when the flagged outcome is required to
    have positive probability while every strategy producing it violates at
    least one zero condition, i.e. when no local mixture can work.
    """

    contradiction: bool
    flagged_value: float
    rows: tuple[StrategyClassification, ...]
    n_targeting: int
    n_surviving_targeting: int


def verify_no_deterministic_model(
    conditions: HardyConditionSet, *, value_tol: float = 1e-12
) -> ContradictionTrace:
    """Check every two-party deterministic strategy against the conditions.

    Each strategy assigning +1 to both flagged settings is reported together
    with the zero condition it violates; strategies compatible with all five
    zero conditions never produce the flagged outcome, so a required positive
    flagged probability is a contradiction.
    """
    strategies = enumerate_strategies([2, 2], [(1, -1, 0), (1, -1, 0)])
    side_settings = (("X1", "Y1"), ("X2", "Y2"))

    def outcome_of(strategy, label):
        party = 0 if label in side_settings[0] else 1
        return strategy.outcome(party, side_settings[party].index(label))

    rows = []
    n_targeting = 0
    n_surviving_targeting = 0
    for strategy in strategies:
        violated = tuple(
            c.label
            for c in conditions.zero_conditions
            if outcome_of(strategy, c.settings[0]) == c.outcomes[0]
            and outcome_of(strategy, c.settings[1]) == c.outcomes[1]
        )
        targets = (
            outcome_of(strategy, conditions.flagged.settings[0]) == conditions.flagged.outcomes[0]
            and outcome_of(strategy, conditions.flagged.settings[1]) == conditions.flagged.outcomes[1]
        )
        if outcome_of(strategy, "X1") == 1 and outcome_of(strategy, "X2") == 1:
            region = "C"
        elif outcome_of(strategy, "X1") != 1:
            region = "A"
        else:
            region = "B"
        if targets:
            n_targeting += 1
            if not violated:
                n_surviving_targeting += 1
        rows.append(StrategyClassification(strategy, targets, violated, region))
    contradiction = conditions.flagged_value > value_tol and n_surviving_targeting == 0
    return ContradictionTrace(
        contradiction,
        conditions.flagged_value,
        tuple(rows),
        n_targeting,
        n_surviving_targeting,
    )
