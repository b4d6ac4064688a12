"""Hardy-type nonlocality test construction for bipartite pure states.

Given a Schmidt decomposition with two distinct weights, this module builds
the pair of rotated measurement bases on each side, the four ternary
observables X1, Y1, X2, Y2, the exact joint probability table, and the set
of conditions that make the test work: five joint outcomes with probability
exactly zero plus one flagged outcome (Y1=+1, Y2=+1) whose probability has
a closed form and is strictly positive whenever the chosen weights differ.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePair, NonPositiveWeight, NumericalFailure
from .schmidt import SchmidtDecomposition, schmidt_decompose
from .states import Bipartition, StateVector, reshape_bipartite

SIDE1_SETTINGS = ("X1", "Y1")
SIDE2_SETTINGS = ("X2", "Y2")
TERNARY_OUTCOMES = (1, -1, 0)

DEFAULT_EPS_DEG = 1e-9
DEFAULT_ZERO_TOL = 1e-10

# Tiny negative entries produced by cancellation in complement projections
# are clamped to zero; anything below this is a bug, not roundoff.
NEGATIVE_ENTRY_TOL = -1e-10
# Measured and closed-form flagged probabilities must agree this well.
CLOSED_FORM_TOL = 1e-9


def hardy_probability(p1: float, p2: float) -> float:
    """Closed-form probability of the flagged (Y1=+1, Y2=+1) outcome.

    Symmetric in its arguments (exactly, including rounding: only commutative
    float operations see both weights) and zero exactly when they coincide.
    """
    cross = p1 * p2
    diff = p1 - p2
    den = (p1 * p1 + p2 * p2) - cross
    return (cross * cross) * (diff * diff) / (den * den)


def max_hardy_probability_qubit(grid: int = 10**6) -> tuple[float, float]:
    """Grid-plus-refinement maximum of the flagged probability for two qubits.

    Sweeps the squared first weight over a uniform grid in (0, 1), then
    refines around the best grid point by golden-section search.  Returns
    ``(best_p1_squared, best_probability)``.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    t = np.arange(1, grid + 1, dtype=float) / (grid + 1)
    p1 = np.sqrt(t)
    p2 = np.sqrt(1.0 - t)
    num = t * (1.0 - t) * (p1 - p2) ** 2
    den = (1.0 - p1 * p2) ** 2
    values = num / den
    k = int(np.argmax(values))
    step = 1.0 / (grid + 1)
    lo = max(t[k] - step, 0.0)
    hi = min(t[k] + step, 1.0)

    def f(x: float) -> float:
        return hardy_probability(math.sqrt(x), math.sqrt(1.0 - x))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-13:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    best_t = (a + b) / 2.0
    return best_t, f(best_t)


def distinct_weight_pairs(
    d: SchmidtDecomposition, eps_deg: float = DEFAULT_EPS_DEG
) -> list[tuple[int, int]]:
    """Index pairs with distinct weights, best flagged probability first.

    An empty list means the construction does not apply to this state
    (single Schmidt term, or all weights equal within ``eps_deg``).
    """
    if eps_deg <= 0:
        raise ValueError("eps_deg must be positive")
    pairs = [
        (i, j)
        for i in range(d.rank)
        for j in range(i + 1, d.rank)
        if abs(d.weights[i] - d.weights[j]) > eps_deg
    ]
    pairs.sort(key=lambda ij: -hardy_probability(d.weights[ij[0]], d.weights[ij[1]]))
    return pairs


@dataclass(frozen=True)
class HardyRotations:
    """The two 2x2 unitaries of the construction for a weight pair.

    ``x_from_schmidt`` maps the Schmidt pair to the x basis on either side;
    ``y_from_x`` maps the x basis to the y basis.
    """

    x_from_schmidt: np.ndarray
    y_from_x: np.ndarray
    p1: float
    p2: float


def build_unitaries(p1: float, p2: float) -> HardyRotations:
    """Construct the basis rotations for strictly positive weights p1, p2."""
    if p1 <= 0 or p2 <= 0:
        raise NonPositiveWeight(f"weights must be positive, got ({p1}, {p2})")
    u = np.array(
        [
            [math.sqrt(p2), -1j * math.sqrt(p1)],
            [-1j * math.sqrt(p1), math.sqrt(p2)],
        ],
        dtype=np.complex128,
    ) / math.sqrt(p1 + p2)
    denom = math.sqrt(p1 * p1 + p2 * p2 - p1 * p2)
    v = np.array(
        [
            [-1j * (p2 - p1), math.sqrt(p1 * p2)],
            [math.sqrt(p1 * p2), -1j * (p2 - p1)],
        ],
        dtype=np.complex128,
    ) / denom
    u.setflags(write=False)
    v.setflags(write=False)
    return HardyRotations(u, v, p1, p2)


@dataclass(frozen=True)
class Observable:
    """Ternary local observable: two marked unit eigenvectors plus a rest bin.

    ``outcome_vectors`` pairs each nonzero outcome with its eigenvector; the
    outcome 0 belongs to the orthogonal complement of all listed vectors and
    its projector is only ever applied implicitly.
    """

    label: str
    side: int
    outcome_vectors: tuple[tuple[int, np.ndarray], ...]

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(o for o, _ in self.outcome_vectors) + (0,)

    def vector(self, outcome: int) -> np.ndarray | None:
        for o, vec in self.outcome_vectors:
            if o == outcome:
                return vec
        if outcome == 0:
            return None
        raise ValueError(f"{self.label} has no outcome {outcome}")

    def marked_vectors(self) -> tuple[np.ndarray, ...]:
        return tuple(vec for _, vec in self.outcome_vectors)


@dataclass(frozen=True)
class HardyBases:
    """The rotated x/y orthonormal pairs on both sides."""

    x_plus_1: np.ndarray
    x_minus_1: np.ndarray
    y_plus_1: np.ndarray
    y_minus_1: np.ndarray
    x_plus_2: np.ndarray
    x_minus_2: np.ndarray
    y_plus_2: np.ndarray
    y_minus_2: np.ndarray


@dataclass(frozen=True)
class HardyConstruction:
    """Everything derived from one Schmidt decomposition and weight pair."""

    schmidt: SchmidtDecomposition
    pair: tuple[int, int]
    p1: float
    p2: float
    rotations: HardyRotations
    bases: HardyBases
    observables: tuple[Observable, Observable, Observable, Observable]

    @property
    def split(self) -> Bipartition:
        return self.schmidt.split

    def observable(self, label: str) -> Observable:
        for obs in self.observables:
            if obs.label == label:
                return obs
        raise ValueError(f"unknown observable {label!r}")


def _rotated_pair(rotation: np.ndarray, first: np.ndarray, second: np.ndarray):
    plus = rotation[0, 0] * first + rotation[0, 1] * second
    minus = rotation[1, 0] * first + rotation[1, 1] * second
    plus.setflags(write=False)
    minus.setflags(write=False)
    return plus, minus


def build_construction(
    d: SchmidtDecomposition,
    pair: tuple[int, int],
    eps_deg: float = DEFAULT_EPS_DEG,
    *,
    allow_degenerate: bool = False,
) -> HardyConstruction:
    """Build bases and observables for one weight pair of a decomposition.

    ``allow_degenerate`` skips the distinctness guard; with equal weights the
    y bases collapse onto the swapped x bases and the flagged probability is
    zero, which is occasionally useful as a control case.
    """
    i, j = pair
    if not (0 <= i < d.rank and 0 <= j < d.rank) or i == j:
        raise ValueError(f"pair {pair} invalid for rank {d.rank}")
    p1 = float(d.weights[i])
    p2 = float(d.weights[j])
    if not allow_degenerate and abs(p1 - p2) <= eps_deg:
        raise DegeneratePair(
            f"weights {p1!r} and {p2!r} agree within eps_deg={eps_deg!r}"
        )
    rot = build_unitaries(p1, p2)
    yu = rot.y_from_x @ rot.x_from_schmidt
    a1, a2 = d.left_vectors[:, i], d.left_vectors[:, j]
    b1, b2 = d.right_vectors[:, i], d.right_vectors[:, j]
    x_plus_1, x_minus_1 = _rotated_pair(rot.x_from_schmidt, a1, a2)
    y_plus_1, y_minus_1 = _rotated_pair(yu, a1, a2)
    x_plus_2, x_minus_2 = _rotated_pair(rot.x_from_schmidt, b1, b2)
    y_plus_2, y_minus_2 = _rotated_pair(yu, b1, b2)
    bases = HardyBases(
        x_plus_1, x_minus_1, y_plus_1, y_minus_1,
        x_plus_2, x_minus_2, y_plus_2, y_minus_2,
    )
    observables = (
        Observable("X1", 1, ((1, x_plus_1), (-1, x_minus_1))),
        Observable("Y1", 1, ((1, y_plus_1), (-1, y_minus_1))),
        Observable("X2", 2, ((1, x_plus_2), (-1, x_minus_2))),
        Observable("Y2", 2, ((1, y_plus_2), (-1, y_minus_2))),
    )
    return HardyConstruction(d, (i, j), p1, p2, rot, bases, observables)


@dataclass(frozen=True)
class JointProbabilityTable:
    """Joint outcome distributions for every choice of one setting per party.

    Keys of ``entries`` are ``(settings, outcomes)`` tuples, one setting
    label and one outcome per party.  Every party uses a single outcome
    alphabet across its settings.
    """

    party_settings: tuple[tuple[str, ...], ...]
    party_outcomes: tuple[tuple[int, ...], ...]
    entries: dict

    @property
    def n_parties(self) -> int:
        return len(self.party_settings)

    def setting_choices(self):
        return itertools.product(*self.party_settings)

    def outcome_tuples(self):
        return itertools.product(*self.party_outcomes)

    def ordered_keys(self) -> list[tuple[tuple[str, ...], tuple[int, ...]]]:
        return [
            (choice, outcomes)
            for choice in self.setting_choices()
            for outcomes in self.outcome_tuples()
        ]

    def prob(self, settings, outcomes) -> float:
        return self.entries[(tuple(settings), tuple(outcomes))]

    def row(self, choice) -> list[tuple[tuple[int, ...], float]]:
        choice = tuple(choice)
        return [(outcomes, self.entries[(choice, outcomes)]) for outcomes in self.outcome_tuples()]

    def setting_index(self, party: int, label: str) -> int:
        return self.party_settings[party].index(label)

    def check(self, tol: float = DEFAULT_ZERO_TOL) -> None:
        """Validate entry range, per-choice normalization, and no-signalling."""
        for key, p in self.entries.items():
            if not -tol <= p <= 1.0 + 1e-12:
                raise NumericalFailure(f"entry {key} out of range: {p!r}")
        for choice in self.setting_choices():
            total = sum(p for _, p in self.row(choice))
            if abs(total - 1.0) > tol:
                raise NumericalFailure(
                    f"probabilities for settings {choice} sum to {total!r}"
                )
        for party in range(self.n_parties):
            for label in self.party_settings[party]:
                for outcome in self.party_outcomes[party]:
                    marginals = []
                    for choice in self.setting_choices():
                        if choice[party] != label:
                            continue
                        marginals.append(
                            sum(
                                p
                                for outcomes, p in self.row(choice)
                                if outcomes[party] == outcome
                            )
                        )
                    if max(marginals) - min(marginals) > tol:
                        raise NumericalFailure(
                            f"no-signalling violated for party {party}, "
                            f"setting {label}, outcome {outcome}"
                        )


def _clamped(value: float) -> float:
    if value < NEGATIVE_ENTRY_TOL:
        raise NumericalFailure(f"probability {value!r} below the roundoff floor")
    return max(value, 0.0)


def joint_table(v: StateVector, construction: HardyConstruction) -> JointProbabilityTable:
    """Exact joint probabilities of all four setting pairs on ``v``.

    Outcome-0 probabilities are computed by subtracting the two marked
    projections from the relevant marginal, so the complement projector is
    never materialized.
    """
    m = reshape_bipartite(v, construction.split)
    entries: dict = {}
    for s1 in SIDE1_SETTINGS:
        a_vecs = dict(construction.observable(s1).outcome_vectors)
        for s2 in SIDE2_SETTINGS:
            b_vecs = dict(construction.observable(s2).outcome_vectors)
            # Amplitudes for the four (marked, marked) outcome pairs plus the
            # conditional side vectors needed for the 0 bins.
            w = {o: a_vecs[o].conj() @ m for o in (1, -1)}
            z = {o: m @ b_vecs[o].conj() for o in (1, -1)}
            choice = (s1, s2)
            for o1 in (1, -1):
                for o2 in (1, -1):
                    amp = w[o1] @ b_vecs[o2].conj()
                    entries[(choice, (o1, o2))] = float(abs(amp) ** 2)
            for o1 in (1, -1):
                leftover = float(np.vdot(w[o1], w[o1]).real)
                for o2 in (1, -1):
                    leftover -= entries[(choice, (o1, o2))]
                entries[(choice, (o1, 0))] = _clamped(leftover)
            for o2 in (1, -1):
                leftover = float(np.vdot(z[o2], z[o2]).real)
                for o1 in (1, -1):
                    leftover -= entries[(choice, (o1, o2))]
                entries[(choice, (0, o2))] = _clamped(leftover)
            rest = m.copy()
            for o1 in (1, -1):
                rest -= np.outer(a_vecs[o1], w[o1])
            for o2 in (1, -1):
                rest -= np.outer(rest @ b_vecs[o2].conj(), b_vecs[o2])
            entries[(choice, (0, 0))] = _clamped(float(np.linalg.norm(rest) ** 2))
    ordered = {}
    table = JointProbabilityTable(
        (SIDE1_SETTINGS, SIDE2_SETTINGS),
        (TERNARY_OUTCOMES, TERNARY_OUTCOMES),
        ordered,
    )
    for choice in table.setting_choices():
        for outcomes in table.outcome_tuples():
            ordered[(choice, outcomes)] = entries[(choice, outcomes)]
    table.check()
    return table


@dataclass(frozen=True)
class HardyCondition:
    """One joint-outcome condition of the test."""

    settings: tuple[str, str]
    outcomes: tuple[int, int]
    expect_zero: bool

    @property
    def label(self) -> str:
        parts = [
            f"{s}={o:+d}" if o != 0 else f"{s}=0"
            for s, o in zip(self.settings, self.outcomes)
        ]
        return f"P({', '.join(parts)})"


ZERO_CONDITIONS = (
    HardyCondition(("X1", "X2"), (1, 1), True),
    HardyCondition(("Y1", "X2"), (1, -1), True),
    HardyCondition(("X1", "Y2"), (-1, 1), True),
    HardyCondition(("Y1", "X2"), (1, 0), True),
    HardyCondition(("X1", "Y2"), (0, 1), True),
)
FLAGGED_CONDITION = HardyCondition(("Y1", "Y2"), (1, 1), False)


@dataclass(frozen=True)
class ConditionValue:
    condition: HardyCondition
    value: float
    within_tolerance: bool


@dataclass(frozen=True)
class DecompositionResiduals:
    """Max-norm residuals of the three equivalent expansions of the state."""

    residuals: tuple[float, float, float]

    @property
    def worst(self) -> float:
        return max(self.residuals)


def verify_equivalent_decompositions(
    v: StateVector, construction: HardyConstruction
) -> DecompositionResiduals:
    """Re-expand the state in the three rotated forms and compare."""
    d = construction.schmidt
    i, j = construction.pair
    p1, p2 = construction.p1, construction.p2
    m = reshape_bipartite(v, construction.split)
    tail = np.zeros_like(m)
    for k in range(d.rank):
        if k in (i, j):
            continue
        tail += d.weights[k] * np.outer(d.left_vectors[:, k], d.right_vectors[:, k])
    b = construction.bases
    root_cross = 1j * math.sqrt(p1 * p2)
    root_mixed = 1j * math.sqrt(p1 * p1 + p2 * p2 - p1 * p2)
    form1 = (
        root_cross * (np.outer(b.x_plus_1, b.x_minus_2) + np.outer(b.x_minus_1, b.x_plus_2))
        + (p2 - p1) * np.outer(b.x_minus_1, b.x_minus_2)
        + tail
    )
    form2 = (
        root_mixed * np.outer(b.y_minus_1, b.x_minus_2)
        + root_cross * np.outer(b.x_minus_1, b.x_plus_2)
        + tail
    )
    form3 = (
        root_cross * np.outer(b.x_plus_1, b.x_minus_2)
        + root_mixed * np.outer(b.x_minus_1, b.y_minus_2)
        + tail
    )
    residuals = tuple(
        float(np.max(np.abs(form - m))) for form in (form1, form2, form3)
    )
    return DecompositionResiduals(residuals)


@dataclass(frozen=True)
class WitnessReport:
    """Applicability verdict plus every quantity the test rests on."""

    applicable: bool
    reason: str | None
    split: Bipartition
    weights: tuple[float, ...]
    eps_deg: float
    zero_tol: float
    pair: tuple[int, int] | None = None
    p1: float | None = None
    p2: float | None = None
    zero_values: tuple[ConditionValue, ...] = ()
    hardy_measured: float | None = None
    hardy_closed_form: float | None = None
    residuals: DecompositionResiduals | None = None
    table: JointProbabilityTable | None = None
    construction: HardyConstruction | None = None

    @property
    def all_conditions_hold(self) -> bool:
        return self.applicable and all(c.within_tolerance for c in self.zero_values)


def make_witness_report(
    v: StateVector,
    split: Bipartition,
    pair: tuple[int, int] | None = None,
    eps_deg: float = DEFAULT_EPS_DEG,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> WitnessReport:
    """Build the full test report for one state and bipartition.

    With ``pair=None`` the distinct-weight pair with the largest flagged
    probability is chosen automatically; when no such pair exists the state
    is reported as not applicable (nothing can be concluded about it).
    """
    d = schmidt_decompose(v, split)
    weights = tuple(float(w) for w in d.weights)
    if pair is None:
        pairs = distinct_weight_pairs(d, eps_deg)
        if not pairs:
            reason = (
                "rank 1 (product across this split)"
                if d.rank == 1
                else "all Schmidt weights equal within eps_deg"
            )
            return WitnessReport(False, reason, split, weights, eps_deg, zero_tol)
        pair = pairs[0]
    construction = build_construction(d, pair, eps_deg)
    table = joint_table(v, construction)
    zero_values = tuple(
        ConditionValue(c, table.prob(c.settings, c.outcomes),
                       table.prob(c.settings, c.outcomes) < zero_tol)
        for c in ZERO_CONDITIONS
    )
    measured = table.prob(FLAGGED_CONDITION.settings, FLAGGED_CONDITION.outcomes)
    closed = hardy_probability(construction.p1, construction.p2)
    if abs(measured - closed) > CLOSED_FORM_TOL:
        raise NumericalFailure(
            f"measured flagged probability {measured!r} disagrees with "
            f"closed form {closed!r}"
        )
    residuals = verify_equivalent_decompositions(v, construction)
    return WitnessReport(
        applicable=True,
        reason=None,
        split=split,
        weights=weights,
        eps_deg=eps_deg,
        zero_tol=zero_tol,
        pair=pair,
        p1=construction.p1,
        p2=construction.p2,
        zero_values=zero_values,
        hardy_measured=measured,
        hardy_closed_form=closed,
        residuals=residuals,
        table=table,
        construction=construction,
    )
