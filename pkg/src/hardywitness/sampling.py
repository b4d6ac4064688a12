"""Finite-shot simulation of the test with a reproducible counter-based RNG.

The generator is SplitMix64 used in counter mode: shot k under seed s draws
the 64-bit word mix64((s + (k+1) * 0x9E3779B97F4A7C15) mod 2^64) where mix64
is the standard SplitMix64 finalizer (xor-shift 30, multiply
0xBF58476D1CE4E5B9, xor-shift 27, multiply 0x94D049BB133111EB, xor-shift
31).  Uniform variates take the top 53 bits over 2^53.  Records are thus a
pure function of (seed, shots, schedule, table) and identical across runs
and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hardy import (
    FLAGGED_CONDITION,
    ZERO_CONDITIONS,
    HardyCondition,
    HardyConstruction,
    JointProbabilityTable,
    joint_table,
)
from .states import StateVector

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

DEFAULT_SCHEDULE = (("X1", "X2"), ("X1", "Y2"), ("Y1", "X2"), ("Y1", "Y2"))
DEFAULT_SIGMA = 4.0

CSV_HEADER = "shot,setting1,setting2,outcome1,outcome2"


def splitmix64(seed: int, counter: int) -> int:
    """The counter-th 64-bit word of the SplitMix64 stream for this seed."""
    z = (seed + (counter + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX_MULT_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


def uniform_unit(seed: int, counter: int) -> float:
    """Uniform double in [0, 1) from the counter-th word."""
    return (splitmix64(seed, counter) >> 11) * 2.0**-53


@dataclass(frozen=True)
class ShotRecord:
    index: int
    setting1: str
    setting2: str
    outcome1: int
    outcome2: int


def _cumulative_rows(table: JointProbabilityTable, pairs):
    rows = {}
    for pair in pairs:
        cumulative = []
        running = 0.0
        for outcomes, p in table.row(pair):
            running += p
            cumulative.append((running, outcomes))
        rows[pair] = cumulative
    return rows


def sample_from_table(
    table: JointProbabilityTable,
    shots: int,
    seed: int,
    schedule=None,
) -> list[ShotRecord]:
    """Draw shots by inverse CDF over the outcome pairs of each setting pair.

    Shot k uses counter k of the seed's stream and the schedule entry
    k mod len(schedule).  Outcome pairs are scanned in the table's fixed
    outcome order, so zero-probability pairs own empty intervals and are
    never selected.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if schedule is None:
        schedule = DEFAULT_SCHEDULE
    schedule = [tuple(pair) for pair in schedule]
    for pair in schedule:
        if pair not in set(table.setting_choices()):
            raise ValueError(f"schedule entry {pair} is not a setting choice")
    seed &= MASK64
    rows = _cumulative_rows(table, set(schedule))
    records = []
    for k in range(shots):
        pair = schedule[k % len(schedule)]
        u = uniform_unit(seed, k)
        cumulative = rows[pair]
        chosen = None
        for edge, outcomes in cumulative:
            if u < edge:
                chosen = outcomes
                break
        if chosen is None:  # u landed beyond the (~1.0) last edge
            chosen = next(
                outcomes for edge, outcomes in reversed(cumulative) if edge > 0.0
            )
        records.append(ShotRecord(k, pair[0], pair[1], chosen[0], chosen[1]))
    return records


def sample(
    v: StateVector,
    construction: HardyConstruction,
    shots: int,
    seed: int,
    schedule=None,
) -> list[ShotRecord]:
    """Simulate the experiment on ``v`` with the construction's observables."""
    return sample_from_table(joint_table(v, construction), shots, seed, schedule)


@dataclass(frozen=True)
class CellStats:
    settings: tuple[str, str]
    outcomes: tuple[int, int]
    count: int
    pair_shots: int
    frequency: float | None
    exact: float
    std_error: float | None


@dataclass(frozen=True)
class ConditionStats:
    condition: HardyCondition
    count: int
    pair_shots: int
    frequency: float | None
    exact: float
    passed: bool | None  # None when the setting pair was never sampled


@dataclass(frozen=True)
class FrequencyReport:
    shots: int
    sigma: float
    cells: tuple[CellStats, ...]
    conditions: tuple[ConditionStats, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions if c.passed is not None)


def analyze(
    records, exact_table: JointProbabilityTable, sigma: float = DEFAULT_SIGMA
) -> FrequencyReport:
    """Compare empirical frequencies against the exact table.

    A zero condition passes iff its outcome pair never occurred.  The flagged
    condition passes iff it occurred at least once and its frequency sits
    within ``sigma`` binomial standard errors of the exact value.  Conditions
    whose setting pair received no shots are reported unevaluated.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    records = list(records)
    pair_shots: dict = {}
    counts: dict = {}
    for record in records:
        pair = (record.setting1, record.setting2)
        pair_shots[pair] = pair_shots.get(pair, 0) + 1
        key = (pair, (record.outcome1, record.outcome2))
        counts[key] = counts.get(key, 0) + 1
    cells = []
    for choice in exact_table.setting_choices():
        n = pair_shots.get(choice, 0)
        for outcomes, exact in exact_table.row(choice):
            count = counts.get((choice, outcomes), 0)
            freq = count / n if n else None
            se = (exact * (1.0 - exact) / n) ** 0.5 if n else None
            cells.append(CellStats(choice, outcomes, count, n, freq, exact, se))
    verdicts = []
    for cond in ZERO_CONDITIONS + (FLAGGED_CONDITION,):
        n = pair_shots.get(cond.settings, 0)
        count = counts.get((cond.settings, cond.outcomes), 0)
        exact = exact_table.prob(cond.settings, cond.outcomes)
        freq = count / n if n else None
        if n == 0:
            passed = None
        elif cond.expect_zero:
            passed = count == 0
        else:
            se = (exact * (1.0 - exact) / n) ** 0.5
            passed = count > 0 and abs(freq - exact) <= sigma * se
        verdicts.append(ConditionStats(cond, count, n, freq, exact, passed))
    return FrequencyReport(len(records), sigma, tuple(cells), tuple(verdicts))


def records_to_csv(records) -> str:
    """CSV export: header plus one line per shot, LF line endings."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.index},{r.setting1},{r.setting2},{r.outcome1},{r.outcome2}")
    return "\n".join(lines) + "\n"


def export_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))
