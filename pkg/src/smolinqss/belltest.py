"""Two-setting Bell functionals: the four-qubit test and plain two-qubit CHSH.

The four-qubit functional is

    E(1,1,1,1) + E(1,1,1,2) + E(2,2,2,1) - E(2,2,2,2)  <=  2   (local models)

where the first three slots always share a setting index and the last slot
varies independently. That independent slot belongs to the qubit carrying
the rotated ``(X +/- Y)/sqrt(2)`` settings, which is qubit 1 (Alice's); the
three shared slots are qubits 2, 3, 4 measured in X or Y. Written in qubit
order ``(q1, q2, q3, q4)`` the four terms are therefore::

    (1,1,1,1)  +      (2,1,1,1)  +      (1,2,2,2)  +      (2,2,2,2)  -

and the Smolin state reaches 2*sqrt(2) on them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .measurement import SIGMA_X, SIGMA_Y, SIGMA_Z, MeasurementSetting, expectation, sample_outcomes
from .qstate import ATOL, DensityMatrix
from .rng import Rng
from .stats import CHSH_SIGNS, SampleAccumulator, combine_terms

LOCAL_BOUND = 2.0
DEFAULT_K = 3.0

# (setting index per qubit in qubit order, sign)
CHSH4_TERMS: tuple[tuple[tuple[int, ...], int], ...] = (
    ((1, 1, 1, 1), +1),
    ((2, 1, 1, 1), +1),
    ((1, 2, 2, 2), +1),
    ((2, 2, 2, 2), -1),
)
CHSH2_TERMS: tuple[tuple[tuple[int, ...], int], ...] = (
    ((1, 1), +1),
    ((1, 2), +1),
    ((2, 1), +1),
    ((2, 2), -1),
)


class Verdict(str, enum.Enum):
    SECURE = "Secure"
    INSECURE = "Insecure"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SettingsTable:
    """Two measurement settings for each qubit, indexed 1 and 2."""

    settings: tuple[tuple[MeasurementSetting, MeasurementSetting], ...]

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.settings)
        if any(len(p) != 2 for p in pairs):
            raise InvalidParameterError("every qubit needs exactly two settings")
        object.__setattr__(self, "settings", pairs)

    @property
    def n_qubits(self) -> int:
        return len(self.settings)

    def setting(self, qubit: int, index: int) -> MeasurementSetting:
        return self.settings[qubit - 1][index - 1]

    def for_combo(self, combo: Sequence[int]) -> tuple[MeasurementSetting, ...]:
        if len(combo) != self.n_qubits:
            raise InvalidParameterError(f"combo {combo} does not match {self.n_qubits} qubits")
        return tuple(self.settings[q][i - 1] for q, i in enumerate(combo))

    def replace(self, qubit: int, index: int, setting: MeasurementSetting) -> "SettingsTable":
        rows = [list(p) for p in self.settings]
        rows[qubit - 1][index - 1] = setting
        return SettingsTable(tuple(tuple(r) for r in rows))


def default_settings() -> SettingsTable:
    """Qubit 1: (X+Y)/sqrt2 and (X-Y)/sqrt2. Qubits 2-4: X and Y."""
    rotated = (MeasurementSetting.normalized(1, 1, 0), MeasurementSetting.normalized(1, -1, 0))
    return SettingsTable((rotated, (SIGMA_X, SIGMA_Y), (SIGMA_X, SIGMA_Y), (SIGMA_X, SIGMA_Y)))


def chsh2_optimal_settings() -> SettingsTable:
    """Settings reaching 2*sqrt(2) on Phi+: Z, X on qubit 1 and (Z +/- X)/sqrt2 on qubit 2."""
    return SettingsTable(
        (
            (SIGMA_Z, SIGMA_X),
            (MeasurementSetting.normalized(1, 0, 1), MeasurementSetting.normalized(-1, 0, 1)),
        )
    )


@dataclass(frozen=True)
class BellFunctionalResult:
    value: float
    components: tuple[float, ...]
    mode: str = "exact"
    sample_count: int = 0
    std_error: float = 0.0
    term_counts: tuple[int, ...] = field(default=(0, 0, 0, 0))
    signs: tuple[int, ...] = CHSH_SIGNS

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise InvalidParameterError(f"unknown mode {self.mode!r}")
        if not self.inconclusive:
            combined = sum(s * c for s, c in zip(self.signs, self.components))
            if abs(combined - self.value) > ATOL:
                raise InvalidParameterError("value does not match the signed components")

    @property
    def inconclusive(self) -> bool:
        return self.mode == "sampled" and min(self.term_counts) == 0


def _exact(rho: DensityMatrix, table: SettingsTable, terms) -> BellFunctionalResult:
    components = tuple(expectation(rho, table.for_combo(c)) for c, _ in terms)
    signs = tuple(s for _, s in terms)
    value, _ = combine_terms(components, (0.0,) * len(terms), signs)
    return BellFunctionalResult(value, components, "exact", 0, 0.0, (0,) * len(terms), signs)


def chsh4_exact(rho: DensityMatrix, table: SettingsTable | None = None) -> BellFunctionalResult:
    if rho.n_qubits != 4:
        raise InvalidParameterError(f"four-qubit functional needs a 4-qubit state, got {rho.n_qubits}")
    return _exact(rho, table or default_settings(), CHSH4_TERMS)


def chsh2_exact(rho: DensityMatrix, table: SettingsTable | None = None) -> float:
    if rho.n_qubits != 2:
        raise InvalidParameterError(f"CHSH needs a 2-qubit state, got {rho.n_qubits}")
    return _exact(rho, table or chsh2_optimal_settings(), CHSH2_TERMS).value


def schedule_terms(rounds: int, rng: Rng, schedule: str = "random") -> np.ndarray:
    """Assign each round one of the four terms (0..3)."""
    if schedule == "random":
        return rng.integers(0, 4, size=rounds)
    if schedule == "round-robin":
        return np.arange(rounds) % 4
    raise InvalidParameterError(f"unknown schedule {schedule!r}")


def result_from_accumulators(accs: Sequence[SampleAccumulator], terms) -> BellFunctionalResult:
    counts = tuple(a.count for a in accs)
    signs = tuple(s for _, s in terms)
    if min(counts) == 0:
        means = tuple(a.mean if a.count else math.nan for a in accs)
        return BellFunctionalResult(math.nan, means, "sampled", sum(counts), math.nan, counts, signs)
    value, err = combine_terms([a.mean for a in accs], [a.stderr for a in accs], signs)
    return BellFunctionalResult(
        value, tuple(a.mean for a in accs), "sampled", sum(counts), err, counts, signs
    )


def _sampled(rho, table, rounds, rng, schedule, terms) -> BellFunctionalResult:
    if rounds < 4:
        raise InvalidParameterError(f"need at least 4 rounds, got {rounds}")
    which = schedule_terms(rounds, rng.split("schedule"), schedule)
    outcomes_rng = rng.split("outcomes")
    accs = []
    for t, (combo, _) in enumerate(terms):
        n = int(np.count_nonzero(which == t))
        outcomes = sample_outcomes(rho, table.for_combo(combo), n, outcomes_rng)
        accs.append(SampleAccumulator().extend(np.prod(outcomes, axis=1)))
    return result_from_accumulators(accs, terms)


def chsh4_sampled(
    rho: DensityMatrix,
    table: SettingsTable | None,
    rounds: int,
    rng: Rng,
    schedule: str = "random",
) -> BellFunctionalResult:
    """Estimate the four-qubit functional from ``rounds`` single-shot rounds.

    Every round picks one of the four setting combinations, measures all four
    qubits and records the product of the outcomes.
    """
    if rho.n_qubits != 4:
        raise InvalidParameterError(f"four-qubit functional needs a 4-qubit state, got {rho.n_qubits}")
    return _sampled(rho, table or default_settings(), rounds, rng, schedule, CHSH4_TERMS)


def chsh2_sampled(
    rho: DensityMatrix,
    table: SettingsTable | None,
    rounds: int,
    rng: Rng,
    schedule: str = "random",
) -> BellFunctionalResult:
    if rho.n_qubits != 2:
        raise InvalidParameterError(f"CHSH needs a 2-qubit state, got {rho.n_qubits}")
    return _sampled(rho, table or chsh2_optimal_settings(), rounds, rng, schedule, CHSH2_TERMS)


def violation_threshold_check(result: BellFunctionalResult, confidence_k: float = DEFAULT_K) -> Verdict:
    """Secure iff ``value - k * std_error`` exceeds the local bound.

    Exact results carry zero error. The comparison keeps an ``ATOL`` margin so
    a value equal to the bound up to roundoff is never called a violation.
    """
    if result.inconclusive:
        return Verdict.INCONCLUSIVE
    lower = result.value - confidence_k * result.std_error
    return Verdict.SECURE if lower > LOCAL_BOUND + ATOL else Verdict.INSECURE
