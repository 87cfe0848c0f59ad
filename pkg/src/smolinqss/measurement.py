"""Born-rule measurements on dense states.

Two layers live here. ``measure_qubit`` and ``bell_measure`` act on one state
and return its collapsed successor, exactly as a single run of an experiment
would. ``joint_distribution``/``sample_outcomes`` and ``bell_branches`` give
the full outcome distribution of the same measurements so that many
independent copies of one state can be sampled in a single vectorised draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateBranchError, InvalidParameterError
from .qstate import ATOL, BellLabel, DensityMatrix, _validate_qubits, bell_basis, permute_qubits
from .rng import Rng

MIN_BRANCH_PROB = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class MeasurementSetting:
    """A +/-1 valued observable ``direction . (sigma_x, sigma_y, sigma_z)``."""

    direction: tuple[float, float, float]

    def __post_init__(self):
        d = tuple(float(c) for c in self.direction)
        if len(d) != 3:
            raise InvalidParameterError("direction must be a 3-vector")
        if abs(np.linalg.norm(d) - 1.0) > ATOL:
            raise InvalidParameterError(f"direction {d} is not unit norm")
        object.__setattr__(self, "direction", d)

    @classmethod
    def normalized(cls, *components: float) -> "MeasurementSetting":
        v = np.asarray(components, dtype=float)
        return cls(tuple(v / np.linalg.norm(v)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.direction)

    def observable(self) -> np.ndarray:
        x, y, z = self.direction
        return x * PAULI_X + y * PAULI_Y + z * PAULI_Z

    def projector(self, value: int) -> np.ndarray:
        if value not in (1, -1):
            raise InvalidParameterError(f"outcome must be +1 or -1, got {value}")
        return 0.5 * (IDENTITY + value * self.observable())

    def eigenbasis(self) -> np.ndarray:
        """Unitary with the +1 eigenvector in column 0 and the -1 one in column 1."""
        return _eigenbasis(self.direction)

    def __str__(self):
        return "(" + ",".join(f"{c:.6g}" for c in self.direction) + ")"


@lru_cache(maxsize=256)
def _eigenbasis(direction: tuple[float, float, float]) -> np.ndarray:
    x, y, z = direction
    obs = x * PAULI_X + y * PAULI_Y + z * PAULI_Z
    vals, vecs = np.linalg.eigh(obs)
    u = vecs[:, ::-1].copy()
    u.flags.writeable = False
    return u


SIGMA_X = MeasurementSetting((1.0, 0.0, 0.0))
SIGMA_Y = MeasurementSetting((0.0, 1.0, 0.0))
SIGMA_Z = MeasurementSetting((0.0, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    value: int
    probability: float
    post_state: DensityMatrix


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Lift a single-qubit operator to act on ``qubit`` of an n-qubit register."""
    return np.kron(np.kron(np.eye(1 << (qubit - 1)), op), np.eye(1 << (n_qubits - qubit)))


def branch_probabilities(rho: DensityMatrix, qubit: int, setting: MeasurementSetting) -> dict[int, float]:
    (qubit,) = _validate_qubits(rho.n_qubits, [qubit], "qubit")
    out = {}
    for v in (1, -1):
        p = np.real(np.trace(embed(setting.projector(v), qubit, rho.n_qubits) @ rho.entries))
        out[v] = float(min(max(p, 0.0), 1.0))
    return out


def measure_qubit(
    rho: DensityMatrix,
    qubit: int,
    setting: MeasurementSetting,
    rng: Rng | None = None,
    force: int | None = None,
) -> MeasurementOutcome:
    """Projectively measure one qubit along ``setting``.

    Either ``rng`` samples the outcome by the Born rule, or ``force`` selects
    the branch explicitly (useful for enumerating branches). Forcing a branch
    of probability below ``MIN_BRANCH_PROB`` raises DegenerateBranchError.
    """
    probs = branch_probabilities(rho, qubit, setting)
    if force is None:
        if rng is None:
            raise InvalidParameterError("either rng or force must be given")
        value = 1 if rng.random() < probs[1] else -1
        if probs[value] < MIN_BRANCH_PROB:
            value = -value
    else:
        value = int(force)
        if value not in (1, -1):
            raise InvalidParameterError(f"forced outcome must be +1 or -1, got {force}")
        if probs[value] < MIN_BRANCH_PROB:
            raise DegenerateBranchError(
                f"outcome {value:+d} on qubit {qubit} has probability {probs[value]:.3g}"
            )
    proj = embed(setting.projector(value), qubit, rho.n_qubits)
    p = probs[value]
    post = proj @ rho.entries @ proj / p
    return MeasurementOutcome(value, p, DensityMatrix(post))


def expectation(rho: DensityMatrix, settings: Sequence[MeasurementSetting]) -> float:
    """Exact correlation ``Tr(rho . (x)_i s_i)`` with one setting per qubit."""
    if len(settings) != rho.n_qubits:
        raise InvalidParameterError(
            f"need {rho.n_qubits} settings, got {len(settings)}"
        )
    op = np.array([[1.0 + 0j]])
    for s in settings:
        op = np.kron(op, s.observable())
    return float(np.real(np.trace(rho.entries @ op)))


def joint_distribution(rho: DensityMatrix, settings: Sequence[MeasurementSetting]) -> np.ndarray:
    """Probabilities of all 2**n outcome patterns of a product measurement.

    Index bit ``n - i`` (qubit ``i`` most significant) is 0 for outcome +1 and
    1 for outcome -1.
    """
    if len(settings) != rho.n_qubits:
        raise InvalidParameterError(f"need {rho.n_qubits} settings, got {len(settings)}")
    u = np.array([[1.0 + 0j]])
    for s in settings:
        u = np.kron(u, s.eigenbasis())
    probs = np.real(np.einsum("ki,kl,li->i", u.conj(), rho.entries, u))
    probs[probs < MIN_BRANCH_PROB] = 0.0
    return probs / probs.sum()


@lru_cache(maxsize=8)
def _pattern_values(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    vals = (1 - 2 * bits).astype(np.int8)
    vals.flags.writeable = False
    return vals


def sample_outcomes(
    rho: DensityMatrix, settings: Sequence[MeasurementSetting], size: int, rng: Rng
) -> np.ndarray:
    """``size`` independent rounds of the product measurement; shape (size, n) of +/-1."""
    probs = joint_distribution(rho, settings)
    return _pattern_values(rho.n_qubits)[rng.categorical(probs, size)]


def _pair_first(rho: DensityMatrix, pair: tuple[int, int]) -> DensityMatrix:
    n = rho.n_qubits
    a, b = _validate_qubits(n, pair, "pair")
    rest = [q for q in range(1, n + 1) if q not in (a, b)]
    return permute_qubits(rho, [a, b, *rest])


def _check_pair(rho: DensityMatrix, pair) -> tuple[int, int]:
    pair = tuple(int(q) for q in pair)
    if len(pair) != 2:
        raise InvalidParameterError(f"pair must hold two qubits, got {pair}")
    if pair[0] == pair[1]:
        raise InvalidParameterError(f"pair qubits must differ, got {pair}")
    _validate_qubits(rho.n_qubits, pair, "pair")
    return pair


def bell_branches(rho: DensityMatrix, pair=(1, 2)) -> list[tuple[BellLabel, float, DensityMatrix | None]]:
    """Every Bell outcome on ``pair`` with its probability and residual state.

    The residual is the normalised state of the remaining qubits (in their
    original relative order), or None when the branch is impossible.
    """
    pair = _check_pair(rho, pair)
    moved = _pair_first(rho, pair)
    rest_dim = rho.dim // 4
    t = moved.entries.reshape(4, rest_dim, 4, rest_dim)
    basis = bell_basis()
    out = []
    for label in BellLabel:
        v = basis[:, int(label)]
        block = np.einsum("i,iajb,j->ab", v.conj(), t, v)
        p = float(np.real(np.trace(block)))
        if p < MIN_BRANCH_PROB:
            out.append((label, 0.0, None))
        else:
            out.append((label, p, DensityMatrix(block / p)))
    return out


def bell_probabilities(rho: DensityMatrix, pair=(1, 2)) -> np.ndarray:
    return np.array([p for _, p, _ in bell_branches(rho, pair)])


def bell_measure(rho: DensityMatrix, pair, rng: Rng) -> tuple[BellLabel, DensityMatrix]:
    """Sample a Bell-basis measurement on ``pair``; the pair is traced out afterwards."""
    branches = bell_branches(rho, pair)
    k = int(rng.categorical(np.array([p for _, p, _ in branches]), 1)[0])
    label, _, residual = branches[k]
    return label, residual
