"""Dense multi-qubit states: Bell pairs, the Smolin state and basic algebra.

Qubits are numbered from 1. Qubit 1 is the most significant position of the
computational-basis index, so ``|q1 q2 ... qn>`` maps to the integer whose
binary expansion is ``q1 q2 ... qn``. Every module in the package shares this
convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import InvalidParameterError

ATOL = 1e-10
PSD_SLACK = 1e-9
MAX_QUBITS = 4


class BellLabel(enum.IntEnum):
    """The four Bell states. The integer value is the 2-bit key encoding."""

    PHI_PLUS = 0b00
    PHI_MINUS = 0b01
    PSI_PLUS = 0b10
    PSI_MINUS = 0b11

    @property
    def bits(self) -> str:
        return format(int(self), "02b")

    @classmethod
    def from_bits(cls, bits: str) -> "BellLabel":
        if len(bits) != 2 or set(bits) - {"0", "1"}:
            raise InvalidParameterError(f"expected two bits, got {bits!r}")
        return cls(int(bits, 2))

    @property
    def symbol(self) -> str:
        return {0: "Phi+", 1: "Phi-", 2: "Psi+", 3: "Psi-"}[int(self)]


def _check_qubit_count(n: int) -> None:
    if not 0 <= n <= MAX_QUBITS:
        raise InvalidParameterError(f"supported qubit counts are 0..{MAX_QUBITS}, got {n}")


def _qubit_count(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise InvalidParameterError(f"dimension {dim} is not a power of two")
    _check_qubit_count(n)
    return n


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalised state vector over ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _qubit_count(amps.size)
        if abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise InvalidParameterError("amplitudes are not normalised")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.amplitudes.size)

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on up to four qubits.

    Construction validates the invariants and freezes the underlying array;
    every operation in the package returns a new instance.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParameterError(f"density matrix must be square, got shape {m.shape}")
        _qubit_count(m.shape[0])
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=ATOL):
            raise InvalidParameterError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > ATOL:
            raise InvalidParameterError(f"trace is {np.trace(m).real:.12g}, expected 1")
        # Remove the anti-Hermitian roundoff so eigvalsh sees an exact Hermitian input.
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m)[0] < -PSD_SLACK:
            raise InvalidParameterError("density matrix is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.entries.shape[0])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues."""
        return np.linalg.eigvalsh(self.entries)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def allclose(self, other: "DensityMatrix | np.ndarray", atol: float = ATOL) -> bool:
        theirs = other.entries if isinstance(other, DensityMatrix) else np.asarray(other)
        return theirs.shape == self.entries.shape and np.allclose(
            self.entries, theirs, rtol=0.0, atol=atol
        )

    def key(self) -> bytes:
        """Byte fingerprint, stable across runs; used to group identical copies."""
        return self.entries.tobytes()


def _validate_qubits(n: int, qubits: Iterable[int], what: str) -> tuple[int, ...]:
    qs = tuple(int(q) for q in qubits)
    if len(set(qs)) != len(qs):
        raise InvalidParameterError(f"{what} contains repeated qubits: {qs}")
    bad = [q for q in qs if not 1 <= q <= n]
    if bad:
        raise InvalidParameterError(f"{what} has qubits {bad} outside 1..{n}")
    return qs


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    _check_qubit_count(n_qubits)
    d = 1 << n_qubits
    return DensityMatrix(np.eye(d, dtype=complex) / d)


_BELL_AMPLITUDES = {
    BellLabel.PHI_PLUS: (1, 0, 0, 1),
    BellLabel.PHI_MINUS: (1, 0, 0, -1),
    BellLabel.PSI_PLUS: (0, 1, 1, 0),
    BellLabel.PSI_MINUS: (0, 1, -1, 0),
}


@lru_cache(maxsize=None)
def bell_state(label: BellLabel) -> PureState:
    """Two-qubit Bell vector for ``label``."""
    return PureState(np.array(_BELL_AMPLITUDES[BellLabel(label)], dtype=complex) / np.sqrt(2.0))


@lru_cache(maxsize=None)
def bell_density(label: BellLabel) -> DensityMatrix:
    return bell_state(label).density()


def bell_basis() -> np.ndarray:
    """4x4 unitary whose column ``k`` is the Bell vector with label value ``k``."""
    return np.column_stack([bell_state(b).amplitudes for b in BellLabel])


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product; ``a`` occupies the leading (more significant) qubits."""
    _check_qubit_count(a.n_qubits + b.n_qubits)
    return DensityMatrix(np.kron(a.entries, b.entries))


@lru_cache(maxsize=None)
def smolin_state() -> DensityMatrix:
    """Equal mixture of ``|B><B|_12 (x) |B><B|_34`` over the four Bell labels."""
    m = sum(np.kron(bell_density(b).entries, bell_density(b).entries) for b in BellLabel)
    return DensityMatrix(m / 4.0)


def depolarize(rho: DensityMatrix, p: float) -> DensityMatrix:
    """Mix ``rho`` with white noise, keeping a fraction ``p`` of the original.

    Returns ``(1 - p) I / d + p rho`` with ``d`` the Hilbert-space dimension.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    d = rho.dim
    return DensityMatrix((1.0 - p) * np.eye(d, dtype=complex) / d + p * rho.entries)


def permute_qubits(rho: DensityMatrix, order: Iterable[int]) -> DensityMatrix:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i-1]``."""
    n = rho.n_qubits
    order = _validate_qubits(n, order, "order")
    if len(order) != n:
        raise InvalidParameterError("order must list every qubit exactly once")
    axes = [q - 1 for q in order]
    t = rho.entries.reshape((2,) * (2 * n)).transpose(axes + [n + a for a in axes])
    return DensityMatrix(t.reshape(rho.dim, rho.dim))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (kept in ascending order)."""
    n = rho.n_qubits
    keep = sorted(_validate_qubits(n, keep, "keep"))
    if not keep:
        raise InvalidParameterError("keep must be non-empty")
    t = rho.entries.reshape((2,) * (2 * n))
    m = n
    for q in reversed(range(1, n + 1)):
        if q in keep:
            continue
        t = np.trace(t, axis1=q - 1, axis2=q - 1 + m)
        m -= 1
    d = 1 << len(keep)
    return DensityMatrix(t.reshape(d, d))


def partial_transpose(rho: DensityMatrix, subsystem: Iterable[int]) -> np.ndarray:
    """Transpose the indices of ``subsystem`` only.

    The result is Hermitian with unit trace but need not be positive, so a
    plain array is returned rather than a :class:`DensityMatrix`.
    """
    n = rho.n_qubits
    sub = _validate_qubits(n, subsystem, "subsystem")
    axes = list(range(2 * n))
    for q in sub:
        axes[q - 1], axes[n + q - 1] = axes[n + q - 1], axes[q - 1]
    t = rho.entries.reshape((2,) * (2 * n)).transpose(axes)
    return t.reshape(rho.dim, rho.dim)


def min_pt_eigenvalue(rho: DensityMatrix, subsystem: Iterable[int]) -> float:
    """Smallest eigenvalue of the partial transpose; negative means NPT."""
    pt = partial_transpose(rho, subsystem)
    return float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
