import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from smolinqss.qstate import DensityMatrix

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string(word: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for c in word:
        out = np.kron(out, PAULI[c])
    return out


def random_density(n_qubits: int, seed: int, rank: int | None = None) -> DensityMatrix:
    rng = np.random.default_rng(seed)
    d = 1 << n_qubits
    k = rank or d
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


def brute_partial_trace(m: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    """Sum over basis labels of traced qubits, one matrix element at a time."""
    keep = sorted(keep)
    traced = [q for q in range(1, n + 1) if q not in keep]
    dk = 1 << len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def index(kept_bits, traced_bits):
        bits = {}
        bits.update(zip(keep, kept_bits))
        bits.update(zip(traced, traced_bits))
        return sum(bits[q] << (n - q) for q in range(1, n + 1))

    for a in itertools.product((0, 1), repeat=len(keep)):
        for b in itertools.product((0, 1), repeat=len(keep)):
            s = 0j
            for t in itertools.product((0, 1), repeat=len(traced)):
                s += m[index(a, t), index(b, t)]
            out[int("".join(map(str, a)) or "0", 2), int("".join(map(str, b)) or "0", 2)] = s
    return out


def brute_partial_transpose(m: np.ndarray, n: int, sub: list[int]) -> np.ndarray:
    d = 1 << n
    out = np.zeros_like(m)
    for i in range(d):
        for j in range(d):
            ii, jj = i, j
            for q in sub:
                bit = 1 << (n - q)
                bi, bj = i & bit, j & bit
                ii = (ii & ~bit) | bj
                jj = (jj & ~bit) | bi
            out[ii, jj] = m[i, j]
    return out


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def smolin():
    from smolinqss.qstate import smolin_state

    return smolin_state()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
