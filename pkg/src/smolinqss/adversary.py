"""Eavesdropper models acting on qubits 3 and 4 while they travel to Bob and Charlie."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .measurement import bell_branches, bell_measure
from .qstate import BellLabel, DensityMatrix, bell_density, depolarize, tensor
from .rng import Rng

CLONE_P_BOUND = 2.0 / 3.0


class AttackKind(str, enum.Enum):
    CLONE_DEPOLARIZE = "clone"
    BELL_RESEND = "bell-resend"


@dataclass(frozen=True)
class AttackSpec:
    """Configuration of Eve's attack.

    ``p`` is the surviving fraction of the Smolin state under the clone
    attack; values above 2/3 exceed what a cloner can leave behind and need
    ``allow_weak_clone``. ``attack_probability`` is the per-copy chance that
    Eve touches a copy at all.
    """

    kind: AttackKind
    p: float = CLONE_P_BOUND
    attack_probability: float = 1.0
    allow_weak_clone: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.attack_probability <= 1.0:
            raise InvalidParameterError(
                f"attack_probability must lie in [0, 1], got {self.attack_probability}"
            )
        if (
            self.kind is AttackKind.CLONE_DEPOLARIZE
            and self.p > CLONE_P_BOUND + 1e-12
            and not self.allow_weak_clone
        ):
            raise InvalidParameterError(
                f"clone attack with p={self.p} > 2/3 requires allow_weak_clone"
            )


def _check_four(state: DensityMatrix) -> None:
    if state.n_qubits != 4:
        raise InvalidParameterError(f"attacks act on 4-qubit copies, got {state.n_qubits} qubits")


def attack_clone(copy_state: DensityMatrix, p: float) -> DensityMatrix:
    """Clone-and-redistribute attack, modelled as global depolarisation to ``p``."""
    _check_four(copy_state)
    return depolarize(copy_state, p)


def bell_resend_branches(copy_state: DensityMatrix) -> list[tuple[BellLabel, float, DensityMatrix | None]]:
    """Outcomes of the Bell-measure-and-resend attack with their post-attack joint states."""
    _check_four(copy_state)
    out = []
    for label, prob, rest in bell_branches(copy_state, (3, 4)):
        out.append((label, prob, None if rest is None else tensor(rest, bell_density(label))))
    return out


def attack_bell_resend(copy_state: DensityMatrix, rng: Rng) -> tuple[DensityMatrix, BellLabel]:
    """Eve Bell-measures qubits 3,4, keeps the label and forwards a fresh pair in that Bell state."""
    _check_four(copy_state)
    label, rest = bell_measure(copy_state, (3, 4), rng)
    return tensor(rest, bell_density(label)), label


def averaged_bell_resend(copy_state: DensityMatrix) -> DensityMatrix:
    """Post-attack state averaged over Eve's outcomes."""
    m = sum(p * s.entries for _, p, s in bell_resend_branches(copy_state) if s is not None)
    return DensityMatrix(m)


def eve_key_knowledge(attack: AttackSpec | None, session) -> float:
    """Fraction of Alice's key bits that Eve's log predicts exactly.

    ``session`` is anything exposing ``register`` (a CopyRegister) after a
    completed run. Only the Bell-resend attack leaves Eve a log; without one
    she predicts nothing beyond guessing, reported as 0.
    """
    if attack is None or attack.kind is not AttackKind.BELL_RESEND:
        return 0.0
    reg = getattr(session, "register", session)
    keys = reg.key_indices()
    alice = reg.alice_labels[keys]
    if alice.size == 0 or np.any(alice < 0):
        return 0.0
    eve = reg.eve_labels[keys]
    known = eve >= 0
    # Each label carries two bits; Eve knows a bit iff it agrees with Alice's.
    matched = 0
    for shift in (1, 0):
        matched += int(np.count_nonzero(known & (((eve >> shift) & 1) == ((alice >> shift) & 1))))
    return matched / (2 * alice.size)
