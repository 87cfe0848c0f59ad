"""Three-party secret sharing session over Smolin-state copies.

Alice keeps qubits 1 and 2 of every copy, Bob receives qubit 3 and Charlie
qubit 4. A session runs in three phases:

1. distribution -- copies are prepared and qubits 3, 4 sent out (Eve may act
   on them in transit); Bob and Charlie announce receipt;
2. security check -- Alice picks M random copies, announces a setting
   combination for each, all four qubits are measured and Alice evaluates the
   four-qubit Bell functional;
3. transfer -- on a Secure verdict Alice Bell-measures qubits 1,2 of every
   remaining copy; Bob and Charlie can recover each label only jointly, by a
   Bell measurement on qubits 3,4.

Copies are independent, so the register stores each distinct joint state
once and samples all copies sharing a state in a single vectorised draw.
Sampling order is fixed (by term, then by state-table index), which keeps
sessions bit-exactly replayable from the master seed.
"""

from __future__ import annotations

import enum
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .adversary import AttackKind, AttackSpec, attack_clone, bell_resend_branches
from .belltest import (
    CHSH2_TERMS,
    CHSH4_TERMS,
    DEFAULT_K,
    BellFunctionalResult,
    SettingsTable,
    Verdict,
    chsh2_optimal_settings,
    default_settings,
    result_from_accumulators,
    schedule_terms,
    violation_threshold_check,
)
from .errors import InsufficientSharesError, InvalidParameterError, ProtocolAbortError
from .measurement import bell_branches, sample_outcomes
from .qstate import BellLabel, DensityMatrix, bell_density, maximally_mixed, partial_trace, smolin_state, tensor
from .rng import Rng
from .stats import SampleAccumulator

ALICE, BOB, CHARLIE, EVE, SYSTEM = "alice", "bob", "charlie", "eve", "system"
QUBIT_OWNER = {1: ALICE, 2: ALICE, 3: BOB, 4: CHARLIE}


class Role(enum.IntEnum):
    UNASSIGNED = 0
    CHECK = 1
    KEY = 2


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SessionConfig:
    n_copies: int
    check_fraction: float = 0.5
    master_seed: int = 0
    attack: AttackSpec | None = None
    verdict_k: float = DEFAULT_K
    schedule: str = "random"

    def __post_init__(self):
        if int(self.n_copies) != self.n_copies or self.n_copies < 2:
            raise InvalidParameterError(f"n_copies must be an integer >= 2, got {self.n_copies}")
        if not 0.0 < self.check_fraction < 1.0:
            raise InvalidParameterError(f"check_fraction must lie in (0, 1), got {self.check_fraction}")
        if not 1 <= self.n_checks <= self.n_copies - 1:
            raise InvalidParameterError(
                f"check_fraction={self.check_fraction} gives M={self.n_checks} checks "
                f"out of N={self.n_copies}; need 1 <= M <= N-1"
            )
        if not 0 <= int(self.master_seed) < 1 << 64:
            raise InvalidParameterError(f"master_seed must be an unsigned 64-bit integer")
        if self.verdict_k < 0:
            raise InvalidParameterError(f"verdict_k must be non-negative, got {self.verdict_k}")
        if self.schedule not in ("random", "round-robin"):
            raise InvalidParameterError(f"unknown schedule {self.schedule!r}")

    @property
    def n_checks(self) -> int:
        # Half-up rounding, independent of Python's banker's rounding.
        return int(math.floor(self.check_fraction * self.n_copies + 0.5))

    @property
    def n_key_copies(self) -> int:
        return self.n_copies - self.n_checks


# --------------------------------------------------------------------------
# transcript


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (tuple, list, np.ndarray)):
        return ",".join(_fmt(v.item() if isinstance(v, np.generic) else v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Event:
    seq: int
    phase: str
    party: str
    kind: str
    payload: tuple[tuple[str, str], ...] = ()

    def to_record(self) -> str:
        body = " ".join(f"{k}={v}" for k, v in self.payload)
        return f"{self.seq}\t{self.phase}\t{self.party}\t{self.kind}\t{body}"


class Transcript:
    """Totally ordered event log. One tab-separated record per line:
    ``seq, phase, party, kind, payload`` with payload ``key=value`` pairs in
    insertion order."""

    def __init__(self):
        self.events: list[Event] = []

    def add(self, phase: str, party: str, kind: str, **payload) -> Event:
        ev = Event(len(self.events), phase, party, kind, tuple((k, _fmt(v)) for k, v in payload.items()))
        self.events.append(ev)
        return ev

    def __len__(self):
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def lines(self) -> list[str]:
        return [e.to_record() for e in self.events]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def of_kind(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


# --------------------------------------------------------------------------
# copies


@dataclass(frozen=True, eq=False)
class CopyRecord:
    record_number: int
    role: Role
    state: DensityMatrix | None
    alice_qubits: tuple[int, int] = (1, 2)
    bob_qubit: int = 3
    charlie_qubit: int = 4


class CopyRegister:
    """Joint four-qubit states of every copy in a session plus per-copy bookkeeping.

    ``state_index[i]`` points into a table of distinct states; consumed
    (check) copies keep their last index but are reported with ``state=None``.
    """

    def __init__(self, n_copies: int, initial: DensityMatrix):
        self.record_numbers = np.arange(1, n_copies + 1)
        self.states: list[DensityMatrix] = []
        self._by_key: dict[bytes, int] = {}
        self.state_index = np.full(n_copies, self.intern(initial), dtype=np.int64)
        self.roles = np.zeros(n_copies, dtype=np.int8)
        self.consumed = np.zeros(n_copies, dtype=bool)
        self.eve_labels = np.full(n_copies, -1, dtype=np.int8)
        self.alice_labels = np.full(n_copies, -1, dtype=np.int8)
        self.bc_labels = np.full(n_copies, -1, dtype=np.int8)
        self.verdict: Verdict | None = None

    def intern(self, state: DensityMatrix) -> int:
        key = state.key()
        if key not in self._by_key:
            self._by_key[key] = len(self.states)
            self.states.append(state)
        return self._by_key[key]

    def __len__(self):
        return self.record_numbers.size

    def __getitem__(self, i: int) -> CopyRecord:
        state = None if self.consumed[i] else self.states[self.state_index[i]]
        return CopyRecord(int(self.record_numbers[i]), Role(int(self.roles[i])), state)

    def __iter__(self) -> Iterator[CopyRecord]:
        return (self[i] for i in range(len(self)))

    def state_of(self, i: int) -> DensityMatrix:
        return self.states[self.state_index[i]]

    def check_indices(self) -> np.ndarray:
        return np.flatnonzero(self.roles == Role.CHECK)

    def key_indices(self) -> np.ndarray:
        return np.flatnonzero(self.roles == Role.KEY)

    def groups(self, indices: np.ndarray) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(state_table_index, positions)`` in ascending table order."""
        idx = self.state_index[indices]
        for s in np.unique(idx):
            yield int(s), indices[idx == s]


@dataclass(frozen=True)
class KeyMaterial:
    """Bell labels in record order; each label contributes two key bits."""

    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() > 3):
            raise InvalidParameterError("labels must be 2-bit values")
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    def __len__(self):
        return 2 * self.labels.size

    def __eq__(self, other):
        return isinstance(other, KeyMaterial) and np.array_equal(self.labels, other.labels)

    @property
    def bell_labels(self) -> list[BellLabel]:
        return [BellLabel(int(v)) for v in self.labels]

    def bit_array(self) -> np.ndarray:
        return np.stack([(self.labels >> 1) & 1, self.labels & 1], axis=1).reshape(-1).astype(np.uint8)

    @property
    def bits(self) -> str:
        return "".join("01"[b] for b in self.bit_array())

    def to_hex(self) -> str:
        """Lowercase hex, most significant bit first; a final partial nibble is zero-padded on the right."""
        bits = self.bit_array()
        pad = (-bits.size) % 4
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
        nibbles = bits.reshape(-1, 4) @ np.array([8, 4, 2, 1])
        return "".join("0123456789abcdef"[n] for n in nibbles)


@dataclass(frozen=True)
class SecurityReport:
    value: float
    std_error: float
    sample_count: int
    verdict: Verdict
    components: tuple[float, ...]
    term_counts: tuple[int, ...]
    confidence_k: float


# --------------------------------------------------------------------------
# phases


def phase1_distribute(
    cfg: SessionConfig,
    rng: Rng | None = None,
    transcript: Transcript | None = None,
) -> CopyRegister:
    """Prepare N Smolin copies and route qubits 3, 4 through the (possibly tapped) channel."""
    rng = rng or Rng(cfg.master_seed).split("phase1")
    n = cfg.n_copies
    source = smolin_state()
    reg = CopyRegister(n, source)
    attack = cfg.attack

    attacked = np.zeros(n, dtype=bool)
    if attack is not None:
        eve = rng.split(EVE)
        if attack.attack_probability >= 1.0:
            attacked[:] = True
        else:
            attacked = eve.random(n) < attack.attack_probability
        hit = np.flatnonzero(attacked)
        if attack.kind is AttackKind.CLONE_DEPOLARIZE:
            reg.state_index[hit] = reg.intern(attack_clone(source, attack.p))
        else:
            branches = bell_resend_branches(source)
            labels = eve.categorical(np.array([p for _, p, _ in branches]), hit.size)
            table = np.array([-1 if s is None else reg.intern(s) for _, _, s in branches])
            reg.state_index[hit] = table[labels]
            reg.eve_labels[hit] = labels

    if transcript is not None:
        transcript.add("distribution", ALICE, "prepare", copies=n, state="smolin")
        for i in range(n):
            r = int(reg.record_numbers[i])
            transcript.add("distribution", ALICE, "send", record=r, qubit=3, to=BOB)
            transcript.add("distribution", ALICE, "send", record=r, qubit=4, to=CHARLIE)
            if attacked[i]:
                extra = {"label": BellLabel(int(reg.eve_labels[i])).symbol} if reg.eve_labels[i] >= 0 else {}
                transcript.add("distribution", EVE, "intercept", record=r, attack=attack.kind, **extra)
            transcript.add("distribution", BOB, "announce", record=r, received=3)
            transcript.add("distribution", CHARLIE, "announce", record=r, received=4)
    return reg


def phase2_security_check(
    copies: CopyRegister,
    cfg: SessionConfig,
    rng: Rng,
    transcript: Transcript | None = None,
    table: SettingsTable | None = None,
) -> SecurityReport:
    """Alice's Bell test on M randomly chosen copies; the check copies are consumed."""
    n, m = len(copies), cfg.n_checks
    if not 1 <= m <= n - 1:
        raise InvalidParameterError(f"need 1 <= M <= N-1 check copies, got M={m}, N={n}")
    table = table or default_settings()
    alice = rng.split(ALICE)
    nature = rng.split("nature")

    chosen = np.sort(alice.choice(n, size=m, replace=False))
    copies.roles[:] = Role.KEY
    copies.roles[chosen] = Role.CHECK
    terms = schedule_terms(m, alice.split("settings"), cfg.schedule)

    outcomes = np.empty((m, 4), dtype=np.int8)
    for t, (combo, _) in enumerate(CHSH4_TERMS):
        in_term = np.flatnonzero(terms == t)
        for s, pos in copies.groups(chosen[in_term]):
            where = in_term[np.isin(chosen[in_term], pos)]
            outcomes[where] = sample_outcomes(copies.states[s], table.for_combo(combo), where.size, nature)
    products = outcomes.prod(axis=1)
    accs = [SampleAccumulator().extend(products[terms == t]) for t in range(len(CHSH4_TERMS))]
    result = result_from_accumulators(accs, CHSH4_TERMS)
    verdict = violation_threshold_check(result, cfg.verdict_k)
    copies.consumed[chosen] = True
    copies.verdict = verdict

    if transcript is not None:
        for j, i in enumerate(chosen):
            r = int(copies.record_numbers[i])
            combo = CHSH4_TERMS[terms[j]][0]
            transcript.add("security", ALICE, "announce", record=r, settings=combo)
            transcript.add("security", ALICE, "measure", record=r, qubits=(1, 2), outcomes=outcomes[j, :2])
            transcript.add("security", BOB, "measure", record=r, qubit=3, outcome=int(outcomes[j, 2]))
            transcript.add("security", CHARLIE, "measure", record=r, qubit=4, outcome=int(outcomes[j, 3]))
            transcript.add("security", BOB, "outcome", record=r, to=ALICE, value=int(outcomes[j, 2]))
            transcript.add("security", CHARLIE, "outcome", record=r, to=ALICE, value=int(outcomes[j, 3]))
        transcript.add(
            "security", ALICE, "verdict",
            value=result.value, std_error=result.std_error, samples=result.sample_count,
            k=float(cfg.verdict_k), verdict=verdict,
        )

    return SecurityReport(
        value=result.value,
        std_error=result.std_error,
        sample_count=result.sample_count,
        verdict=verdict,
        components=result.components,
        term_counts=result.term_counts,
        confidence_k=float(cfg.verdict_k),
    )


def _require_secure(copies: CopyRegister) -> None:
    if copies.verdict is not Verdict.SECURE:
        raise ProtocolAbortError(f"session verdict is {copies.verdict}, key phase is not allowed")


def _bell_measure_copies(copies: CopyRegister, pair: tuple[int, int], rng: Rng) -> np.ndarray:
    """Bell-measure ``pair`` on every key copy, updating the register in place."""
    keys = copies.key_indices()
    labels = np.full(keys.size, -1, dtype=np.int8)
    for s, pos in copies.groups(keys):
        branches = bell_branches(copies.states[s], pair)
        drawn = rng.categorical(np.array([p for _, p, _ in branches]), pos.size)
        post = []
        for label, _, rest in branches:
            if rest is None:
                post.append(-1)
            elif pair == (1, 2):
                post.append(copies.intern(tensor(bell_density(label), rest)))
            else:
                post.append(copies.intern(tensor(rest, bell_density(label))))
        copies.state_index[pos] = np.array(post)[drawn]
        labels[np.isin(keys, pos)] = drawn
    return labels


def phase3_transfer(copies: CopyRegister, rng: Rng, transcript: Transcript | None = None) -> KeyMaterial:
    """Alice Bell-measures qubits 1,2 of every key copy and encodes each label as two bits."""
    _require_secure(copies)
    keys = copies.key_indices()
    if keys.size == 0:
        warnings.warn("no key copies left after the security check; key is empty", stacklevel=2)
    labels = _bell_measure_copies(copies, (1, 2), rng)
    copies.alice_labels[keys] = labels
    if transcript is not None:
        for i, lab in zip(keys, labels):
            transcript.add("transfer", ALICE, "measure", record=int(copies.record_numbers[i]),
                           qubits=(1, 2), label=BellLabel(int(lab)).symbol)
        transcript.add("transfer", ALICE, "announce", finished=True, copies=int(keys.size))
    return KeyMaterial(labels)


def reconstruct(
    copies: CopyRegister,
    rng: Rng,
    parties: tuple[str, ...] = (BOB, CHARLIE),
    transcript: Transcript | None = None,
) -> KeyMaterial:
    """Bob and Charlie jointly Bell-measure qubits 3,4 of every key copy."""
    if set(parties) != {BOB, CHARLIE}:
        raise InsufficientSharesError(
            f"reconstruction needs both bob and charlie, got {sorted(set(parties))}"
        )
    _require_secure(copies)
    keys = copies.key_indices()
    labels = _bell_measure_copies(copies, (3, 4), rng)
    copies.bc_labels[keys] = labels
    if transcript is not None:
        for i, lab in zip(keys, labels):
            transcript.add("transfer", "bob+charlie", "measure", record=int(copies.record_numbers[i]),
                           qubits=(3, 4), label=BellLabel(int(lab)).symbol)
    return KeyMaterial(labels)


def single_share_guess(copies: CopyRegister, party: str, rng: Rng) -> KeyMaterial:
    """What one share holder decodes alone: a Bell measurement with the missing
    qubit replaced by a maximally mixed one. The register is left untouched."""
    if party not in (BOB, CHARLIE):
        raise InvalidParameterError(f"party must be bob or charlie, got {party!r}")
    qubit = 3 if party == BOB else 4
    keys = copies.key_indices()
    labels = np.full(keys.size, -1, dtype=np.int8)
    blank = maximally_mixed(1)
    for s, pos in copies.groups(keys):
        share = partial_trace(copies.states[s], [qubit])
        pair = tensor(share, blank) if party == BOB else tensor(blank, share)
        probs = np.array([p for _, p, _ in bell_branches(pair, (1, 2))])
        labels[np.isin(keys, pos)] = rng.categorical(probs, pos.size)
    return KeyMaterial(labels)


def pair_chsh_check(
    copies: CopyRegister,
    rng: Rng,
    table: SettingsTable | None = None,
    schedule: str = "random",
) -> BellFunctionalResult:
    """Two-qubit CHSH test on Alice's qubits 1,2, one round per unconsumed copy.

    Each copy is measured in its own state, so under the Bell-resend attack
    the statistics average over Eve's (unknown to Alice) outcomes.
    """
    live = np.flatnonzero(~copies.consumed)
    if live.size < 4:
        raise InvalidParameterError(f"need at least 4 unconsumed copies, got {live.size}")
    table = table or chsh2_optimal_settings()
    terms = schedule_terms(live.size, rng.split("settings"), schedule)
    nature = rng.split("nature")
    products = np.empty(live.size, dtype=np.int8)
    for t, (combo, _) in enumerate(CHSH2_TERMS):
        in_term = np.flatnonzero(terms == t)
        for s, pos in copies.groups(live[in_term]):
            where = in_term[np.isin(live[in_term], pos)]
            pair = partial_trace(copies.states[s], [1, 2])
            products[where] = sample_outcomes(pair, table.for_combo(combo), where.size, nature).prod(axis=1)
    accs = [SampleAccumulator().extend(products[terms == t]) for t in range(len(CHSH2_TERMS))]
    return result_from_accumulators(accs, CHSH2_TERMS)


# --------------------------------------------------------------------------
# full session


class SessionResult(NamedTuple):
    transcript: Transcript
    report: SecurityReport
    alice_key: KeyMaterial
    bc_key: KeyMaterial
    register: CopyRegister
    config: SessionConfig


def run_session(cfg: SessionConfig, record: bool = True) -> SessionResult:
    """Run all three phases from ``cfg.master_seed``.

    With ``record=False`` no per-copy events are logged, which matters for
    very large sessions; the returned transcript then only holds the header
    and summary events.
    """
    master = Rng(cfg.master_seed)
    transcript = Transcript()
    detail = transcript if record else None
    attack = cfg.attack
    transcript.add(
        "setup", SYSTEM, "session",
        seed=cfg.master_seed, copies=cfg.n_copies, checks=cfg.n_checks,
        attack=attack.kind if attack else "none",
        p=float(attack.p) if attack and attack.kind is AttackKind.CLONE_DEPOLARIZE else "-",
        attack_probability=float(attack.attack_probability) if attack else "-",
        k=float(cfg.verdict_k), schedule=cfg.schedule,
    )
    reg = phase1_distribute(cfg, master.split("phase1"), detail)
    report = phase2_security_check(reg, cfg, master.split("phase2"), detail)
    if not record:
        transcript.add("security", ALICE, "verdict", value=report.value, std_error=report.std_error,
                       samples=report.sample_count, k=report.confidence_k, verdict=report.verdict)

    if report.verdict is Verdict.SECURE:
        alice_key = phase3_transfer(reg, master.split("phase3"), detail)
        bc_key = reconstruct(reg, master.split("reconstruct"), transcript=detail)
        transcript.add("transfer", ALICE, "key-emit", bits=len(alice_key))
        transcript.add("transfer", "bob+charlie", "key-emit", bits=len(bc_key))
    else:
        alice_key = bc_key = KeyMaterial()
        transcript.add("transfer", ALICE, "abort", reason=report.verdict)
    return SessionResult(transcript, report, alice_key, bc_key, reg, cfg)
