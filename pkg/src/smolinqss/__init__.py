"""Simulator for three-party quantum secret sharing over four-qubit Smolin states."""

from .adversary import AttackKind, AttackSpec, attack_bell_resend, attack_clone, eve_key_knowledge
from .belltest import (
    BellFunctionalResult,
    SettingsTable,
    Verdict,
    chsh2_exact,
    chsh4_exact,
    chsh4_sampled,
    default_settings,
    violation_threshold_check,
)
from .errors import (
    ConfigError,
    DegenerateBranchError,
    InsufficientSharesError,
    InvalidParameterError,
    ProtocolAbortError,
)
from .measurement import MeasurementSetting, bell_measure, expectation, measure_qubit
from .protocol import (
    KeyMaterial,
    SessionConfig,
    Transcript,
    phase1_distribute,
    phase2_security_check,
    phase3_transfer,
    reconstruct,
    run_session,
)
from .qstate import (
    BellLabel,
    DensityMatrix,
    PureState,
    bell_state,
    depolarize,
    partial_trace,
    partial_transpose,
    smolin_state,
    tensor,
)
from .rng import Rng

__version__ = "0.1.0"
