"""Exact-algebra property suite run by ``smolinqss verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .adversary import averaged_bell_resend, bell_resend_branches
from .belltest import Verdict, chsh2_exact, chsh2_optimal_settings, chsh4_exact, violation_threshold_check
from .measurement import bell_branches
from .qstate import ATOL, PSD_SLACK, depolarize, maximally_mixed, min_pt_eigenvalue, partial_trace, permute_qubits, smolin_state

TWO_SQRT2 = 2.0 * math.sqrt(2.0)
NPT_MARGIN = -1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _eigenstructure() -> CheckResult:
    ev = np.sort(smolin_state().eigenvalues())
    expected = np.array([0.0] * 12 + [0.25] * 4)
    err = float(np.max(np.abs(ev - expected)))
    return CheckResult("smolin-eigenvalues", err <= ATOL, f"max deviation from {{1/4 x4, 0 x12}} = {err:.2e}")


def _purity() -> CheckResult:
    p = smolin_state().purity()
    return CheckResult("smolin-purity", abs(p - 0.25) <= ATOL, f"Tr(rho^2) = {p:.12f}")


def _symmetry() -> CheckResult:
    rho = smolin_state()
    worst = 0.0
    for perm in itertools.permutations(range(1, 5)):
        worst = max(worst, float(np.max(np.abs(permute_qubits(rho, perm).entries - rho.entries))))
    return CheckResult("smolin-permutation-symmetry", worst <= ATOL, f"max entry change over 24 permutations = {worst:.2e}")


def _ppt_cuts() -> CheckResult:
    rho = smolin_state()
    cuts = {"12|34": [3, 4], "13|24": [2, 4], "14|23": [2, 3]}
    vals = {c: min_pt_eigenvalue(rho, s) for c, s in cuts.items()}
    ok = all(v >= -PSD_SLACK for v in vals.values())
    return CheckResult("smolin-ppt-2|2-cuts", ok, ", ".join(f"{c}: {v:+.3e}" for c, v in vals.items()))


def _npt_cuts() -> CheckResult:
    rho = smolin_state()
    vals = {q: min_pt_eigenvalue(rho, [q]) for q in range(1, 5)}
    ok = all(v < NPT_MARGIN for v in vals.values())
    return CheckResult("smolin-npt-1|3-cuts", ok, ", ".join(f"{q}|rest: {v:+.4f}" for q, v in vals.items()))


def _max_violation() -> CheckResult:
    v = chsh4_exact(smolin_state()).value
    return CheckResult("four-qubit-bell-value-2sqrt2", abs(v - TWO_SQRT2) <= ATOL, f"value = {v:.12f}")


def _noise_grid() -> CheckResult:
    rho = smolin_state()
    grid = [i / 10 for i in range(11)] + [0.25, 2 / 3, 1 / math.sqrt(2)]
    err = max(abs(chsh4_exact(depolarize(rho, p)).value - TWO_SQRT2 * p) for p in grid)
    return CheckResult("noisy-bell-value-linear-in-p", err <= ATOL, f"max |value - 2sqrt2 p| = {err:.2e} over {len(grid)} points")


def _boundary() -> CheckResult:
    rho = smolin_state()
    b = 1 / math.sqrt(2)
    verdicts = {
        p: violation_threshold_check(chsh4_exact(depolarize(rho, p)))
        for p in (2 / 3, b, b + 1e-6, 1.0)
    }
    ok = (
        verdicts[2 / 3] is Verdict.INSECURE
        and verdicts[b] is Verdict.INSECURE
        and verdicts[b + 1e-6] is Verdict.SECURE
        and verdicts[1.0] is Verdict.SECURE
    )
    return CheckResult("verdict-boundary-at-1/sqrt2", ok, ", ".join(f"p={p:.6f}: {v.value}" for p, v in verdicts.items()))


def _bell_agreement() -> CheckResult:
    worst = 0.0
    for label, p, rest in bell_branches(smolin_state(), (1, 2)):
        probs = [q for _, q, _ in bell_branches(rest, (1, 2))]
        worst = max(worst, abs(p - 0.25), 1.0 - probs[int(label)])
    return CheckResult("bell-outcome-agreement-12-vs-34", worst <= ATOL, f"max deviation = {worst:.2e}")


def _resend_invisible() -> CheckResult:
    avg = averaged_bell_resend(smolin_state())
    diff = float(np.max(np.abs(avg.entries - smolin_state().entries)))
    v = chsh4_exact(avg).value
    ok = diff <= ATOL and abs(v - TWO_SQRT2) <= ATOL
    return CheckResult("bell-resend-invisible-to-four-qubit-test", ok, f"state deviation {diff:.2e}, value {v:.12f}")


def _pair_chsh_report() -> CheckResult:
    """The two-qubit CHSH test on Alice's pair, with and without Bell-resend.

    Passes when both values are 0: averaged over Eve's outcomes the pair is
    I/4 either way, so this test cannot detect the attack.
    """
    table = chsh2_optimal_settings()
    clean = chsh2_exact(partial_trace(smolin_state(), [1, 2]), table)
    attacked = chsh2_exact(partial_trace(averaged_bell_resend(smolin_state()), [1, 2]), table)
    per_outcome = [chsh2_exact(partial_trace(s, [1, 2]), table) for _, _, s in bell_resend_branches(smolin_state())]
    ok = abs(clean) <= ATOL and abs(attacked) <= ATOL
    detail = (
        f"CHSH(1,2) without attack = {clean:+.3e}, with attack = {attacked:+.3e}; "
        f"pair test does NOT detect bell-resend (per-outcome values {', '.join(f'{v:+.3f}' for v in per_outcome)} "
        f"are visible only to someone who knows Eve's label)"
    )
    return CheckResult("pair-chsh-blind-to-bell-resend", ok, detail)


def _mixed_zero() -> CheckResult:
    v = chsh4_exact(maximally_mixed(4)).value
    return CheckResult("maximally-mixed-bell-value-zero", abs(v) <= ATOL, f"value = {v:+.2e}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    _eigenstructure,
    _purity,
    _symmetry,
    _ppt_cuts,
    _npt_cuts,
    _max_violation,
    _noise_grid,
    _boundary,
    _bell_agreement,
    _mixed_zero,
    _resend_invisible,
    _pair_chsh_report,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]
