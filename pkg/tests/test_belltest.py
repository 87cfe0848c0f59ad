import math

import numpy as np
import pytest

from conftest import pauli_string
from smolinqss.belltest import (
    BellFunctionalResult,
    Verdict,
    chsh2_exact,
    chsh2_optimal_settings,
    chsh2_sampled,
    chsh4_exact,
    chsh4_sampled,
    default_settings,
    violation_threshold_check,
)
from smolinqss.errors import InvalidParameterError
from smolinqss.measurement import MeasurementSetting
from smolinqss.qstate import BellLabel, bell_density, depolarize, maximally_mixed, partial_trace, smolin_state
from smolinqss.rng import Rng

TWO_SQRT2 = 2 * math.sqrt(2)


def direct_trace_chsh4(rho, table):
    """Oracle: build each Pauli-combination observable by hand and trace."""
    X, Y = pauli_string("X"), pauli_string("Y")

    def obs(q, i):
        return table.setting(q, i).observable()

    total = 0.0
    # Slots (a, b, c, d) of the inequality; d is qubit 1, a-c are qubits 2-4.
    for (a, b, c, d), sign in [((1, 1, 1, 1), 1), ((1, 1, 1, 2), 1), ((2, 2, 2, 1), 1), ((2, 2, 2, 2), -1)]:
        op = np.kron(np.kron(np.kron(obs(1, d), obs(2, a)), obs(3, b)), obs(4, c))
        total += sign * np.trace(rho.entries @ op).real
    return total


class TestDefaultSettings:
    def test_qubit2_setting1_is_x(self):
        assert default_settings().setting(2, 1).direction == (1.0, 0.0, 0.0)

    def test_qubit1_setting1_rotated(self):
        d = default_settings().setting(1, 1).direction
        assert d == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2), 0.0), abs=1e-15)

    def test_all_unit(self):
        t = default_settings()
        for q in range(1, 5):
            for i in (1, 2):
                assert abs(np.linalg.norm(t.setting(q, i).direction) - 1) < 1e-12


class TestChsh4Exact:
    def test_smolin_value(self, smolin):
        res = chsh4_exact(smolin, default_settings())
        assert abs(res.value - TWO_SQRT2) < 1e-10
        assert abs(direct_trace_chsh4(smolin, default_settings()) - TWO_SQRT2) < 1e-10
        s = 1 / math.sqrt(2)
        assert res.components == pytest.approx((s, s, s, -s), abs=1e-12)
        assert res.mode == "exact" and res.std_error == 0 and res.sample_count == 0

    def test_maximally_mixed(self):
        assert abs(chsh4_exact(maximally_mixed(4)).value) < 1e-12

    def test_half_noise(self, smolin):
        assert abs(chsh4_exact(depolarize(smolin, 0.5)).value - math.sqrt(2)) < 1e-10

    @pytest.mark.parametrize("p", [i / 10 for i in range(11)])
    def test_linear_in_p(self, smolin, p):
        assert abs(chsh4_exact(depolarize(smolin, p)).value - TWO_SQRT2 * p) < 1e-10

    def test_wrong_qubit_count(self):
        with pytest.raises(InvalidParameterError):
            chsh4_exact(maximally_mixed(3))

    @staticmethod
    def _rotate(v, axis, angle):
        v, k = np.asarray(v), np.asarray(axis, dtype=float)
        return v * math.cos(angle) + np.cross(k, v) * math.sin(angle) + k * np.dot(k, v) * (1 - math.cos(angle))

    def test_default_settings_locally_optimal(self, smolin):
        base = chsh4_exact(smolin).value
        t = default_settings()
        checked = 0
        for q in range(1, 5):
            for i in (1, 2):
                v = np.array(t.setting(q, i).direction)
                for axis in np.eye(3):
                    if abs(abs(np.dot(axis, v)) - 1) < 1e-9:
                        continue  # rotation about the vector itself is a no-op
                    for angle in (0.1, -0.1):
                        w = self._rotate(v, axis, angle)
                        perturbed = t.replace(q, i, MeasurementSetting.normalized(*w))
                        assert chsh4_exact(smolin, perturbed).value < base - 1e-6
                        checked += 1
        assert checked >= 32


class TestChsh4Sampled:
    def test_smolin_converges(self, smolin):
        res = chsh4_sampled(smolin, default_settings(), 10**5, Rng(11))
        assert res.mode == "sampled" and res.sample_count == 10**5
        assert abs(res.value - TWO_SQRT2) <= 3 * res.std_error
        assert res.std_error <= 0.03

    def test_mixed_converges(self):
        res = chsh4_sampled(maximally_mixed(4), None, 10**5, Rng(12))
        assert abs(res.value) <= 3 * res.std_error
        assert res.std_error <= 0.03

    def test_stderr_bound_oracle(self, smolin):
        # Each term variance <= 1 / (rounds/4) => total <= sqrt(4 * 4/rounds).
        rounds = 10**5
        res = chsh4_sampled(smolin, None, rounds, Rng(13), schedule="round-robin")
        assert res.std_error <= math.sqrt(16 / rounds) + 1e-12
        assert res.term_counts == (rounds // 4,) * 4

    def test_too_few_rounds(self, smolin):
        with pytest.raises(InvalidParameterError):
            chsh4_sampled(smolin, None, 3, Rng(0))

    def test_replay(self, smolin):
        a = chsh4_sampled(smolin, None, 5000, Rng(99))
        b = chsh4_sampled(smolin, None, 5000, Rng(99))
        assert a == b

    def test_convergence_over_seeds(self, smolin):
        results = [chsh4_sampled(smolin, None, 10**5, Rng(seed)) for seed in range(100)]
        hits = sum(abs(r.value - TWO_SQRT2) <= 4 * r.std_error for r in results)
        assert hits >= 99

    def test_empty_term_is_inconclusive(self, smolin):
        # Find a seed whose 4 random rounds miss at least one term.
        for seed in range(100):
            res = chsh4_sampled(smolin, None, 4, Rng(seed))
            if min(res.term_counts) == 0:
                break
        assert res.inconclusive
        assert violation_threshold_check(res) is Verdict.INCONCLUSIVE


class TestChsh2:
    def test_phi_plus_optimal(self):
        phi = bell_density(BellLabel.PHI_PLUS)
        assert abs(chsh2_exact(phi, chsh2_optimal_settings()) - TWO_SQRT2) < 1e-10
        # direct trace oracle
        Z, X = pauli_string("Z"), pauli_string("X")
        b1, b2 = (Z + X) / math.sqrt(2), (Z - X) / math.sqrt(2)
        terms = [np.kron(Z, b1), np.kron(Z, b2), np.kron(X, b1), -np.kron(X, b2)]
        assert abs(sum(np.trace(phi.entries @ t).real for t in terms) - TWO_SQRT2) < 1e-10

    def test_mixed_zero(self):
        assert abs(chsh2_exact(maximally_mixed(2))) < 1e-15

    def test_smolin_pair_zero(self, smolin):
        assert abs(chsh2_exact(partial_trace(smolin, [1, 2]))) < 1e-12

    def test_wrong_qubits(self, smolin):
        with pytest.raises(InvalidParameterError):
            chsh2_exact(smolin)

    def test_sampled(self):
        res = chsh2_sampled(bell_density(BellLabel.PHI_PLUS), None, 40_000, Rng(5))
        assert abs(res.value - TWO_SQRT2) <= 4 * res.std_error


class TestVerdict:
    def test_exact_max_is_secure(self, smolin):
        assert violation_threshold_check(chsh4_exact(smolin)) is Verdict.SECURE

    def test_two_thirds_is_insecure(self, smolin):
        res = chsh4_exact(depolarize(smolin, 2 / 3))
        assert res.value == pytest.approx(4 * math.sqrt(2) / 3, abs=1e-10)
        assert violation_threshold_check(res) is Verdict.INSECURE

    def test_arithmetic_of_rule(self):
        res = BellFunctionalResult(2.8, (0.7, 0.7, 0.7, -0.7), "sampled", 100, 0.5, (25,) * 4)
        assert violation_threshold_check(res, 3) is Verdict.INSECURE
        assert violation_threshold_check(res, 1) is Verdict.SECURE

    def test_boundary(self, smolin):
        b = 1 / math.sqrt(2)
        for p in np.linspace(0, 1, 201):
            expected = Verdict.SECURE if p > b + 1e-9 else Verdict.INSECURE
            assert violation_threshold_check(chsh4_exact(depolarize(smolin, float(p)))) is expected
        assert violation_threshold_check(chsh4_exact(depolarize(smolin, b))) is Verdict.INSECURE
        assert violation_threshold_check(chsh4_exact(depolarize(smolin, b + 1e-9))) is Verdict.SECURE

    def test_result_consistency_enforced(self):
        with pytest.raises(InvalidParameterError):
            BellFunctionalResult(3.0, (1, 1, 1, 1))
