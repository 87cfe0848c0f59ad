import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_partial_trace, brute_partial_transpose, pauli_string, random_density, seeds
from smolinqss.errors import InvalidParameterError
from smolinqss.qstate import (
    BellLabel,
    DensityMatrix,
    PureState,
    bell_density,
    bell_state,
    depolarize,
    maximally_mixed,
    min_pt_eigenvalue,
    partial_trace,
    partial_transpose,
    permute_qubits,
    smolin_state,
    tensor,
)

S = 1 / math.sqrt(2)


class TestBellLabel:
    def test_bit_map(self):
        assert [b.bits for b in BellLabel] == ["00", "01", "10", "11"]
        assert BellLabel.PHI_MINUS.bits == "01"

    def test_bijection(self):
        assert {BellLabel.from_bits(b.bits) for b in BellLabel} == set(BellLabel)
        assert len({b.bits for b in BellLabel}) == 4

    @pytest.mark.parametrize("bad", ["0", "012", "2x", ""])
    def test_bad_bits(self, bad):
        with pytest.raises(InvalidParameterError):
            BellLabel.from_bits(bad)


class TestBellStates:
    def test_phi_plus_amplitudes(self):
        np.testing.assert_allclose(bell_state(BellLabel.PHI_PLUS).amplitudes, [S, 0, 0, S], atol=1e-15)

    @pytest.mark.parametrize(
        "label, amps",
        [
            (BellLabel.PHI_MINUS, [S, 0, 0, -S]),
            (BellLabel.PSI_PLUS, [0, S, S, 0]),
            (BellLabel.PSI_MINUS, [0, S, -S, 0]),
        ],
    )
    def test_other_amplitudes(self, label, amps):
        np.testing.assert_allclose(bell_state(label).amplitudes, amps, atol=1e-15)

    def test_psi_plus_psi_minus_orthogonal(self):
        assert abs(bell_state(BellLabel.PSI_PLUS).inner(bell_state(BellLabel.PSI_MINUS))) < 1e-15

    def test_orthonormal(self):
        gram = np.array([[bell_state(a).inner(bell_state(b)) for b in BellLabel] for a in BellLabel])
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)

    def test_pure_state_validation(self):
        with pytest.raises(InvalidParameterError):
            PureState(np.array([1, 1, 0, 0]))
        with pytest.raises(InvalidParameterError):
            PureState(np.array([1, 0, 0]))


class TestDensityMatrixValidation:
    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_rejects_too_many_qubits(self):
        with pytest.raises(InvalidParameterError):
            DensityMatrix(np.eye(32) / 32)

    def test_entries_are_frozen(self):
        rho = maximally_mixed(1)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 1.0


class TestSmolin:
    def test_trace(self, smolin):
        assert abs(np.trace(smolin.entries) - 1) < 1e-12

    def test_matches_pauli_decomposition(self, smolin):
        # Independent construction: (IIII + XXXX + YYYY + ZZZZ) / 16.
        ref = sum(pauli_string(w) for w in ("IIII", "XXXX", "YYYY", "ZZZZ")) / 16
        np.testing.assert_allclose(smolin.entries, ref, atol=1e-12)

    def test_eigenvalues(self, smolin):
        ev = np.sort(np.linalg.eigvalsh(smolin.entries))
        np.testing.assert_allclose(ev, [0.0] * 12 + [0.25] * 4, atol=1e-10)

    def test_purity(self, smolin):
        m = smolin.entries
        assert abs(np.sum(m * m.T).real - 0.25) < 1e-10
        assert abs(smolin.purity() - 0.25) < 1e-10

    @pytest.mark.parametrize("perm", list(itertools.permutations(range(1, 5))))
    def test_permutation_symmetry(self, smolin, perm):
        assert smolin.allclose(permute_qubits(smolin, perm), atol=1e-10)

    @pytest.mark.parametrize("cut", [[3, 4], [2, 4], [2, 3]])
    def test_ppt_across_two_two_cuts(self, smolin, cut):
        pt = brute_partial_transpose(smolin.entries, 4, cut)
        assert np.linalg.eigvalsh(pt)[0] >= -1e-9

    @pytest.mark.parametrize("q", [1, 2, 3, 4])
    def test_npt_across_one_three_cuts(self, smolin, q):
        pt = brute_partial_transpose(smolin.entries, 4, [q])
        assert np.linalg.eigvalsh(pt)[0] < -1e-3


class TestDepolarize:
    def test_identity_case(self, smolin):
        assert depolarize(smolin, 1.0).allclose(smolin)

    def test_full_noise(self, smolin):
        np.testing.assert_allclose(depolarize(smolin, 0.0).entries, np.eye(16) / 16, atol=1e-15)

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_out_of_range(self, smolin, p):
        with pytest.raises(InvalidParameterError):
            depolarize(smolin, p)

    def test_formula(self, smolin):
        p = 0.37
        expected = (1 - p) / 16 * np.eye(16) + p * smolin.entries
        np.testing.assert_allclose(depolarize(smolin, p).entries, expected, atol=1e-15)

    @given(seed=seeds, p=st.floats(0.0, 1.0), n=st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_result_is_valid_state(self, seed, p, n):
        rho = random_density(n, seed)
        out = depolarize(rho, p)  # construction re-validates every invariant
        assert abs(np.trace(out.entries) - 1) < 1e-10
        assert out.eigenvalues()[0] >= -1e-9


class TestTensor:
    def test_mixed_qubits(self):
        np.testing.assert_allclose(tensor(maximally_mixed(1), maximally_mixed(1)).entries, np.eye(4) / 4)

    def test_bell_pair_product_trace(self):
        phi = bell_density(BellLabel.PHI_PLUS)
        t = tensor(phi, phi)
        assert t.n_qubits == 4
        assert abs(np.trace(t.entries) - 1) < 1e-12

    def test_ordering_convention(self):
        zero = DensityMatrix(np.diag([1.0, 0.0]))
        one = DensityMatrix(np.diag([0.0, 1.0]))
        # |0>|1> -> index 0b01 = 1 with qubit 1 most significant
        assert tensor(zero, one).entries[1, 1] == 1.0

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_purity_multiplies(self, seed):
        a = random_density(1, seed)
        b = random_density(2, seed + 100)
        ab = tensor(a, b).entries
        direct = np.trace(ab @ ab).real
        pa = np.trace(a.entries @ a.entries).real
        pb = np.trace(b.entries @ b.entries).real
        assert abs(direct - pa * pb) < 1e-12

    def test_too_large(self):
        with pytest.raises(InvalidParameterError):
            tensor(maximally_mixed(3), maximally_mixed(2))


class TestPartialTrace:
    def test_smolin_pair_is_mixed(self, smolin):
        oracle = brute_partial_trace(smolin.entries, 4, [1, 2])
        np.testing.assert_allclose(oracle, np.eye(4) / 4, atol=1e-12)
        assert partial_trace(smolin, {1, 2}).allclose(oracle)

    def test_bell_single_qubit(self):
        phi = bell_density(BellLabel.PHI_PLUS)
        oracle = brute_partial_trace(phi.entries, 2, [1])
        np.testing.assert_allclose(oracle, np.eye(2) / 2, atol=1e-12)
        assert partial_trace(phi, [1]).allclose(oracle)

    def test_keep_all(self, smolin):
        assert partial_trace(smolin, [1, 2, 3, 4]).allclose(smolin)

    @pytest.mark.parametrize("keep", [[1], [2], [4], [1, 3], [2, 4], [1, 2, 4], [3]])
    def test_against_brute_force(self, keep):
        rho = random_density(4, 11)
        assert partial_trace(rho, keep).allclose(brute_partial_trace(rho.entries, 4, keep))

    @pytest.mark.parametrize("keep", [[], [0], [5], [1, 1]])
    def test_bad_keep(self, smolin, keep):
        with pytest.raises(InvalidParameterError):
            partial_trace(smolin, keep)

    @given(sa=seeds, sb=seeds, na=st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_trace_inverts_tensor(self, sa, sb, na):
        a = random_density(na, sa)
        b = random_density(4 - na, sb)
        assert partial_trace(tensor(a, b), range(1, na + 1)).allclose(a, atol=1e-10)
        assert partial_trace(tensor(a, b), range(na + 1, 5)).allclose(b, atol=1e-10)


class TestPartialTranspose:
    def test_identity_invariant(self):
        np.testing.assert_allclose(partial_transpose(maximally_mixed(4), {3, 4}), np.eye(16) / 16)

    def test_smolin_ppt_12_34(self, smolin):
        assert min_pt_eigenvalue(smolin, {3, 4}) >= -1e-9

    def test_bell_npt(self):
        phi = bell_density(BellLabel.PHI_PLUS)
        oracle = np.linalg.eigvalsh(brute_partial_transpose(phi.entries, 2, [2]))[0]
        assert abs(oracle + 0.5) < 1e-12
        assert abs(min_pt_eigenvalue(phi, {2}) + 0.5) < 1e-12

    @pytest.mark.parametrize("sub", [[1], [2, 3], [1, 4], [1, 2, 3, 4]])
    def test_against_brute_force(self, sub):
        rho = random_density(4, 5)
        np.testing.assert_allclose(partial_transpose(rho, sub), brute_partial_transpose(rho.entries, 4, sub), atol=1e-14)

    def test_hermitian_and_trace_preserved(self):
        rho = random_density(3, 9)
        pt = partial_transpose(rho, [2])
        np.testing.assert_allclose(pt, pt.conj().T, atol=1e-12)
        assert abs(np.trace(pt) - 1) < 1e-12

    def test_out_of_range(self, smolin):
        with pytest.raises(InvalidParameterError):
            partial_transpose(smolin, [5])
