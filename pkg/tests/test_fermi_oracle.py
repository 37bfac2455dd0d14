import numpy as np
import pytest

from blissdf import Hamiltonian, eigen_rank1, reconstruct_two_body
from blissdf.fermi_oracle import (
    MAX_ORBITALS,
    DenseOperator,
    b_operator,
    build_hamiltonian_dense,
    ladder_operator,
    number_operator,
    one_body_operator,
    orbital_excitation,
    sector_eigenvalues,
    verify_one_body_identity,
)
from blissdf.hamiltonian import symmetrize_one_body

from conftest import random_hamiltonian


def spin_orbitals(n):
    return [(j, sigma) for sigma in (0, 1) for j in range(n)]


class TestLadderAlgebra:
    def test_canonical_anticommutation_exact(self):
        # Matrix entries are products of 0 and +-1, so the relations hold
        # exactly, not just to rounding.
        n = 2
        dim = 4**n
        eye = np.eye(dim)
        for p in spin_orbitals(n):
            a_p = ladder_operator(*p, dagger=False, n=n).matrix
            for q in spin_orbitals(n):
                a_q = ladder_operator(*q, dagger=False, n=n).matrix
                c_q = ladder_operator(*q, dagger=True, n=n).matrix
                anti = a_p @ a_q + a_q @ a_p
                assert np.array_equal(anti, np.zeros((dim, dim)))
                mixed = a_p @ c_q + c_q @ a_p
                expected = eye if p == q else np.zeros((dim, dim))
                assert np.array_equal(mixed, expected)

    def test_nilpotency(self):
        a = ladder_operator(1, 1, dagger=False, n=2).matrix
        assert np.array_equal(a @ a, np.zeros_like(a))

    def test_dagger_is_adjoint(self):
        a = ladder_operator(0, 1, dagger=False, n=2).matrix
        c = ladder_operator(0, 1, dagger=True, n=2).matrix
        assert np.array_equal(c, a.conj().T)

    def test_index_validation(self):
        with pytest.raises(ValueError, match="orbital index"):
            ladder_operator(2, 0, dagger=False, n=2)
        with pytest.raises(ValueError, match="orbital index"):
            ladder_operator(-1, 0, dagger=False, n=2)
        with pytest.raises(ValueError, match="spin"):
            ladder_operator(0, 2, dagger=False, n=2)
        with pytest.raises(ValueError, match="orbital count"):
            ladder_operator(0, 0, dagger=False, n=MAX_ORBITALS + 1)
        with pytest.raises(ValueError, match="orbital count"):
            number_operator(0)

    def test_dense_operator_shape_validation(self):
        with pytest.raises(ValueError, match="shape"):
            DenseOperator(n_qubits=2, matrix=np.zeros((3, 3)))


class TestExcitations:
    def test_adjoint_symmetry(self):
        e01 = orbital_excitation(0, 1, 2).matrix
        e10 = orbital_excitation(1, 0, 2).matrix
        assert np.array_equal(e01.conj().T, e10)

    def test_number_operator_is_sum_of_diagonal_excitations(self):
        n = 2
        total = sum(orbital_excitation(i, i, n).matrix for i in range(n))
        assert np.array_equal(total, number_operator(n).matrix)

    def test_one_body_matches_excitation_sum(self):
        rng = np.random.default_rng(40)
        a = symmetrize_one_body(rng.standard_normal((2, 2)))
        direct = sum(
            a[i, j] * orbital_excitation(i, j, 2).matrix
            for i in range(2)
            for j in range(2)
        )
        assert np.max(np.abs(one_body_operator(a).matrix - direct)) < 1e-14


class TestSpectra:
    def test_single_orbital_one_body_spectrum(self):
        eps = 0.37
        ham = Hamiltonian(h=np.array([[eps]]), g=np.zeros((1, 1, 1, 1)))
        eigs = np.linalg.eigvalsh(build_hamiltonian_dense(ham).matrix)
        assert np.allclose(eigs, sorted([0.0, eps, eps, 2 * eps]), atol=1e-12)

    def test_single_orbital_two_body_spectrum(self):
        # H = gamma * E_00 E_00 acts as gamma * (n_up + n_down)^2, giving
        # eigenvalues {0, gamma, gamma, 4 gamma} on the four Fock states.
        gamma = 0.21
        g = np.full((1, 1, 1, 1), gamma)
        ham = Hamiltonian(h=np.zeros((1, 1)), g=g)
        dense = build_hamiltonian_dense(ham).matrix

        e00 = orbital_excitation(0, 0, 1).matrix
        assert np.max(np.abs(dense - gamma * (e00 @ e00))) < 1e-14

        eigs = np.linalg.eigvalsh(dense)
        assert np.allclose(eigs, sorted([0.0, gamma, gamma, 4 * gamma]), atol=1e-12)

    def test_dense_matches_operator_level_construction(self):
        # For g built from factor matrices the two-body term must equal
        # sum_r One(A_r)^2; this exercises the full tensor contraction path
        # against an independent operator-product construction.
        rng = np.random.default_rng(41)
        n = 2
        factors = rng.standard_normal((2, n, n))
        factors = 0.5 * (factors + factors.transpose(0, 2, 1))
        h = symmetrize_one_body(rng.standard_normal((n, n)))
        core = 0.6
        ham = Hamiltonian(
            h=h, g=reconstruct_two_body(factors), core_constant=core
        )

        dense = build_hamiltonian_dense(ham).matrix
        reference = core * np.eye(4**n, dtype=complex)
        reference += one_body_operator(h).matrix
        for a in factors:
            op = one_body_operator(a).matrix
            reference += op @ op
        assert np.max(np.abs(dense - reference)) < 1e-9


class TestBOperator:
    def test_basis_vector_reduces_to_ladder(self):
        u = np.array([1.0, 0.0, 0.0])
        b = b_operator(u, 1, 3).matrix
        a = ladder_operator(0, 1, dagger=False, n=3).matrix
        assert np.array_equal(b, a)

    def test_identities_random_rotation(self):
        rng = np.random.default_rng(42)
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        b = b_operator(u, 0, 3).matrix
        dim = b.shape[0]

        assert np.max(np.abs(b @ b)) < 1e-12
        anti = b @ b.conj().T + b.conj().T @ b
        assert np.max(np.abs(anti - np.eye(dim))) < 1e-12

        v = 2.0 * (b.conj().T @ b) - np.eye(dim)
        assert np.max(np.abs(v @ v.conj().T - np.eye(dim))) < 1e-10

    def test_rejects_non_unit_vector(self):
        with pytest.raises(ValueError, match="unit norm"):
            b_operator(np.array([1.0, 1.0]), 0, 2)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            b_operator(np.array([1.0, 0.0]), 0, 3)


class TestOneBodyIdentity:
    def test_identity_matrix_gives_number_operator(self):
        lhs = one_body_operator(np.eye(2)).matrix
        assert np.array_equal(lhs, number_operator(2).matrix)
        assert verify_one_body_identity(np.eye(2)) <= 1e-12

    def test_diagonal(self):
        assert verify_one_body_identity(np.diag([0.5, -1.5])) <= 1e-12

    def test_random_dense(self):
        rng = np.random.default_rng(43)
        a = symmetrize_one_body(rng.standard_normal((3, 3)))
        assert verify_one_body_identity(a) <= 1e-9

    def test_rotated_form_built_explicitly(self):
        rng = np.random.default_rng(44)
        a = symmetrize_one_body(rng.standard_normal((2, 2)))
        decomp = eigen_rank1(a)
        rhs = np.zeros((16, 16), dtype=complex)
        for lam, vec in zip(decomp.eigenvalues, decomp.vectors):
            for sigma in (0, 1):
                b = b_operator(vec, sigma, 2).matrix
                rhs += lam * (b.conj().T @ b)
        assert np.max(np.abs(one_body_operator(a).matrix - rhs)) < 1e-12


class TestSectorEigenvalues:
    def test_number_operator_sectors(self):
        op = number_operator(2)
        for n_e in range(5):
            eigs = sector_eigenvalues(op, n_e)
            assert np.allclose(eigs, n_e, atol=1e-14)

    def test_number_shifted_hamiltonian(self):
        # Adding 5 (N_e - n_e) leaves the n_e sector untouched while moving
        # every other sector.
        rng = np.random.default_rng(45)
        ham = random_hamiltonian(2, rng, n_electrons=2)
        dense = build_hamiltonian_dense(ham)

        shifted_mat = dense.matrix + 5.0 * (
            number_operator(2).matrix - 2.0 * np.eye(16)
        )
        shifted = DenseOperator(n_qubits=4, matrix=shifted_mat)

        same = sector_eigenvalues(dense, 2)
        assert np.max(np.abs(same - sector_eigenvalues(shifted, 2))) < 1e-10
        full_ref = np.linalg.eigvalsh(dense.matrix)
        full_shift = np.linalg.eigvalsh(shifted.matrix)
        assert np.max(np.abs(full_ref - full_shift)) > 1.0

    def test_sector_sizes_partition_fock_space(self):
        op = number_operator(2)
        sizes = [len(sector_eigenvalues(op, n_e)) for n_e in range(5)]
        assert sizes == [1, 4, 6, 4, 1]

    def test_range_validation(self):
        op = number_operator(1)
        with pytest.raises(ValueError, match="n_e"):
            sector_eigenvalues(op, 3)
        with pytest.raises(ValueError, match="n_e"):
            sector_eigenvalues(op, -1)

    def test_rejects_non_hermitian(self):
        mat = np.zeros((4, 4), dtype=complex)
        mat[0, 1] = 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            sector_eigenvalues(DenseOperator(n_qubits=2, matrix=mat), 1)
