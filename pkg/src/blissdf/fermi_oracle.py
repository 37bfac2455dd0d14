"""Dense many-body operators for verifying fermionic algebra at tiny sizes.

Spin-orbitals map to qubits via the Jordan-Wigner transformation,

    a_js = Z_0 ... Z_(q-1) * (X_q + i Y_q) / 2,    q = j + N * sigma,

so orbital j with spin sigma lives on qubit q, spin-down (sigma = 0) block
first. Basis-state labeling is little-endian: qubit q is bit q of the basis
index, with qubit 0 the least significant bit. The occupation number of
spin-orbital q in basis state |b> is therefore bit q of b, and the particle
number of |b> is the Hamming weight of b.

Everything here is a dense complex matrix of dimension 4^N, so the orbital
count is hard-capped at N <= 6 (4096-dimensional operators). The point is
brute-force verification of operator identities that the factorization and
shift machinery relies on, not scalable simulation. Matrices stay complex
throughout; realness of physical Hamiltonians is something tests check, not
an assumption baked in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from blissdf.factorization import eigen_rank1
from blissdf.hamiltonian import Hamiltonian

MAX_ORBITALS = 6

_ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_IDENTITY2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class DenseOperator:
    """A dense operator on the full 2N-spin-orbital Fock space.

    Attributes:
        n_qubits: 2N, one qubit per spin-orbital.
        matrix: Complex array of shape (2**n_qubits, 2**n_qubits).
    """

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = 2**self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{self.n_qubits} qubits"
            )


def _check_orbital_count(n: int):
    if not 1 <= n <= MAX_ORBITALS:
        raise ValueError(f"orbital count N={n} outside [1, {MAX_ORBITALS}]")


def _qubit_operator(single: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Single qubit operator with a Z string on all lower qubits.

    Builds Z_0 ... Z_(qubit-1) single_qubit I ... I in little-endian order
    (qubit 0 is the least significant bit of the basis index).
    """
    out = np.eye(1, dtype=complex)
    for q in range(n_qubits):
        if q < qubit:
            factor = _PAULI_Z
        elif q == qubit:
            factor = single
        else:
            factor = _IDENTITY2
        out = np.kron(factor, out)
    return out


def ladder_operator(j: int, sigma: int, dagger: bool, n: int) -> DenseOperator:
    """Dense annihilation (or creation) operator for spin-orbital (j, sigma).

    Args:
        j: Orbital index, 0 <= j < n.
        sigma: Spin, 0 or 1; the spin-sigma block starts at qubit n * sigma.
        dagger: If True, return the creation operator.
        n: Total orbital count, n <= 6.

    Returns:
        DenseOperator of dimension 4^n.

    Raises:
        ValueError: Index or orbital count out of range.
    """
    _check_orbital_count(n)
    if not 0 <= j < n:
        raise ValueError(f"orbital index {j} outside [0, {n})")
    if sigma not in (0, 1):
        raise ValueError(f"spin must be 0 or 1, got {sigma}")
    qubit = j + n * sigma
    mat = _qubit_operator(_ANNIHILATE, qubit, 2 * n)
    if dagger:
        mat = mat.conj().T
    return DenseOperator(n_qubits=2 * n, matrix=mat)


def orbital_excitation(i: int, j: int, n: int) -> DenseOperator:
    """Spin-summed excitation E_ij = sum_sigma a+_is a_js."""
    _check_orbital_count(n)
    mat = np.zeros((4**n, 4**n), dtype=complex)
    for sigma in (0, 1):
        create = ladder_operator(i, sigma, True, n).matrix
        annihilate = ladder_operator(j, sigma, False, n).matrix
        mat += create @ annihilate
    return DenseOperator(n_qubits=2 * n, matrix=mat)


def number_operator(n: int) -> DenseOperator:
    """Total electron number N_e = sum_i E_ii."""
    _check_orbital_count(n)
    dim = 4**n
    diag = np.array([bin(b).count("1") for b in range(dim)], dtype=float)
    return DenseOperator(n_qubits=2 * n, matrix=np.diag(diag).astype(complex))


def one_body_operator(a: np.ndarray) -> DenseOperator:
    """Dense One(A) = sum_ij A_ij E_ij for an N x N coefficient matrix."""
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"coefficient matrix must be square, got {a.shape}")
    _check_orbital_count(n)
    mat = np.zeros((4**n, 4**n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0.0:
                mat += a[i, j] * orbital_excitation(i, j, n).matrix
    return DenseOperator(n_qubits=2 * n, matrix=mat)


def build_hamiltonian_dense(ham: Hamiltonian) -> DenseOperator:
    """Dense matrix of c + sum_ij h_ij E_ij + sum_ijkl g_ijkl E_ij E_kl.

    Builds all N^2 excitation matrices once, then contracts the two-body
    tensor as sum_ij E_ij (sum_kl g_ijkl E_kl) with N^2 dense products.
    """
    n = ham.n_orbitals
    _check_orbital_count(n)
    dim = 4**n
    excitations = np.empty((n, n, dim, dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            excitations[i, j] = orbital_excitation(i, j, n).matrix

    mat = ham.core_constant * np.eye(dim, dtype=complex)
    mat += np.tensordot(ham.h.astype(complex), excitations, axes=2)
    for i in range(n):
        for j in range(n):
            inner = np.tensordot(ham.g[i, j].astype(complex), excitations, axes=2)
            mat += excitations[i, j] @ inner
    return DenseOperator(n_qubits=2 * n, matrix=mat)


def b_operator(u: np.ndarray, sigma: int, n: int) -> DenseOperator:
    """Rotated annihilation operator B = sum_j u_j a_js for a unit vector u.

    B satisfies B^2 = 0 and {B, B+} = I, so 2 B+ B - I is unitary; these are
    the identities the block-encoding construction leans on.

    Raises:
        ValueError: If u is not unit norm within 1e-12, or indices are bad.
    """
    u = np.asarray(u, dtype=float)
    _check_orbital_count(n)
    if u.shape != (n,):
        raise ValueError(f"u must have shape ({n},), got {u.shape}")
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"u must be unit norm, got |u| = {norm!r}")
    mat = np.zeros((4**n, 4**n), dtype=complex)
    for j in range(n):
        if u[j] != 0.0:
            mat += u[j] * ladder_operator(j, sigma, False, n).matrix
    return DenseOperator(n_qubits=2 * n, matrix=mat)


def verify_one_body_identity(a: np.ndarray) -> float:
    """Max deviation of One(A) from its rotated-basis form.

    Eigendecomposes A = sum_t lambda_t u_t u_t^T and compares the dense
    one-body operator against sum_t,sigma lambda_t B+_(u_t,sigma) B_(u_t,sigma).
    The two agree identically in exact arithmetic; the returned value is the
    max-norm of the numerical difference (expected <= 1e-9).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    _check_orbital_count(n)
    lhs = one_body_operator(a).matrix

    decomp = eigen_rank1(a)
    rhs = np.zeros_like(lhs)
    for lam, vec in zip(decomp.eigenvalues, decomp.vectors):
        for sigma in (0, 1):
            b_mat = b_operator(vec, sigma, n).matrix
            rhs += lam * (b_mat.conj().T @ b_mat)
    return float(np.max(np.abs(lhs - rhs)))


def sector_eigenvalues(op: DenseOperator, n_e: int) -> np.ndarray:
    """Eigenvalues of op restricted to the fixed-particle-number sector.

    Args:
        op: Hermitian dense operator on 2N qubits.
        n_e: Particle number, 0 <= n_e <= 2N; selects the basis states whose
            index has Hamming weight n_e.

    Returns:
        Ascending real eigenvalues of the restricted block.

    Raises:
        ValueError: If n_e is out of range or op is not Hermitian.
    """
    n_qubits = op.n_qubits
    if not 0 <= n_e <= n_qubits:
        raise ValueError(f"n_e={n_e} outside [0, {n_qubits}]")
    deviation = np.max(np.abs(op.matrix - op.matrix.conj().T))
    if deviation > 1e-10:
        raise ValueError(
            f"operator is not Hermitian (max |M - M+| = {deviation:.3e})"
        )
    states = [b for b in range(2**n_qubits) if bin(b).count("1") == n_e]
    block = op.matrix[np.ix_(states, states)]
    return np.linalg.eigvalsh(block)
