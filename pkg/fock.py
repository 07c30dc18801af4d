"""
Fock Module for the DPP engine
Explicit fermion Fock space over C^n: Slater determinants, Fock bases, the
density operator D_K, second quantization and correlation operators.
Used as an exhaustive oracle for the determinantal measure.
"""

import logging
import math
from dataclasses import dataclass
from functools import reduce
from itertools import permutations
from typing import Dict, List, Sequence

import numpy as np

from config import (
    PMF_SUM_TOL,
    STRICT_CONTRACTION_TOL,
    get_fock_cap,
    get_fock_cap_small,
    get_tensor_cap,
)
from errors import (
    DimensionMismatch,
    DimensionTooLarge,
    InvalidArgument,
    NotStrictContraction,
    TooManyFactors,
)
from helpers import SubsetIndex, as_subset, fock_order, format_subset, subsets_of_size
from kernel import HermitianKernel, SpectralDecomposition, check_unitary, rotate_kernel, spectral_decompose
from measure import ExactPmf, full_pmf, validate_blocks

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('fock')

# Upper bound on complex entries held by one batched determinant call
_BATCH_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class FockVector:
    """
    Vector of the fermion Fock space F(C^n) in the standard Fock basis

    Amplitudes are indexed by subsets in (cardinality, lexicographic) order;
    the empty subset is the vacuum component.
    """
    n: int
    amplitudes: np.ndarray

    @property
    def basis(self) -> List[SubsetIndex]:
        return fock_order(self.n)

    def amplitude(self, S: Sequence[int]) -> complex:
        subset = as_subset(S, self.n)
        return complex(self.amplitudes[self.basis.index(subset)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityWeights:
    """
    The density operator D_K stored diagonally in the eigen-Fock basis

    weights[S] = prod_{k in S} lambda_k prod_{k not in S} (1 - lambda_k), S indexing eigenvectors.
    """
    eigenbasis: SpectralDecomposition
    weights: Dict[SubsetIndex, float]

    @property
    def n(self) -> int:
        return self.eigenbasis.n


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Operator on (C^n)^{tensor m}, as an n^m x n^m matrix in the standard product basis."""
    n: int
    m: int
    matrix: np.ndarray

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= tol


def fock_basis(n: int) -> List[SubsetIndex]:
    return fock_order(n)


def _check_fock_cap(n: int) -> None:
    cap = get_fock_cap()
    if n > cap:
        raise DimensionTooLarge(f"Fock space over C^{n} exceeds fock_cap={cap}")


def _check_tensor_cap(n: int, m: int) -> None:
    cap = get_tensor_cap()
    if n ** m > cap:
        raise DimensionTooLarge(f"Tensor space dimension {n}^{m} = {n ** m} exceeds tensor_cap={cap}")


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _stacked_dets(blocks: np.ndarray) -> np.ndarray:
    if blocks.shape[-1] == 0:
        return np.ones(blocks.shape[0], dtype=complex)
    return np.linalg.det(blocks)


def slater_vector(vectors: Sequence[Sequence[complex]]) -> FockVector:
    """
    Wedge product v_1 ^ ... ^ v_m in standard Fock coordinates

    Args:
        vectors: m vectors of length n, 1 <= m <= n

    Returns:
        FockVector whose amplitude at S = {s_1 < ... < s_m} is det(v_b[s_a])
    """
    if len(vectors) == 0:
        raise InvalidArgument("At least one factor is required")
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise DimensionMismatch(f"Factors have different lengths {sorted(lengths)}")
    n = lengths.pop()
    m = len(vectors)
    if m > n:
        raise TooManyFactors(f"{m} factors exceed the one-particle dimension {n}")
    _check_fock_cap(n)

    M = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    basis = fock_order(n)
    amplitudes = np.zeros(len(basis), dtype=complex)
    offset = sum(math.comb(n, k) for k in range(m))
    rows = np.array(subsets_of_size(n, m), dtype=np.int64)
    amplitudes[offset:offset + rows.shape[0]] = _stacked_dets(M[rows, :])
    return FockVector(n=n, amplitudes=amplitudes)


def permutation_operator(n: int, perm: Sequence[int]) -> np.ndarray:
    """
    U_pi on (C^n)^{tensor m}: U_pi(w_1 x ... x w_m) = w_{pi^-1(1)} x ... x w_{pi^-1(m)}

    Args:
        n: One-particle dimension
        perm: 0-based permutation, perm[a] = pi(a)
    """
    m = len(perm)
    _check_tensor_cap(n, m)
    inverse = np.argsort(np.asarray(perm))
    size = n ** m
    cols = np.arange(size)
    digits = np.array(np.unravel_index(cols, (n,) * m)).reshape(m, size)
    rows = np.ravel_multi_index(tuple(digits[inverse]), (n,) * m)
    U = np.zeros((size, size), dtype=float)
    U[rows, cols] = 1.0
    return U


def slater_tensor(vectors: Sequence[Sequence[complex]]) -> np.ndarray:
    """
    Antisymmetrized tensor (1/sqrt(m!)) sum_pi sgn(pi) U_pi (v_1 x ... x v_m)

    Returns:
        Array of shape (n,) * m
    """
    m = len(vectors)
    factors = [np.asarray(v, dtype=complex) for v in vectors]
    n = factors[0].shape[0]
    product = reduce(np.multiply.outer, factors)
    out = np.zeros((n,) * m, dtype=complex)
    for perm in permutations(range(m)):
        # np.transpose with axes = pi^-1 realizes U_pi on a product tensor
        out += _permutation_sign(perm) * np.transpose(product, np.argsort(perm))
    return out / math.sqrt(math.factorial(m))


def fock_overlap(basis_a, S: Sequence[int], basis_b, T: Sequence[int]) -> complex:
    """
    Inner product <f_A(S), f_B(T)> of two Fock basis vectors

    Args:
        basis_a: Unitary whose columns are the ordered basis a
        S: Occupied orbitals of the first vector
        basis_b: Unitary whose columns are the ordered basis b
        T: Occupied orbitals of the second vector

    Returns:
        0 when |S| != |T|, otherwise det(<a_{s_i}, b_{t_j}>) (1 for two vacua)
    """
    A = np.asarray(basis_a, dtype=complex)
    if A.ndim != 2:
        raise DimensionMismatch(f"Basis must be a square matrix, got shape {A.shape}")
    n = A.shape[0]
    A = check_unitary(A, n)
    B = check_unitary(basis_b, n)
    s = as_subset(S, n)
    t = as_subset(T, n)
    if len(s) != len(t):
        return 0j
    if not s:
        return 1 + 0j
    gram = A[:, list(s)].conj().T @ B[:, list(t)]
    return complex(np.linalg.det(gram))


def density_weights(spec: SpectralDecomposition) -> DensityWeights:
    """
    Mixture weights of D_K in its eigen-Fock basis

    Args:
        spec: Spectral decomposition of K (n <= fock_cap)

    Returns:
        DensityWeights over all 2^n eigen-occupations, in Fock order
    """
    n = spec.n
    _check_fock_cap(n)
    lam = spec.eigenvalues
    weights: Dict[SubsetIndex, float] = {}
    for S in fock_order(n):
        occupied = np.zeros(n, dtype=bool)
        occupied[list(S)] = True
        weights[S] = float(np.prod(np.where(occupied, lam, 1.0 - lam)))
    total = math.fsum(weights.values())
    if abs(total - 1.0) > PMF_SUM_TOL:
        logger.warning(f"Density weights sum to {total:.17g}")
    return DensityWeights(eigenbasis=spec, weights=weights)


def _weights_of_size(D: DensityWeights, size: int) -> np.ndarray:
    return np.array([D.weights[T] for T in subsets_of_size(D.n, size)], dtype=float)


def diagonal_probability(D: DensityWeights, W, S: Sequence[int]) -> float:
    """
    <f_W(S), D_K f_W(S)>, the probability of configuration S in basis W

    Args:
        D: Density weights of K
        W: Unitary whose columns are the ordered basis w
        S: Configuration

    Returns:
        sum over |T| = |S| of weight(T) |<f_V(T), f_W(S)>|^2
    """
    n = D.n
    _check_fock_cap(n)
    basis = check_unitary(W, n)
    subset = as_subset(S, n)
    overlap = D.eigenbasis.eigenvectors.conj().T @ basis
    size = len(subset)
    if size == 0:
        return D.weights[()]
    rows = np.array(subsets_of_size(n, size), dtype=np.int64)
    cols = np.array(subset, dtype=np.int64)
    dets = _stacked_dets(overlap[rows[:, :, None], cols[None, None, :]])
    return float(np.dot(_weights_of_size(D, size), np.abs(dets) ** 2))


def diagonal_pmf(D: DensityWeights, W) -> ExactPmf:
    """All diagonal probabilities of D_K in the Fock basis of W, via compound matrices."""
    n = D.n
    _check_fock_cap(n)
    basis = check_unitary(W, n)
    overlap = D.eigenbasis.eigenvectors.conj().T @ basis
    probabilities: Dict[SubsetIndex, float] = {}
    probabilities[()] = float(D.weights[()])
    for size in range(1, n + 1):
        combos = subsets_of_size(n, size)
        rows = np.array(combos, dtype=np.int64).reshape(len(combos), size)
        weights = _weights_of_size(D, size)
        count = len(combos)
        chunk = max(1, _BATCH_ENTRIES // max(1, count * size * size))
        values = np.empty(count, dtype=float)
        for start in range(0, count, chunk):
            cols = rows[start:start + chunk]
            # compound[t, s] = det(overlap[T_t, S_s])
            blocks = overlap[rows[:, None, :, None], cols[None, :, None, :]]
            compound = _stacked_dets(blocks.reshape(count * cols.shape[0], size, size)).reshape(count, cols.shape[0])
            values[start:start + chunk] = weights @ (np.abs(compound) ** 2)
        for S, p in zip(combos, values):
            probabilities[S] = float(p)
    return ExactPmf(n=n, probabilities={S: probabilities[S] for S in fock_order(n)})


def antisymmetrized_power(K, m: int) -> TensorOperator:
    """
    (K x ... x K) sum_pi sgn(pi) U_pi on (C^n)^{tensor m}

    Args:
        K: n x n matrix
        m: Number of tensor factors (>= 1)
    """
    M = np.asarray(K.matrix if isinstance(K, HermitianKernel) else K, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {M.shape}")
    if m < 1:
        raise InvalidArgument(f"Particle number must be at least 1, got {m}")
    n = M.shape[0]
    _check_tensor_cap(n, m)

    power = reduce(np.kron, [M] * m)
    size = n ** m
    digits = np.array(np.unravel_index(np.arange(size), (n,) * m)).reshape(m, size)
    out = np.zeros((size, size), dtype=complex)
    for perm in permutations(range(m)):
        # (power @ U_pi)[:, J] = power[:, row of U_pi e_J]
        rows = np.ravel_multi_index(tuple(digits[np.argsort(perm)]), (n,) * m)
        out += _permutation_sign(perm) * power[:, rows]
    return TensorOperator(n=n, m=m, matrix=out)


def _slot_moves(k: int, m: int):
    """
    Injections j of {1..m} into {1..k}, as 0-based slot tuples.

    The conjugating permutation of A^{(j)} sends slot a to j_a; when the
    transpositions (a j_a) are disjoint it is their product and is self-inverse.
    """
    return permutations(range(k), m)


def correlation_operator(D: DensityWeights, m: int) -> TensorOperator:
    """
    m-particle correlation operator K_m[D], the unique operator with
    Tr(Gamma_m[A] D) = Tr(A K_m[D]) for every operator A on (C^n)^{tensor m}

    Computed exhaustively: every eigen-Fock state contributes its weight times
    the sum over injections j in J(m, k) of the reduced m-slot operator on the
    slots j_1..j_m (k^[m] terms for occupation size k).

    Args:
        D: Density weights (n <= fock_cap_small)
        m: Particle number, 1 <= m <= n
    """
    n = D.n
    cap = get_fock_cap_small()
    if n > cap:
        raise DimensionTooLarge(f"Correlation operators need n <= fock_cap_small={cap}, got {n}")
    if m < 1 or m > n:
        raise InvalidArgument(f"Particle number must lie in [1, {n}], got {m}")
    _check_tensor_cap(n, m)

    V = D.eigenbasis.eigenvectors
    size = n ** m
    out = np.zeros((size, size), dtype=complex)
    for S, weight in D.weights.items():
        k = len(S)
        if k < m or weight == 0.0:
            continue
        state = slater_tensor([V[:, s] for s in S])
        reduced = np.zeros((size, size), dtype=complex)
        injections = 0
        for j in _slot_moves(k, m):
            F = np.moveaxis(state, j, tuple(range(m))).reshape(size, -1)
            reduced += F @ F.conj().T
            injections += 1
        logger.debug(f"State {{{format_subset(S)}}}: {injections} injections")
        out += weight * reduced
    return TensorOperator(n=n, m=m, matrix=out)


def key_identity_gap(spec: SpectralDecomposition, m: int) -> float:
    """max |K_m[D_K] - (K x ... x K) sum_pi sgn(pi) U_pi|"""
    lhs = correlation_operator(density_weights(spec), m)
    rhs = antisymmetrized_power(spec.kernel_matrix(), m)
    gap = float(np.max(np.abs(lhs.matrix - rhs.matrix)))
    logger.info(f"Key identity gap at m={m}: {gap:.3e}")
    return gap


def density_block(D: DensityWeights, m: int) -> TensorOperator:
    """The m-particle block (D_K)_m as an operator on (C^n)^{tensor m}."""
    n = D.n
    if m < 1 or m > n:
        raise InvalidArgument(f"Particle number must lie in [1, {n}], got {m}")
    _check_tensor_cap(n, m)
    V = D.eigenbasis.eigenvectors
    size = n ** m
    out = np.zeros((size, size), dtype=complex)
    for S in subsets_of_size(n, m):
        psi = slater_tensor([V[:, s] for s in S]).reshape(size)
        out += D.weights[S] * np.outer(psi, psi.conj())
    return TensorOperator(n=n, m=m, matrix=out)


def janossy_identity_gap(spec: SpectralDecomposition, m: int) -> float:
    """
    max |(D_K)_m - (1/m!) Det(I - K) (L x ... x L) sum_pi sgn(pi) U_pi|
    for a strict contraction K with L = (I - K)^{-1} K
    """
    lam = spec.eigenvalues
    if float(lam[0]) > 1.0 - STRICT_CONTRACTION_TOL:
        raise NotStrictContraction(f"Largest eigenvalue {float(lam[0]):.12g} is within {STRICT_CONTRACTION_TOL:g} of 1")
    V = spec.eigenvectors
    L = (V * (lam / (1.0 - lam))) @ V.conj().T
    fredholm = float(np.prod(1.0 - lam))
    rhs = antisymmetrized_power(L, m).matrix * (fredholm / math.factorial(m))
    lhs = density_block(density_weights(spec), m).matrix
    return float(np.max(np.abs(lhs - rhs)))


def projector_correlation(D: DensityWeights, W, points: Sequence[int]) -> float:
    """
    Tr((P_{x_1} x ... x P_{x_m}) K_m[D]) with P_x the projector onto basis vector w_x

    For D = D_K this is the probability that all points are present in the
    Fock basis of W.
    """
    n = D.n
    basis = check_unitary(W, n)
    x = as_subset(points, n)
    if not x:
        raise InvalidArgument("At least one point is required")
    Km = correlation_operator(D, len(x))
    projector = reduce(np.kron, [np.outer(basis[:, i], basis[:, i].conj()) for i in x])
    return float(np.sum(projector * Km.matrix.T).real)


def count_correlation_trace(K, blocks: Sequence[Sequence[int]]) -> float:
    """
    Tr((P_{E_1} K x ... x P_{E_m} K) sum_pi sgn(pi) U_pi), the operator form of
    E[prod_j #(X n E_j)] for disjoint blocks
    """
    M = np.asarray(K.matrix if isinstance(K, HermitianKernel) else K, dtype=complex)
    n = M.shape[0]
    subsets = validate_blocks(blocks, n)
    indicators = []
    for subset in subsets:
        vec = np.zeros(n)
        vec[list(subset)] = 1.0
        indicators.append(vec)
    diagonal = reduce(np.kron, indicators)
    power = antisymmetrized_power(M, len(subsets)).matrix
    return float(np.dot(diagonal, np.diag(power)).real)


def rotated_kernel_gap(K: HermitianKernel, W) -> float:
    """
    max over S of |<f_W(S), D_K f_W(S)> - P(X = S)| for the determinantal
    measure with kernel rotate_kernel(K, W)
    """
    D = density_weights(spectral_decompose(K))
    fock_side = diagonal_pmf(D, W).by_mask()
    dpp_side = full_pmf(rotate_kernel(K, W)).by_mask()
    gap = float(np.max(np.abs(fock_side - dpp_side)))
    logger.info(f"Diagonal-probability gap over {1 << K.n} configurations: {gap:.3e}")
    return gap
