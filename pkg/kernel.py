"""
Kernel Module for the DPP engine
Validates Hermitian contraction kernels and implements the kernel algebra
(complement, restriction, basis rotation, L-ensemble)
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from config import (
    EIG_TOL,
    HERMITIAN_TOL_REL,
    ORTHO_TOL,
    RECON_TOL,
    STRICT_CONTRACTION_TOL,
)
from errors import (
    DecompositionFailure,
    DimensionMismatch,
    EmptySubset,
    NonFinite,
    NotHermitian,
    NotPSD,
    NotStrictContraction,
    NotUnitary,
    SpectrumOutOfRange,
)
from helpers import as_subset

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('kernel')


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2.0


@dataclass(frozen=True, eq=False)
class HermitianKernel:
    """
    n x n complex Hermitian matrix with spectrum in [0, 1]

    Entry (i, j) is the kernel value K(x_i, x_j); ground-set indices are 0-based.
    """
    entries: np.ndarray
    clip_magnitude: float = 0.0
    complement_of: Optional["HermitianKernel"] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.entries


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Eigenvalues in descending order (clipped to [0, 1]) and the matching
    orthonormal eigenvectors, one per column.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def kernel_matrix(self) -> np.ndarray:
        V = self.eigenvectors
        return _hermitize((V * self.eigenvalues) @ V.conj().T)


def _as_square(matrix, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or infinite entries")
    return arr


def _eigh(matrix: np.ndarray):
    try:
        w, V = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as e:
        raise DecompositionFailure(f"Eigen-solver failed: {str(e)}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise DecompositionFailure("Eigen-solver returned non-finite values")
    return w, V


def _asymmetry(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr - arr.conj().T)))


def validate_kernel(matrix, hermitian_tol: Optional[float] = None,
                    eig_tol: float = EIG_TOL) -> HermitianKernel:
    """
    Validate a candidate DPP kernel

    Args:
        matrix: n x n array-like (real or complex)
        hermitian_tol: Allowed max |K_ij - conj(K_ji)| (default 1e-9 * max(1, |K|_max))
        eig_tol: Allowed spectrum excursion outside [0, 1] before rejection

    Returns:
        HermitianKernel whose spectrum has been clipped to [0, 1]
    """
    arr = _as_square(matrix, "kernel")
    if hermitian_tol is None:
        hermitian_tol = HERMITIAN_TOL_REL * max(1.0, float(np.max(np.abs(arr))))

    asymmetry = _asymmetry(arr)
    if asymmetry > hermitian_tol:
        raise NotHermitian(f"Kernel asymmetry {asymmetry:.3e} exceeds tolerance {hermitian_tol:.3e}")

    herm = _hermitize(arr)
    w, V = _eigh(herm)
    lo, hi = float(w.min()), float(w.max())
    if lo < -eig_tol or hi > 1.0 + eig_tol:
        raise SpectrumOutOfRange(f"Kernel spectrum [{lo:.6g}, {hi:.6g}] is outside [0, 1] beyond tolerance {eig_tol:g}")

    clip = max(0.0, -lo, hi - 1.0)
    if clip > 0.0:
        logger.debug(f"Clipping kernel spectrum by {clip:.3e}")
        herm = _hermitize((V * np.clip(w, 0.0, 1.0)) @ V.conj().T)
    return HermitianKernel(entries=_frozen(herm), clip_magnitude=clip)


def spectral_decompose(K: HermitianKernel) -> SpectralDecomposition:
    """
    Eigen-decompose a validated kernel

    Args:
        K: Validated kernel

    Returns:
        SpectralDecomposition with descending eigenvalues; ties keep solver order
    """
    w, V = _eigh(K.matrix)
    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], 0.0, 1.0)
    V = V[:, order]

    n = K.n
    ortho_error = float(np.max(np.abs(V.conj().T @ V - np.eye(n))))
    if ortho_error > ORTHO_TOL:
        raise DecompositionFailure(f"Eigenvectors not orthonormal (error {ortho_error:.3e})")
    spec = SpectralDecomposition(eigenvalues=np.array(w, dtype=float), eigenvectors=np.array(V, dtype=complex))
    recon_error = float(np.max(np.abs(spec.kernel_matrix() - K.matrix)))
    if recon_error > RECON_TOL:
        raise DecompositionFailure(f"Spectral reconstruction error {recon_error:.3e} exceeds {RECON_TOL:g}")
    spec.eigenvalues.setflags(write=False)
    spec.eigenvectors.setflags(write=False)
    return spec


def complement_kernel(K: HermitianKernel) -> HermitianKernel:
    """Kernel I - K of the complementary process; complement twice returns K itself."""
    if K.complement_of is not None:
        return K.complement_of
    entries = np.eye(K.n, dtype=complex) - K.matrix
    return HermitianKernel(entries=_frozen(entries), clip_magnitude=K.clip_magnitude, complement_of=K)


def restrict_kernel(K: HermitianKernel, E: Sequence[int]) -> HermitianKernel:
    """
    Principal submatrix K_E, the kernel of the process restricted to E

    Args:
        K: Validated kernel
        E: Nonempty subset of ground-set indices

    Returns:
        |E| x |E| kernel (eigenvalue interlacing keeps it in [0, 1])
    """
    subset = as_subset(E, K.n)
    if not subset:
        raise EmptySubset("Restriction requires a nonempty subset")
    idx = np.array(subset)
    return HermitianKernel(entries=_frozen(K.matrix[np.ix_(idx, idx)]), clip_magnitude=K.clip_magnitude)


def check_unitary(W, n: int, tol: float = ORTHO_TOL) -> np.ndarray:
    arr = np.asarray(W, dtype=complex)
    if arr.shape != (n, n):
        raise DimensionMismatch(f"Basis must be {n}x{n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("Basis contains NaN or infinite entries")
    error = float(np.max(np.abs(arr.conj().T @ arr - np.eye(n))))
    if error > tol:
        raise NotUnitary(f"Basis is not unitary (|W^H W - I|_max = {error:.3e})")
    return arr


def rotate_kernel(K: HermitianKernel, W) -> HermitianKernel:
    """
    Kernel of K in the ordered orthonormal basis given by the columns of W

    Entry (i, j) is <K w_i, w_j> = w_i^H K w_j (inner product conjugate-linear in
    its first argument), i.e. W^H K W. Same spectrum as K.
    """
    basis = check_unitary(W, K.n)
    rotated = basis.conj().T @ K.matrix @ basis
    return HermitianKernel(entries=_frozen(_hermitize(rotated)), clip_magnitude=K.clip_magnitude)


def l_ensemble_of(K: HermitianKernel) -> np.ndarray:
    """
    L = (I - K)^{-1} K for a strict contraction

    Args:
        K: Kernel with largest eigenvalue at most 1 - strict_contraction_tol

    Returns:
        Hermitian positive semidefinite n x n matrix
    """
    spec = spectral_decompose(K)
    lam_max = float(spec.eigenvalues[0])
    if lam_max > 1.0 - STRICT_CONTRACTION_TOL:
        raise NotStrictContraction(f"Largest eigenvalue {lam_max:.12g} is within {STRICT_CONTRACTION_TOL:g} of 1")
    lam = spec.eigenvalues
    V = spec.eigenvectors
    return _hermitize((V * (lam / (1.0 - lam))) @ V.conj().T)


def kernel_of_l_ensemble(L) -> HermitianKernel:
    """Inverse of l_ensemble_of: K = L (I + L)^{-1}."""
    arr = _as_square(L, "L-ensemble")
    scale = max(1.0, float(np.max(np.abs(arr))))
    asymmetry = _asymmetry(arr)
    if asymmetry > HERMITIAN_TOL_REL * scale:
        raise NotPSD(f"L-ensemble matrix is not Hermitian (asymmetry {asymmetry:.3e})")
    mu, V = _eigh(_hermitize(arr))
    if float(mu.min()) < -EIG_TOL * scale:
        raise NotPSD(f"L-ensemble matrix has negative eigenvalue {float(mu.min()):.6g}")
    mu = np.clip(mu, 0.0, None)
    entries = _hermitize((V * (mu / (1.0 + mu))) @ V.conj().T)
    return HermitianKernel(entries=_frozen(entries))


def kernel_from_eigen(eigenvalues, eigenvectors) -> HermitianKernel:
    """Assemble V diag(lambda) V^H and validate it."""
    lam = np.asarray(eigenvalues, dtype=float)
    V = np.asarray(eigenvectors, dtype=complex)
    if V.ndim != 2 or V.shape[1] != lam.shape[0]:
        raise DimensionMismatch(f"{lam.shape[0]} eigenvalues for eigenvector matrix of shape {V.shape}")
    return validate_kernel((V * lam) @ V.conj().T)


def is_projection(K: HermitianKernel, tol: float = RECON_TOL) -> bool:
    M = K.matrix
    return float(np.max(np.abs(M @ M - M))) <= tol
