"""
Measure Module for the DPP engine
Exact probabilities of the finite determinantal process: inclusion, elementary,
void and Janossy weights, product-of-counts correlations and full enumeration
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import CLAMP_TOL, PMF_SUM_TOL, PROBABILITY_SLACK, get_enum_cap, get_threads
from errors import BlocksNotDisjoint, DimensionTooLarge, InvalidArgument, NumericalInconsistency
from helpers import (
    SubsetIndex,
    as_subset,
    complement_subset,
    fock_order,
    format_subset,
    popcounts,
    subset_to_mask,
)
from kernel import HermitianKernel, complement_kernel, l_ensemble_of, restrict_kernel

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('measure')

# Upper bound on complex entries held by one batched determinant call
_BATCH_ENTRIES = 1 << 22


@dataclass(frozen=True)
class ExactPmf:
    """
    Exact probability mass function on the subsets of {0..n-1}

    Args:
        n: Ground-set size
        probabilities: SubsetIndex -> probability, in Fock order
    """
    n: int
    probabilities: Dict[SubsetIndex, float]

    def total(self) -> float:
        return math.fsum(self.probabilities.values())

    def by_mask(self) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=float)
        for subset, p in self.probabilities.items():
            out[subset_to_mask(subset)] = p
        return out

    def cardinality_marginal(self) -> np.ndarray:
        return np.bincount(popcounts(self.n), weights=self.by_mask(), minlength=self.n + 1)

    def superset_sums(self) -> np.ndarray:
        """Sum of pmf[T] over T containing each bitmask S (superset zeta transform)."""
        g = self.by_mask()
        masks = np.arange(1 << self.n)
        for bit in range(self.n):
            without = masks[(masks >> bit) & 1 == 0]
            g[without] += g[without | (1 << bit)]
        return g

    def inclusion_from_pmf(self, S: Sequence[int]) -> float:
        subset = as_subset(S, self.n)
        total = 0.0
        for T, p in self.probabilities.items():
            if set(subset).issubset(T):
                total += p
        return total

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"subset": format_subset(S), "size": len(S), "probability": p}
            for S, p in self.probabilities.items()
        ]
        return pd.DataFrame(rows, columns=["subset", "size", "probability"])


def _check_enum_cap(n: int, what: str) -> None:
    cap = get_enum_cap()
    if n > cap:
        raise DimensionTooLarge(f"{what} enumerates 2^{n} subsets; ground set exceeds enum_cap={cap}")


def _clamp_probability(value: float, what: str) -> float:
    if value < 0.0:
        if value >= -CLAMP_TOL:
            return 0.0
        raise NumericalInconsistency(f"{what} is negative ({value:.3e}); the kernel is not a valid contraction")
    if value > 1.0:
        if value <= 1.0 + PROBABILITY_SLACK:
            return 1.0
        raise NumericalInconsistency(f"{what} exceeds 1 ({value:.17g})")
    return value


def _principal_minor(M: np.ndarray, subset: Sequence[int]) -> float:
    if len(subset) == 0:
        return 1.0
    idx = np.asarray(subset)
    # LU-based determinant (pivoted factorization)
    return float(np.linalg.det(M[np.ix_(idx, idx)]).real)


def _batched_minors(M: np.ndarray, index_rows: np.ndarray) -> np.ndarray:
    """Determinants of M restricted to each row of an (N, k) index array."""
    count, k = index_rows.shape
    if k == 0:
        return np.ones(count, dtype=float)
    chunk = max(1, _BATCH_ENTRIES // (k * k))
    out = np.empty(count, dtype=float)
    for start in range(0, count, chunk):
        rows = index_rows[start:start + chunk]
        blocks = M[rows[:, :, None], rows[:, None, :]]
        out[start:start + chunk] = np.linalg.det(blocks).real
    return out


def inclusion_probability(K: HermitianKernel, S: Sequence[int]) -> float:
    """
    P(S is contained in X) = det of the principal submatrix K_S

    Args:
        K: Validated kernel
        S: Subset of ground-set indices (empty set gives 1)

    Returns:
        Probability in [0, 1]
    """
    subset = as_subset(S, K.n)
    value = _principal_minor(K.matrix, subset)
    return _clamp_probability(value, f"Inclusion probability of {{{format_subset(subset)}}}")


def elementary_probability(K: HermitianKernel, S: Sequence[int]) -> float:
    """
    P(X = S) by inclusion-exclusion over all supersets of S

    Args:
        K: Validated kernel
        S: Subset of ground-set indices

    Returns:
        Probability of the exact configuration S
    """
    n = K.n
    _check_enum_cap(n, "elementary_probability")
    subset = as_subset(S, n)
    rest = complement_subset(subset, n)
    terms: List[float] = []
    for extra in range(len(rest) + 1):
        extensions = list(combinations(rest, extra))
        rows = np.array([subset + ext for ext in extensions], dtype=np.int64).reshape(len(extensions), len(subset) + extra)
        minors = _batched_minors(K.matrix, rows)
        sign = -1.0 if extra % 2 else 1.0
        terms.extend((sign * minors).tolist())
    value = math.fsum(terms)
    return _clamp_probability(value, f"Elementary probability of {{{format_subset(subset)}}}")


def _pmf_chunk(M: np.ndarray, masks: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    bits = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    # P(X = S) = (-1)^{|S^c|} det(K - 1_{S^c})
    stacked = np.repeat(M[None, :, :], len(masks), axis=0)
    diag = np.arange(n)
    stacked[:, diag, diag] -= 1.0 - bits
    signs = np.where((n - bits.sum(axis=1)) % 2 == 1, -1.0, 1.0)
    return signs * np.linalg.det(stacked).real


def full_pmf(K: HermitianKernel, threads: Optional[int] = None) -> ExactPmf:
    """
    Exact pmf of the process over all 2^n subsets

    Args:
        K: Validated kernel with n <= enum_cap
        threads: Worker threads (default DPP_THREADS); the result does not depend on it

    Returns:
        ExactPmf in Fock order
    """
    n = K.n
    _check_enum_cap(n, "full_pmf")
    threads = threads or get_threads()
    total = 1 << n
    chunk = max(1, _BATCH_ENTRIES // (n * n))
    starts = list(range(0, total, chunk))
    logger.info(f"Enumerating {total} subsets in {len(starts)} chunk(s) on {threads} thread(s)")

    M = K.matrix
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pieces = list(pool.map(lambda s: _pmf_chunk(M, np.arange(s, min(s + chunk, total), dtype=np.int64)), starts))
    values = np.concatenate(pieces)

    low = float(values.min())
    if low < -CLAMP_TOL:
        raise NumericalInconsistency(f"Enumerated probability {low:.3e} is negative; the kernel is not a valid contraction")
    values = np.clip(values, 0.0, None)

    probabilities = {S: float(values[subset_to_mask(S)]) for S in fock_order(n)}
    pmf = ExactPmf(n=n, probabilities=probabilities)
    drift = abs(pmf.total() - 1.0)
    if drift > PMF_SUM_TOL:
        logger.warning(f"Enumerated pmf sums to 1 only within {drift:.3e}")
    return pmf


def all_inclusion_probabilities(K: HermitianKernel) -> np.ndarray:
    """det(K_S) for every bitmask S (index = bitmask)."""
    n = K.n
    _check_enum_cap(n, "all_inclusion_probabilities")
    out = np.empty(1 << n, dtype=float)
    for size in range(n + 1):
        combos = list(combinations(range(n), size))
        rows = np.array(combos, dtype=np.int64).reshape(len(combos), size)
        minors = _batched_minors(K.matrix, rows)
        for subset, value in zip(combos, minors):
            out[subset_to_mask(subset)] = value
    return out


def complement_pmf_discrepancy(K: HermitianKernel) -> float:
    """
    Max over S of |P^c(X contains S) - det((I - K)_S)|, with P^c taken from full_pmf(K)
    by complementing every configuration
    """
    n = K.n
    pmf = full_pmf(K)
    # g[U] = sum of pmf over subsets of U
    g = pmf.by_mask()
    masks = np.arange(1 << n)
    for bit in range(n):
        with_bit = masks[(masks >> bit) & 1 == 1]
        g[with_bit] += g[with_bit ^ (1 << bit)]
    full = (1 << n) - 1
    complement_side = g[full ^ masks]
    kernel_side = all_inclusion_probabilities(complement_kernel(K))
    discrepancy = float(np.max(np.abs(complement_side - kernel_side)))
    logger.info(f"Complement identity discrepancy: {discrepancy:.3e}")
    return discrepancy


def complement_pmf_check(K: HermitianKernel) -> bool:
    """True when the complemented pmf of K is determinantal with kernel I - K (within 1e-10)."""
    return complement_pmf_discrepancy(K) <= PMF_SUM_TOL


def void_probability(K: HermitianKernel, E: Sequence[int]) -> float:
    """
    Probability of no points in E, the Fredholm determinant Det(I - K_E)

    Args:
        K: Validated kernel
        E: Subset of ground-set indices (empty set gives 1)

    Returns:
        Product of (1 - lambda) over the spectrum of the restricted kernel
    """
    subset = as_subset(E, K.n)
    if not subset:
        return 1.0
    lam = np.clip(np.linalg.eigvalsh(restrict_kernel(K, subset).matrix), 0.0, 1.0)
    return float(np.prod(1.0 - lam))


def validate_blocks(blocks: Sequence[Sequence[int]], n: int) -> List[SubsetIndex]:
    """Validate a nonempty list of pairwise disjoint subsets."""
    if len(blocks) == 0:
        raise InvalidArgument("At least one block is required")
    subsets = [as_subset(block, n) for block in blocks]
    seen = set()
    for subset in subsets:
        shared = seen.intersection(subset)
        if shared:
            raise BlocksNotDisjoint(f"Blocks share indices {sorted(shared)}")
        seen.update(subset)
    return subsets


def correlation_sum(K: HermitianKernel, blocks: Sequence[Sequence[int]]) -> float:
    """
    E[prod_j #(X n E_j)] for pairwise disjoint blocks E_1..E_m

    Args:
        K: Validated kernel
        blocks: Pairwise disjoint subsets (at least one)

    Returns:
        Sum over x_1 in E_1, ..., x_m in E_m of det(K(x_i, x_j))
    """
    subsets = validate_blocks(blocks, K.n)
    if any(len(subset) == 0 for subset in subsets):
        return 0.0
    rows = np.array(list(product(*subsets)), dtype=np.int64)
    return float(np.sum(_batched_minors(K.matrix, rows)))


def janossy_weight(K: HermitianKernel, S: Sequence[int]) -> float:
    """
    Janossy weight Det(I - K) det(L_S) with L = (I - K)^{-1} K

    On a finite ground set with counting measure this is P(X = S).
    """
    subset = as_subset(S, K.n)
    L = l_ensemble_of(K)
    fredholm = void_probability(K, range(K.n))
    value = fredholm * _principal_minor(L, subset)
    return _clamp_probability(value, f"Janossy weight of {{{format_subset(subset)}}}")
