"""
Counts Module for the DPP engine
The number of points of a determinantal process is a sum of independent
Bernoulli(lambda_j) variables; this module computes that law exactly
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from errors import OutOfRange
from helpers import as_subset
from kernel import HermitianKernel, restrict_kernel

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('counts')


@dataclass(frozen=True)
class PoissonBinomial:
    """
    Law of a sum of independent Bernoulli(lambda_j) variables

    Args:
        lambdas: Success probabilities in [0, 1]
        pmf: Probabilities of 0..len(lambdas) successes
    """
    lambdas: np.ndarray
    pmf: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.shape[0]), self.pmf))

    @property
    def variance(self) -> float:
        return self.central_moment(2)

    def central_moment(self, order: int) -> float:
        k = np.arange(self.pmf.shape[0], dtype=float)
        return float(np.dot((k - self.mean) ** order, self.pmf))


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Knuth's error-free transformation: a + b = s + e exactly
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def poisson_binomial_pmf(lambdas: Sequence[float]) -> PoissonBinomial:
    """
    Exact pmf by iterative convolution of prod_j (1 - lambda_j + lambda_j z)

    Args:
        lambdas: Success probabilities, each in [0, 1]

    Returns:
        PoissonBinomial with a pmf of length len(lambdas) + 1
    """
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    if not np.all(np.isfinite(lam)) or np.any(lam < 0.0) or np.any(lam > 1.0):
        raise OutOfRange(f"Bernoulli parameters must lie in [0, 1], got {lam.tolist()}")

    n = lam.shape[0]
    pmf = np.zeros(n + 1, dtype=float)
    comp = np.zeros(n + 1, dtype=float)
    pmf[0] = 1.0
    for j, p in enumerate(np.sort(lam, kind="stable")):
        stay = pmf[:j + 2] * (1.0 - p)
        move = np.concatenate(([0.0], pmf[:j + 1] * p))
        stay_c = comp[:j + 2] * (1.0 - p)
        move_c = np.concatenate(([0.0], comp[:j + 1] * p))
        s, e = _two_sum(stay, move)
        pmf[:j + 2] = s
        comp[:j + 2] = e + stay_c + move_c
    pmf = np.clip(pmf + comp, 0.0, None)
    return PoissonBinomial(lambdas=lam, pmf=pmf)


def count_distribution(K: HermitianKernel, E: Sequence[int]) -> PoissonBinomial:
    """
    Law of #(X n E): Poisson-binomial in the eigenvalues of the restricted kernel K_E

    Args:
        K: Validated kernel
        E: Subset of ground-set indices (empty set gives the point mass at 0)

    Returns:
        PoissonBinomial; pmf[0] equals the void probability of E
    """
    subset = as_subset(E, K.n)
    if not subset:
        return poisson_binomial_pmf([])
    lam = np.clip(np.linalg.eigvalsh(restrict_kernel(K, subset).matrix), 0.0, 1.0)
    logger.debug(f"Count law over {len(subset)} sites, expected count {float(np.sum(lam)):.6g}")
    return poisson_binomial_pmf(lam)


def count_moments(pb: PoissonBinomial) -> Tuple[float, float]:
    """Mean sum(lambda) and variance sum(lambda (1 - lambda)) of the count."""
    lam = pb.lambdas
    return math.fsum(lam.tolist()), math.fsum((lam * (1.0 - lam)).tolist())


def standardized_count(count: float, n: int, mean: float) -> float:
    """
    (count - mean) / (sqrt(ln n) / pi), the arc-count statistic of the circular unitary ensemble

    Args:
        count: Observed count
        n: Matrix size (at least 2)
        mean: Expected count
    """
    if n < 2:
        raise OutOfRange(f"Standardization needs n >= 2, got {n}")
    return (count - mean) * math.pi / math.sqrt(math.log(n))


def count_tv_distance(counts_by_size: Dict[int, int], pb: PoissonBinomial) -> float:
    """Total variation between an empirical count histogram and the exact law."""
    draws = sum(counts_by_size.values())
    if draws <= 0:
        raise OutOfRange("Empirical histogram is empty")
    size = max([pb.pmf.shape[0] - 1] + [int(k) for k in counts_by_size])
    empirical = np.zeros(size + 1)
    for k, c in counts_by_size.items():
        empirical[int(k)] += c / draws
    exact = np.zeros(size + 1)
    exact[:pb.pmf.shape[0]] = pb.pmf
    return 0.5 * float(np.sum(np.abs(empirical - exact)))
