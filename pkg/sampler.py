"""
Sampler Module for the DPP engine
Exact sampling through the spectral mixture of projection processes:
phase 1 keeps eigenvector j with probability lambda_j, phase 2 draws the
projection process of the kept eigenvectors point by point.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, TypeVar

import numpy as np

from config import (
    DEFAULT_REPLICATE_STRIDE,
    DEFAULT_SEED,
    SAMPLER_BREAKDOWN_TOL,
    SAMPLER_EIGEN_EPS,
    get_threads,
)
from errors import DimensionMismatch, InvalidArgument, NumericalBreakdown
from helpers import SubsetIndex, fock_sort_key
from kernel import SpectralDecomposition
from measure import ExactPmf

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('sampler')

R = TypeVar('R')


@dataclass(frozen=True)
class SamplerConfig:
    """
    Seed and substream layout of a batch

    Replicate r draws from the substream of block r // replicate_stride, keyed by
    SeedSequence(seed, spawn_key=(block,)) and a Philox-4x64 bit generator, so the
    output only depends on (seed, replicate_stride, count).
    """
    seed: int = DEFAULT_SEED
    replicate_stride: int = DEFAULT_REPLICATE_STRIDE

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidArgument(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.replicate_stride) < 1:
            raise InvalidArgument(f"replicate_stride must be positive, got {self.replicate_stride}")


@dataclass(frozen=True)
class SampleHistogram:
    """Histogram of sampled configurations, keys in Fock order."""
    n: int
    draws: int
    seed: int
    counts: Dict[SubsetIndex, int] = field(default_factory=dict)

    def frequencies(self) -> Dict[SubsetIndex, float]:
        return {S: c / self.draws for S, c in self.counts.items()}

    def cardinality_counts(self) -> Dict[int, int]:
        sizes: Counter = Counter()
        for S, c in self.counts.items():
            sizes[len(S)] += c
        return dict(sorted(sizes.items()))


def replicate_generator(config: SamplerConfig, block: int, stream: int = 0) -> np.random.Generator:
    """Generator of one replicate block; independent streams share a seed without overlap."""
    key = (int(block),) if stream == 0 else (int(stream), int(block))
    seq = np.random.SeedSequence(entropy=int(config.seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))


def run_replicates(block_fn: Callable[[np.random.Generator, int], R], count: int,
                   config: SamplerConfig, threads: Optional[int] = None,
                   stream: int = 0) -> List[R]:
    """
    Run count replicates in blocks of config.replicate_stride on a thread pool

    Args:
        block_fn: Called as block_fn(rng, size) for each block with the block's own generator
        count: Total number of replicates
        config: Seed and stride
        threads: Worker threads (default DPP_THREADS); results do not depend on it
        stream: Substream family, for a second independent simulation under the same seed

    Returns:
        Per-block results in block order
    """
    if count < 1:
        raise InvalidArgument(f"Replicate count must be at least 1, got {count}")
    stride = int(config.replicate_stride)
    blocks = math.ceil(count / stride)
    threads = threads or get_threads()

    def run_block(block: int) -> R:
        size = min(stride, count - block * stride)
        return block_fn(replicate_generator(config, block, stream), size)

    logger.info(f"Running {count} replicates in {blocks} block(s) on {threads} thread(s)")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_block, range(blocks)))


def _choose(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probabilities)
    u = rng.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, u, side="right"))
    return min(index, probabilities.shape[0] - 1)


def _reorthogonalize(P: np.ndarray, rank: int) -> np.ndarray:
    w, U = np.linalg.eigh((P + P.conj().T) / 2.0)
    top = U[:, np.argsort(-w, kind="stable")[:rank]]
    return top @ top.conj().T


def sample_once(spec: SpectralDecomposition, rng: np.random.Generator) -> SubsetIndex:
    """
    Draw one configuration

    Args:
        spec: Spectral decomposition of the kernel
        rng: Generator owned exclusively by the caller

    Returns:
        Sorted tuple of sampled points; its size equals the number of kept eigenvectors
    """
    lam = spec.eigenvalues
    lam = np.where(lam < SAMPLER_EIGEN_EPS, 0.0, np.where(lam > 1.0 - SAMPLER_EIGEN_EPS, 1.0, lam))
    active = rng.random(lam.shape[0]) < lam
    V = spec.eigenvectors[:, active]
    rank = V.shape[1]
    if rank == 0:
        return ()

    P = V @ V.conj().T
    points = []
    retried = False
    for remaining in range(rank, 0, -1):
        diag = np.clip(P.diagonal().real, 0.0, None)
        mass = float(diag.sum())
        if abs(mass - remaining) > SAMPLER_BREAKDOWN_TOL:
            if retried:
                raise NumericalBreakdown(f"Diagonal mass {mass:.9g} does not match remaining rank {remaining}")
            logger.warning(f"Diagonal mass {mass:.9g} drifted from rank {remaining}; re-orthogonalizing")
            P = _reorthogonalize(P, remaining)
            retried = True
            diag = np.clip(P.diagonal().real, 0.0, None)
            mass = float(diag.sum())
            if abs(mass - remaining) > SAMPLER_BREAKDOWN_TOL:
                raise NumericalBreakdown(f"Diagonal mass {mass:.9g} does not match remaining rank {remaining}")
        i = _choose(diag / mass, rng)
        points.append(i)
        # Schur complement: condition the projection process on i being present
        column = P[:, i].copy()
        P = P - np.outer(column, P[i, :]) / P[i, i]
        P[i, :] = 0.0
        P[:, i] = 0.0
    return tuple(sorted(points))


def sample_batch(spec: SpectralDecomposition, count: int, config: SamplerConfig,
                 threads: Optional[int] = None) -> SampleHistogram:
    """
    Histogram of count independent draws, deterministic given config

    Args:
        spec: Spectral decomposition of the kernel
        count: Number of draws (>= 1)
        config: Seed and substream layout
        threads: Worker threads (default DPP_THREADS)

    Returns:
        SampleHistogram keyed in Fock order
    """
    def block(rng: np.random.Generator, size: int) -> Counter:
        return Counter(sample_once(spec, rng) for _ in range(size))

    merged: Counter = Counter()
    for partial in run_replicates(block, count, config, threads):
        merged.update(partial)
    counts = {S: merged[S] for S in sorted(merged, key=fock_sort_key)}
    logger.info(f"Sampled {count} configurations, {len(counts)} distinct")
    return SampleHistogram(n=spec.n, draws=count, seed=int(config.seed), counts=counts)


def empirical_tv_distance(histogram: SampleHistogram, pmf: ExactPmf) -> float:
    """Total variation distance 1/2 sum_S |freq(S) - pmf(S)|."""
    if histogram.n != pmf.n:
        raise DimensionMismatch(f"Histogram over {histogram.n} points compared with pmf over {pmf.n}")
    frequencies = histogram.frequencies()
    keys = set(frequencies) | set(pmf.probabilities)
    return 0.5 * math.fsum(abs(frequencies.get(S, 0.0) - pmf.probabilities.get(S, 0.0)) for S in keys)
