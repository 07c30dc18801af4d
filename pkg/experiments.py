"""
Experiments Module for the DPP engine
Two determinantal processes met in practice, at desk scale: eigenangles of a
Haar-random unitary counted in an arc of the circle, and the edge set of a
uniformly random spanning tree.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats

from config import get_enum_cap
from counts import PoissonBinomial, count_tv_distance, poisson_binomial_pmf
from errors import Disconnected, IndexOutOfRange, InvalidArgument, InvalidGraph, OutOfRange
from helpers import SubsetIndex, as_subset, fock_sort_key, format_subset
from kernel import HermitianKernel, kernel_from_eigen, spectral_decompose, validate_kernel
from measure import elementary_probability
from sampler import SampleHistogram, SamplerConfig, run_replicates, sample_batch

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('experiments')

TWO_PI = 2.0 * math.pi
MIN_ARC_REPLICATES = 100
# Substream family of the Wilson oracle, disjoint from the DPP sampler's
WILSON_STREAM = 1


# ---------------------------------------------------------------------------
# Random matrices
# ---------------------------------------------------------------------------

def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Haar-distributed n x n unitary

    QR of a complex Ginibre matrix, with the phases of R's diagonal moved into Q
    so that the factorization is unique.
    """
    if n < 1:
        raise InvalidArgument(f"Unitary size must be positive, got {n}")
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return Q * phases


def random_kernel(n: int, rng: np.random.Generator, max_eigenvalue: float = 1.0) -> HermitianKernel:
    """
    Random Hermitian contraction: uniform spectrum in [0, max_eigenvalue], Haar eigenbasis

    Args:
        n: Ground-set size
        rng: Generator
        max_eigenvalue: Upper end of the spectrum (below 1 gives a strict contraction)
    """
    if not 0.0 <= max_eigenvalue <= 1.0:
        raise OutOfRange(f"max_eigenvalue must lie in [0, 1], got {max_eigenvalue}")
    lam = rng.uniform(0.0, max_eigenvalue, size=n)
    return kernel_from_eigen(lam, haar_unitary(n, rng))


# ---------------------------------------------------------------------------
# Circular unitary ensemble
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    """Arc of the unit circle of the given length (radians) centered at `center`."""
    length: float
    center: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.length) and math.isfinite(self.center)):
            raise OutOfRange("Arc length and center must be finite")
        if not 0.0 < self.length <= TWO_PI:
            raise OutOfRange(f"Arc length must lie in (0, 2*pi], got {self.length}")

    @property
    def start(self) -> float:
        return self.center - self.length / 2.0


def arc_contains(angles, arc: Arc) -> np.ndarray:
    """Membership of angles in the half-open arc [start, start + length), modulo 2*pi."""
    angles = np.asarray(angles, dtype=float)
    if arc.length >= TWO_PI:
        return np.ones(angles.shape, dtype=bool)
    return np.mod(angles - arc.start, TWO_PI) < arc.length


def cue_arc_eigenvalues(n: int, arc: Arc) -> np.ndarray:
    """
    Spectrum of the n-point CUE kernel restricted to an arc

    The Gram matrix of e^{ik theta}, k = 0..n-1, over the arc (normalized by 2*pi) is
    Toeplitz with diagonal length/(2*pi) and off-diagonals sin(d*length/2)/(pi*d) up to
    a diagonal phase from the center, which leaves the spectrum unchanged.

    Args:
        n: Matrix size
        arc: Arc of the circle

    Returns:
        Eigenvalues in [0, 1], ascending
    """
    if n < 1:
        raise InvalidArgument(f"CUE size must be positive, got {n}")
    d = np.arange(1, n, dtype=float)
    column = np.empty(n, dtype=float)
    column[0] = arc.length / TWO_PI
    column[1:] = np.sin(d * arc.length / 2.0) / (math.pi * d)
    lam = scipy.linalg.eigvalsh(scipy.linalg.toeplitz(column))
    return np.clip(lam, 0.0, 1.0)


def _finite_or_none(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _count_table(counts: np.ndarray, size: int) -> List[float]:
    frequencies = pd.Series(counts).value_counts(normalize=True)
    table = np.zeros(size + 1)
    for k, p in frequencies.items():
        table[int(k)] = p
    return table.tolist()


def arc_count_experiment(n: int, arc: Arc, replicates: int, config: SamplerConfig,
                         threads: Optional[int] = None) -> Dict[str, Any]:
    """
    Count eigenangles of Haar unitaries falling in an arc and compare with the exact law

    Args:
        n: Matrix size (at least 2)
        arc: Arc of the circle
        replicates: Number of sampled unitaries (at least 100)
        config: Seed and substream layout
        threads: Worker threads (default DPP_THREADS)

    Returns:
        Report with the empirical and exact count moments and pmfs, their total
        variation distance, and moments of (count - mean) / (sqrt(ln n)/pi)
    """
    if n < 2:
        raise OutOfRange(f"CUE experiment needs n >= 2, got {n}")
    if replicates < MIN_ARC_REPLICATES:
        raise InvalidArgument(f"CUE experiment needs at least {MIN_ARC_REPLICATES} replicates, got {replicates}")
    logger.info(f"CUE arc counts: n={n}, arc length={arc.length:.6g}, {replicates} replicates")

    def block(rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.int64)
        for r in range(size):
            angles = np.angle(np.linalg.eigvals(haar_unitary(n, rng)))
            out[r] = int(np.count_nonzero(arc_contains(angles, arc)))
        return out

    counts = np.concatenate(run_replicates(block, replicates, config, threads))

    exact: PoissonBinomial = poisson_binomial_pmf(cue_arc_eigenvalues(n, arc))
    exact_mean, exact_variance = exact.mean, exact.variance
    fourth = exact.central_moment(4)
    # Standard error of the unbiased sample variance of an i.i.d. sample
    variance_se = math.sqrt(max(0.0, (fourth - exact_variance ** 2 * (replicates - 3) / (replicates - 1)) / replicates))

    empirical_mean = float(np.mean(counts))
    empirical_variance = float(np.var(counts, ddof=1))
    scale = math.sqrt(math.log(n)) / math.pi
    standardized = (counts - exact_mean) / scale

    sizes = Counter(int(c) for c in counts)
    report = {
        "experiment": "cue",
        "n": n,
        "arc_length": arc.length,
        "arc_center": arc.center,
        "replicates": replicates,
        "seed": int(config.seed),
        "empirical": {
            "mean": empirical_mean,
            "variance": empirical_variance,
            "count_pmf": _count_table(counts, n),
        },
        "exact": {
            "mean": exact_mean,
            "variance": exact_variance,
            "variance_standard_error": variance_se,
            "count_pmf": exact.pmf.tolist(),
        },
        "mean_z_score": (empirical_mean - exact_mean) / math.sqrt(exact_variance / replicates) if exact_variance > 1e-12 else None,
        "variance_z_score": (empirical_variance - exact_variance) / variance_se if variance_se > 1e-12 else None,
        "count_tv_distance": count_tv_distance(dict(sizes), exact),
        "standardized": {
            "scale": scale,
            "mean": float(np.mean(standardized)),
            "variance": float(np.var(standardized, ddof=1)),
            "exact_variance": exact_variance / scale ** 2,
            "skewness": _finite_or_none(scipy.stats.skew(standardized)) if empirical_variance > 0 else None,
            "excess_kurtosis": _finite_or_none(scipy.stats.kurtosis(standardized)) if empirical_variance > 0 else None,
        },
    }
    logger.info(f"CUE counts: mean {empirical_mean:.4f} (exact {exact_mean:.4f}), "
                f"variance {empirical_variance:.4f} (exact {exact_variance:.4f})")
    return report


# ---------------------------------------------------------------------------
# Graphs and uniform spanning trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimpleGraph:
    """
    Connected simple graph on vertices 0..vertices-1

    Each edge is stored with its reference orientation (smaller vertex, larger vertex);
    edge e of the list is ground-set point e of the spanning-tree process.
    """
    vertices: int
    edges: Tuple[Tuple[int, int], ...]

    @classmethod
    def from_edges(cls, vertices: int, edges: Iterable[Sequence[int]]) -> "SimpleGraph":
        vertices = int(vertices)
        if vertices < 2:
            raise InvalidGraph(f"A graph needs at least 2 vertices, got {vertices}")
        oriented: List[Tuple[int, int]] = []
        seen = set()
        for edge in edges:
            if len(edge) != 2:
                raise InvalidGraph(f"Edge {list(edge)} does not have exactly two endpoints")
            u, v = int(edge[0]), int(edge[1])
            for w in (u, v):
                if w < 0 or w >= vertices:
                    raise IndexOutOfRange(f"Vertex {w} outside 0..{vertices - 1}")
            if u == v:
                raise InvalidGraph(f"Self-loop at vertex {u}")
            pair = (min(u, v), max(u, v))
            if pair in seen:
                raise InvalidGraph(f"Duplicate edge {pair}")
            seen.add(pair)
            oriented.append(pair)
        graph = cls(vertices=vertices, edges=tuple(oriented))
        if not nx.is_connected(graph.to_networkx()):
            raise Disconnected(f"Graph on {vertices} vertices with {len(oriented)} edges is not connected")
        return graph

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.vertices))
        for index, (u, v) in enumerate(self.edges):
            G.add_edge(u, v, index=index)
        return G

    def incidence_matrix(self) -> np.ndarray:
        """Signed |E| x |V| incidence matrix, +1 at the tail and -1 at the head."""
        B = np.zeros((self.edge_count, self.vertices), dtype=float)
        for e, (u, v) in enumerate(self.edges):
            B[e, u] = 1.0
            B[e, v] = -1.0
        return B

    def laplacian(self) -> np.ndarray:
        return nx.laplacian_matrix(self.to_networkx(), nodelist=range(self.vertices)).toarray().astype(float)


def complete_graph(vertices: int) -> SimpleGraph:
    return SimpleGraph.from_edges(vertices, combinations(range(vertices), 2))


def cycle_graph(vertices: int) -> SimpleGraph:
    if vertices < 3:
        raise InvalidGraph(f"A cycle needs at least 3 vertices, got {vertices}")
    return SimpleGraph.from_edges(vertices, [(i, (i + 1) % vertices) for i in range(vertices)])


def path_graph(vertices: int) -> SimpleGraph:
    return SimpleGraph.from_edges(vertices, [(i, i + 1) for i in range(vertices - 1)])


def _laplacian_pinv(L: np.ndarray) -> np.ndarray:
    w, U = scipy.linalg.eigh(L)
    keep = w > 1e-9 * max(1.0, float(w.max()))
    pinv = (U[:, keep] / w[keep]) @ U[:, keep].T
    # Project out the constant vector
    v = L.shape[0]
    P = np.eye(v) - np.full((v, v), 1.0 / v)
    return P @ pinv @ P


def transfer_current_kernel(G: SimpleGraph) -> HermitianKernel:
    """
    Transfer-current kernel on the edges: K = B L^+ B^T

    K(e, f) is the current through f (reference orientation) when a unit current
    enters at the tail of e and leaves at its head; K(e, e) is the effective
    resistance across e. K is a projection of rank |V| - 1.
    """
    B = G.incidence_matrix()
    K = B @ _laplacian_pinv(G.laplacian()) @ B.T
    logger.info(f"Transfer-current kernel on {G.edge_count} edges, trace {float(np.trace(K)):.12g}")
    return validate_kernel((K + K.T) / 2.0)


def spanning_tree_count(G: SimpleGraph) -> int:
    """Number of spanning trees: any cofactor of the Laplacian."""
    count = int(round(float(np.linalg.det(G.laplacian()[1:, 1:]))))
    if count < 1:
        raise Disconnected("Reduced Laplacian is singular")
    return count


def is_spanning_tree(G: SimpleGraph, edge_subset: Sequence[int]) -> bool:
    subset = as_subset(edge_subset, G.edge_count)
    if len(subset) != G.vertices - 1:
        return False
    T = nx.Graph()
    T.add_nodes_from(range(G.vertices))
    T.add_edges_from(G.edges[e] for e in subset)
    return nx.is_tree(T)


def wilson_sample(G: SimpleGraph, rng: np.random.Generator) -> SubsetIndex:
    """
    Uniform spanning tree by loop-erased random walks rooted at vertex 0

    Returns:
        Sorted edge indices of the tree
    """
    adjacency: List[List[int]] = [[] for _ in range(G.vertices)]
    edge_index: Dict[Tuple[int, int], int] = {}
    for e, (u, v) in enumerate(G.edges):
        adjacency[u].append(v)
        adjacency[v].append(u)
        edge_index[(u, v)] = e
    if any(not neighbors for neighbors in adjacency):
        raise Disconnected("Graph has an isolated vertex")

    in_tree = [False] * G.vertices
    next_vertex = [-1] * G.vertices
    in_tree[0] = True
    for start in range(G.vertices):
        # Walk until the tree is hit; overwriting next_vertex erases loops
        u = start
        while not in_tree[u]:
            neighbors = adjacency[u]
            next_vertex[u] = neighbors[int(rng.integers(len(neighbors)))]
            u = next_vertex[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = next_vertex[u]

    tree = [edge_index[(min(u, w), max(u, w))] for u, w in enumerate(next_vertex) if w >= 0]
    return tuple(sorted(tree))


def _histogram_tv(first: SampleHistogram, second: SampleHistogram) -> float:
    a, b = first.frequencies(), second.frequencies()
    return 0.5 * math.fsum(abs(a.get(S, 0.0) - b.get(S, 0.0)) for S in set(a) | set(b))


def _uniform_tv(histogram: SampleHistogram, trees: Sequence[SubsetIndex]) -> float:
    frequencies = histogram.frequencies()
    uniform = 1.0 / len(trees)
    tree_set = set(trees)
    on_trees = [abs(frequencies.get(S, 0.0) - uniform) for S in trees]
    off_trees = [p for S, p in frequencies.items() if S not in tree_set]
    return 0.5 * math.fsum(on_trees + off_trees)


def wilson_batch(G: SimpleGraph, draws: int, config: SamplerConfig,
                 threads: Optional[int] = None) -> SampleHistogram:
    def block(rng: np.random.Generator, size: int) -> Counter:
        return Counter(wilson_sample(G, rng) for _ in range(size))

    merged: Counter = Counter()
    for partial in run_replicates(block, draws, config, threads, stream=WILSON_STREAM):
        merged.update(partial)
    counts = {S: merged[S] for S in sorted(merged, key=fock_sort_key)}
    return SampleHistogram(n=G.edge_count, draws=draws, seed=int(config.seed), counts=counts)


def ust_compare(G: SimpleGraph, draws: int, config: SamplerConfig,
                threads: Optional[int] = None) -> Dict[str, Any]:
    """
    Compare the spanning-tree DPP with Wilson's algorithm

    Args:
        G: Connected simple graph
        draws: Draws per sampler
        config: Seed and substream layout (Wilson runs on its own substream family)
        threads: Worker threads (default DPP_THREADS)

    Returns:
        Report with the exact tree probabilities (when |E| <= enum_cap), both
        histograms, their total variation distance and the spanning-tree check
    """
    logger.info(f"Uniform spanning trees: {G.vertices} vertices, {G.edge_count} edges, {draws} draws")
    K = transfer_current_kernel(G)
    tree_count = spanning_tree_count(G)
    rank = G.vertices - 1

    report: Dict[str, Any] = {
        "experiment": "ust",
        "vertices": G.vertices,
        "edges": [list(edge) for edge in G.edges],
        "draws": draws,
        "seed": int(config.seed),
        "spanning_tree_count": tree_count,
        "kernel_trace": float(np.trace(K.matrix).real),
    }

    enumerable = G.edge_count <= get_enum_cap()
    trees: List[SubsetIndex] = []
    if enumerable:
        trees = [S for S in combinations(range(G.edge_count), rank) if is_spanning_tree(G, S)]
        exact = {S: elementary_probability(K, S) for S in trees}
        report["exact"] = {
            "tree_probabilities": {format_subset(S): p for S, p in exact.items()},
            "max_discrepancy": max(abs(p - 1.0 / tree_count) for p in exact.values()),
            "tree_mass": math.fsum(exact.values()),
        }

    dpp = sample_batch(spectral_decompose(K), draws, config, threads)
    wilson = wilson_batch(G, draws, config, threads)
    report["dpp"] = {
        "distinct": len(dpp.counts),
        "all_spanning_trees": all(is_spanning_tree(G, S) for S in dpp.counts),
        "cardinalities": {str(k): c for k, c in dpp.cardinality_counts().items()},
        "tv_to_uniform": _uniform_tv(dpp, trees) if enumerable else None,
    }
    report["wilson"] = {
        "distinct": len(wilson.counts),
        "tv_to_uniform": _uniform_tv(wilson, trees) if enumerable else None,
    }
    report["dpp_wilson_tv"] = _histogram_tv(dpp, wilson)
    logger.info(f"DPP vs Wilson total variation: {report['dpp_wilson_tv']:.3e}")
    return report
