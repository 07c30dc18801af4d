"""
Helper functions for subsets of the ground set
"""

import logging
from itertools import combinations
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from errors import IndexOutOfRange, InvalidArgument, ParseError

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('helpers')

# Sorted tuple of 0-based ground-set indices. Doubles as a Fock basis label.
SubsetIndex = Tuple[int, ...]


def as_subset(indices: Iterable[int], n: int) -> SubsetIndex:
    """
    Validate and normalize a collection of ground-set indices

    Args:
        indices: Any iterable of integer indices (order irrelevant)
        n: Ground-set size

    Returns:
        Strictly increasing tuple of indices in [0, n)
    """
    values = [int(i) for i in indices]
    subset = tuple(sorted(values))
    if len(set(subset)) != len(subset):
        raise InvalidArgument(f"Duplicate indices in subset {values}")
    for i in subset:
        if i < 0 or i >= n:
            raise IndexOutOfRange(f"Index {i} outside ground set of size {n}")
    return subset


def subset_to_mask(subset: Iterable[int]) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


def mask_to_subset(mask: int) -> SubsetIndex:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def complement_subset(subset: SubsetIndex, n: int) -> SubsetIndex:
    members = set(subset)
    return tuple(i for i in range(n) if i not in members)


def fock_order(n: int) -> List[SubsetIndex]:
    """All subsets of {0..n-1} sorted by (cardinality, lexicographic)."""
    order: List[SubsetIndex] = []
    for size in range(n + 1):
        order.extend(combinations(range(n), size))
    return order


def fock_sort_key(subset: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    return (len(subset), tuple(subset))


def subsets_of_size(n: int, size: int) -> List[SubsetIndex]:
    return list(combinations(range(n), size))


def popcounts(n: int) -> np.ndarray:
    """Cardinality of every bitmask 0 .. 2^n - 1."""
    masks = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        counts += (masks >> bit) & 1
    return counts


def format_subset(subset: Sequence[int]) -> str:
    """Format a subset as a comma separated string, e.g. "0,2,3" (empty set is "")."""
    return ",".join(str(i) for i in subset)


def parse_subset(text: str) -> Tuple[int, ...]:
    """
    Parse a subset string such as "0,2,3" (empty string or "{}" is the empty set)

    Args:
        text: Comma separated integers, optional surrounding braces/brackets

    Returns:
        Tuple of integers in the order given (validate with as_subset)
    """
    cleaned = text.strip().strip("{}[]()").strip()
    if cleaned == "":
        return ()
    try:
        return tuple(int(part) for part in cleaned.split(",") if part.strip() != "")
    except ValueError:
        logger.error(f"Could not parse subset {text!r}")
        raise ParseError(f"Invalid subset {text!r}")
