"""
Kernel and graph loaders
Reads kernel matrices from JSON, CSV or .npy files and the diag(...) shorthand,
and graphs from JSON.
"""

import json
import logging
import os
import re
from typing import Any, Callable, Dict, List

import numpy as np
import pandas as pd

from errors import ParseError

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('kernel_io')

_DIAG_PATTERN = re.compile(r"^\s*diag\s*\((?P<body>.*)\)\s*$", re.IGNORECASE | re.DOTALL)


def _parse_number(value: Any, where: str) -> complex:
    """A real number, a [re, im] pair or a complex literal such as "0.5+0.1j"."""
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError("complex entries need exactly [re, im]")
            number = complex(float(value[0]), float(value[1]))
        elif isinstance(value, str):
            number = complex(value.strip().replace(" ", "").replace("i", "j"))
        elif isinstance(value, bool):
            raise ValueError("booleans are not numbers")
        else:
            number = complex(value)
    except (TypeError, ValueError) as e:
        raise ParseError(f"Invalid matrix entry at {where}: {value!r} ({str(e)})")
    if not (np.isfinite(number.real) and np.isfinite(number.imag)):
        raise ParseError(f"Non-finite matrix entry at {where}: {value!r}")
    return number


class KernelLoader:
    """Loads kernel matrices from a path or an inline diag(...) expression"""

    def __init__(self):
        """Initialize the loader"""
        self.supported_extensions: Dict[str, Callable[[str], np.ndarray]] = {
            'json': self._load_json,
            'csv': self._load_csv,
            'npy': self._load_npy,
        }

    def load(self, source: str) -> np.ndarray:
        """
        Load a kernel matrix

        Args:
            source: File path, or the shorthand "diag(a,b,...)"

        Returns:
            Square complex array (validate it with kernel.validate_kernel)
        """
        match = _DIAG_PATTERN.match(source)
        if match:
            return self._parse_diag(match.group('body'))

        if not os.path.exists(source):
            raise ParseError(f"Kernel file not found: {source}")
        _, ext = os.path.splitext(source)
        ext = ext.lower().lstrip('.')
        if ext not in self.supported_extensions:
            raise ParseError(f"Unsupported kernel file type: {ext or '(none)'}")

        logger.info(f"Loading kernel from {source}")
        matrix = self.supported_extensions[ext](source)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise ParseError(f"Kernel in {source} is not a non-empty square matrix (shape {matrix.shape})")
        return matrix

    def _parse_diag(self, body: str) -> np.ndarray:
        parts = [part for part in body.split(',') if part.strip() != '']
        if not parts:
            raise ParseError("diag(...) needs at least one entry")
        values = [_parse_number(part, f"diag position {i}") for i, part in enumerate(parts)]
        return np.diag(np.array(values, dtype=complex))

    def _load_json(self, file_path: str) -> np.ndarray:
        data = _read_json(file_path)
        if isinstance(data, dict):
            rows = data.get('entries')
            declared = data.get('n')
        else:
            rows, declared = data, None
        if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
            raise ParseError(f"{file_path}: 'entries' must be a list of rows")
        size = len(rows)
        if declared is not None and declared != size:
            raise ParseError(f"{file_path}: declared n={declared} but {size} rows given")
        matrix = np.empty((size, size), dtype=complex)
        for i, row in enumerate(rows):
            if len(row) != size:
                raise ParseError(f"{file_path}: row {i} has {len(row)} entries, expected {size}")
            for j, value in enumerate(row):
                matrix[i, j] = _parse_number(value, f"({i}, {j})")
        return matrix

    def _load_csv(self, file_path: str) -> np.ndarray:
        try:
            df = pd.read_csv(file_path, header=None, dtype=str, skipinitialspace=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise ParseError(f"Could not read CSV kernel {file_path}: {str(e)}")
        if df.isna().any().any():
            raise ParseError(f"{file_path}: missing entries in CSV kernel")
        values = [[_parse_number(v, f"({i}, {j})") for j, v in enumerate(row)] for i, row in enumerate(df.values.tolist())]
        return np.array(values, dtype=complex)

    def _load_npy(self, file_path: str) -> np.ndarray:
        try:
            matrix = np.load(file_path, allow_pickle=False)
        except (OSError, ValueError) as e:
            raise ParseError(f"Could not read {file_path}: {str(e)}")
        if not np.issubdtype(matrix.dtype, np.number):
            raise ParseError(f"{file_path}: array is not numeric")
        matrix = matrix.astype(complex)
        if not np.all(np.isfinite(matrix)):
            raise ParseError(f"{file_path}: non-finite entries")
        return matrix


def _read_json(file_path: str) -> Any:
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ParseError(f"File not found: {file_path}")
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"Invalid JSON in {file_path}: {str(e)}")


def load_kernel_matrix(source: str) -> np.ndarray:
    """Convenience wrapper around KernelLoader.load."""
    return KernelLoader().load(source)


def load_graph_spec(file_path: str) -> Dict[str, Any]:
    """
    Read a graph file {"vertices": n, "edges": [[u, v], ...]} (0-based vertices)

    Returns:
        Dict with an int 'vertices' and a list of [u, v] 'edges'
        (build the graph with experiments.SimpleGraph.from_edges)
    """
    data = _read_json(file_path)
    if not isinstance(data, dict) or 'vertices' not in data or 'edges' not in data:
        raise ParseError(f"{file_path}: graph JSON needs 'vertices' and 'edges'")
    vertices = data['vertices']
    if isinstance(vertices, bool) or not isinstance(vertices, int):
        raise ParseError(f"{file_path}: 'vertices' must be an integer")
    edges: List[List[int]] = []
    for k, edge in enumerate(data['edges']):
        if not isinstance(edge, list) or len(edge) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in edge):
            raise ParseError(f"{file_path}: edge {k} must be a pair of integers, got {edge!r}")
        edges.append([edge[0], edge[1]])
    logger.info(f"Loaded graph with {vertices} vertices and {len(edges)} edges from {file_path}")
    return {'vertices': vertices, 'edges': edges}
