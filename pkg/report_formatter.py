"""
Report Formatting Module for the DPP engine
Turns results into JSON-ready dicts and serializes them deterministically
"""

import json
import logging
import math
from typing import Any, Dict, Optional

import numpy as np

from counts import PoissonBinomial
from helpers import format_subset
from measure import ExactPmf
from sampler import SampleHistogram

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('report_formatter')


class ReportFormatter:
    """
    Converts engine results into plain JSON values

    Subset keys become "0,2,3" strings, numpy scalars and arrays become Python
    numbers and lists, and non-finite floats become null. Key order is kept as
    built (Fock order for subset tables), so equal inputs give identical bytes.
    """

    def normalize(self, value: Any) -> Any:
        if isinstance(value, dict):
            return {self._key(k): self.normalize(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self.normalize(v) for v in value]
        if isinstance(value, np.ndarray):
            return [self.normalize(v) for v in value.tolist()]
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            return value if math.isfinite(value) else None
        if isinstance(value, (complex, np.complexfloating)):
            return [self.normalize(value.real), self.normalize(value.imag)]
        return value

    def _key(self, key: Any) -> str:
        if isinstance(key, tuple):
            return format_subset(key)
        return str(key)

    def to_json(self, report: Dict[str, Any]) -> str:
        """
        Serialize a report

        Floats are written with Python's shortest round-trip repr, so every value
        parses back to the identical double.
        """
        return json.dumps(self.normalize(report), allow_nan=False, ensure_ascii=True)

    def pmf_report(self, pmf: ExactPmf) -> Dict[str, Any]:
        return {
            "n": pmf.n,
            "total": pmf.total(),
            "probabilities": dict(pmf.probabilities),
            "cardinality_marginal": pmf.cardinality_marginal(),
        }

    def histogram_report(self, histogram: SampleHistogram,
                         tv_distance: Optional[float] = None) -> Dict[str, Any]:
        report: Dict[str, Any] = {
            "n": histogram.n,
            "draws": histogram.draws,
            "seed": histogram.seed,
            "counts": dict(histogram.counts),
            "cardinality_counts": histogram.cardinality_counts(),
        }
        if tv_distance is not None:
            report["tv_distance"] = tv_distance
        return report

    def count_report(self, pb: PoissonBinomial) -> Dict[str, Any]:
        return {
            "lambdas": np.sort(pb.lambdas)[::-1],
            "pmf": pb.pmf,
            "mean": pb.mean,
            "variance": pb.variance,
        }


def format_report(report: Dict[str, Any]) -> str:
    """Convenience function: serialize a report with a default ReportFormatter."""
    return ReportFormatter().to_json(report)
