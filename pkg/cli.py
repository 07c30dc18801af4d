"""
Command-line interface for the DPP engine
Every subcommand prints one JSON document on stdout; logs and errors go to stderr.
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from config import (
    STRICT_CONTRACTION_TOL,
    get_default_seed,
    get_fock_cap_small,
    get_log_file,
    get_log_level,
    get_replicate_stride,
)
from counts import count_distribution
from errors import DPPError, InvalidArgument
from experiments import (
    Arc,
    SimpleGraph,
    arc_count_experiment,
    haar_unitary,
    ust_compare,
)
from fock import janossy_identity_gap, key_identity_gap, rotated_kernel_gap
from helpers import as_subset, parse_subset
from kernel import HermitianKernel, spectral_decompose, validate_kernel
from kernel_io import load_graph_spec, load_kernel_matrix
from measure import (
    complement_pmf_discrepancy,
    elementary_probability,
    full_pmf,
    inclusion_probability,
    janossy_weight,
    void_probability,
)
from report_formatter import ReportFormatter
from sampler import SamplerConfig, replicate_generator, sample_batch

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger('cli')


def configure_logging(quiet: bool = False) -> None:
    """Send logs to stderr (and DPP_LOG_FILE when set); stdout stays JSON-only."""
    level = logging.WARNING if quiet else getattr(logging, get_log_level(), logging.INFO)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = get_log_file()
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def _load_kernel(source: str) -> HermitianKernel:
    return validate_kernel(load_kernel_matrix(source))


def _sampler_config(seed: Optional[int]) -> SamplerConfig:
    return SamplerConfig(seed=get_default_seed() if seed is None else seed,
                         replicate_stride=get_replicate_stride())


def cmd_validate(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    spec = spectral_decompose(K)
    return {
        "valid": True,
        "n": K.n,
        "clip_magnitude": K.clip_magnitude,
        "eigenvalues": spec.eigenvalues,
        "expected_count": float(np.sum(spec.eigenvalues)),
    }


def cmd_prob(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    subset = as_subset(parse_subset(args.subset), K.n)
    modes = {
        "inclusion": inclusion_probability,
        "elementary": elementary_probability,
        "void": void_probability,
        "janossy": janossy_weight,
    }
    value = modes[args.mode](K, subset)
    return {"value": value}


def cmd_pmf(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    return ReportFormatter().pmf_report(full_pmf(K))


def cmd_sample(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    config = _sampler_config(args.seed)
    histogram = sample_batch(spectral_decompose(K), args.draws, config)
    return ReportFormatter().histogram_report(histogram)


def cmd_counts(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    subset = as_subset(parse_subset(args.subset), K.n) if args.subset is not None else tuple(range(K.n))
    report = ReportFormatter().count_report(count_distribution(K, subset))
    report["subset"] = subset
    return report


def _basis(n: int, kind: str, seed: int) -> np.ndarray:
    if kind == "identity":
        return np.eye(n, dtype=complex)
    return haar_unitary(n, replicate_generator(SamplerConfig(seed=seed), 0))


def cmd_fock_check(args: argparse.Namespace) -> Dict[str, Any]:
    K = _load_kernel(args.kernel)
    spec = spectral_decompose(K)
    W = _basis(K.n, args.basis, args.basis_seed)
    max_m = args.m if args.m is not None else min(2, K.n)
    if max_m < 1 or max_m > K.n:
        raise InvalidArgument(f"--m must lie in [1, {K.n}], got {max_m}")

    report: Dict[str, Any] = {
        "n": K.n,
        "basis": args.basis,
        "basis_seed": args.basis_seed if args.basis == "random" else None,
        "rotated_kernel_gap": rotated_kernel_gap(K, W),
        "complement_discrepancy": complement_pmf_discrepancy(K),
    }
    if K.n <= get_fock_cap_small():
        report["key_identity_gaps"] = {str(m): key_identity_gap(spec, m) for m in range(1, max_m + 1)}
        if float(spec.eigenvalues[0]) < 1.0 - STRICT_CONTRACTION_TOL:
            report["janossy_identity_gaps"] = {str(m): janossy_identity_gap(spec, m) for m in range(1, max_m + 1)}
    else:
        logger.info(f"Skipping tensor identities: n={K.n} exceeds fock_cap_small={get_fock_cap_small()}")
    return report


def cmd_experiment_cue(args: argparse.Namespace) -> Dict[str, Any]:
    arc = Arc(length=args.arc_length if args.arc_length is not None else math.pi, center=args.arc_center)
    return arc_count_experiment(args.n, arc, args.replicates, _sampler_config(args.seed))


def cmd_experiment_ust(args: argparse.Namespace) -> Dict[str, Any]:
    spec = load_graph_spec(args.graph)
    graph = SimpleGraph.from_edges(spec["vertices"], spec["edges"])
    return ust_compare(graph, args.draws, _sampler_config(args.seed))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpp", description="Exact computations and sampling for finite determinantal point processes")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    parser.add_argument("--output", help="Write the JSON result to this file instead of stdout")
    # Also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="Only log warnings and errors")
    common.add_argument("--output", default=argparse.SUPPRESS, help="Write the JSON result to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="Validate a kernel and print its spectrum")
    p.add_argument("--kernel", required=True, help="Kernel file (.json, .csv, .npy) or diag(a,b,...)")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("prob", parents=[common], help="Probability of a subset event")
    p.add_argument("--kernel", required=True)
    p.add_argument("--subset", required=True, help='Comma separated indices, e.g. "0,2"')
    p.add_argument("--mode", choices=["inclusion", "elementary", "void", "janossy"], default="inclusion")
    p.set_defaults(handler=cmd_prob)

    p = sub.add_parser("pmf", parents=[common], help="Exact pmf over all subsets")
    p.add_argument("--kernel", required=True)
    p.set_defaults(handler=cmd_pmf)

    p = sub.add_parser("sample", parents=[common], help="Histogram of exact samples")
    p.add_argument("--kernel", required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("counts", parents=[common], help="Law of the number of points in a subset")
    p.add_argument("--kernel", required=True)
    p.add_argument("--subset", default=None, help="Defaults to the whole ground set")
    p.set_defaults(handler=cmd_counts)

    p = sub.add_parser("fock-check", parents=[common], help="Check the Fock-space identities for a kernel")
    p.add_argument("--kernel", required=True)
    p.add_argument("--m", type=int, default=None, help="Largest particle number for the tensor identities")
    p.add_argument("--basis", choices=["random", "identity"], default="random")
    p.add_argument("--basis-seed", type=int, default=0)
    p.set_defaults(handler=cmd_fock_check)

    p = sub.add_parser("experiment", parents=[common], help="Monte Carlo experiments")
    experiments = p.add_subparsers(dest="experiment", required=True)

    e = experiments.add_parser("cue", parents=[common], help="Eigenangle counts of Haar unitaries in an arc")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--arc-length", type=float, default=None, help="Radians (default pi)")
    e.add_argument("--arc-center", type=float, default=0.0)
    e.add_argument("--replicates", type=int, default=2000)
    e.add_argument("--seed", type=int, default=None)
    e.set_defaults(handler=cmd_experiment_cue)

    e = experiments.add_parser("ust", parents=[common], help="Spanning-tree DPP against Wilson's algorithm")
    e.add_argument("--graph", required=True, help='JSON {"vertices": n, "edges": [[u, v], ...]}')
    e.add_argument("--draws", type=int, required=True)
    e.add_argument("--seed", type=int, default=None)
    e.set_defaults(handler=cmd_experiment_ust)

    return parser


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one CLI invocation

    Args:
        argv: Arguments without the program name (default sys.argv[1:])

    Returns:
        Exit code: 0 success, 1 domain or numerical error, 2 input error, 3 resource cap
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on malformed flags and 0 on --help
        return int(e.code or 0)

    configure_logging(args.quiet)
    try:
        report = args.handler(args)
        _emit(ReportFormatter().to_json(report), args.output)
        return 0
    except DPPError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        sys.stderr.write(json.dumps({"error": "IOError", "message": str(e)}) + "\n")
        return 2
    except Exception as e:
        logger.exception(f"Unexpected error: {str(e)}")
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 1


def main() -> None:
    sys.exit(run())
