"""
Command-line front end.

Subcommands load a system, law or matrix description (JSON, or YAML by file
extension), run one analysis and write the result. JSON results and CSV
trajectories both carry a metadata block with the tool version, seed,
tolerances and a SHA-256 digest of the inputs, so repeated runs on the same
inputs produce byte-identical files.

Exit codes:
    0  success
    1  the computed result missed its tolerance (decomposition residual,
       unreached minimum-time target)
    2  unparsable input or schema error
    3  a domain invariant or precondition failed
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from liectl import __version__
from modules.cartan import build_so_n1, build_su_n, kak_su2, kak_sun, verify_kp_decomposition
from modules.control_systems import (ControlLaw, ControlSystem, controllability_report,
                                     min_time_estimate, simulate)
from modules.exceptions import InvalidInputError, LieCtlError, SchemaError
from modules.geodesics import (geodesic_trajectory, horizontal_length, is_horizontal,
                               so21_geodesic_spec, su2_geodesic_spec, uniform_grid)
from modules.linalg_core import ComplexMatrix, matrix_from_literal
from modules.formula_checks import build_discrepancy_report
from modules.util import dump_json, file_digest, get_setting, load_document, resolve_seed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3

DECOMPOSE_TOL = {
    "su2": get_setting("kak_su2_tol", 1e-10),
    "sun": get_setting("kak_sun_tol", 1e-8),
    "so_n1": get_setting("kak_sun_tol", 1e-8),
}


def tolerances(args: argparse.Namespace) -> Dict[str, Any]:
    """The tolerances in effect for a run, as recorded in its metadata."""
    recorded = {
        name: get_setting(name)
        for name in ("rank_tol", "cartan_tol", "kak_su2_tol", "kak_sun_tol",
                     "horizontal_tol", "formula_match_tol")
    }
    recorded["tol"] = args.tol
    return recorded


def metadata(args: argparse.Namespace, seed: int, inputs: List[str]) -> Dict[str, Any]:
    return {
        "tool": "liectl",
        "version": __version__,
        "command": args.command,
        "seed": seed,
        "tolerances": tolerances(args),
        "input_digest": file_digest(inputs),
    }


def write_output(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def write_json(args: argparse.Namespace, seed: int, inputs: List[str], result: Any) -> None:
    write_output(dump_json({"metadata": metadata(args, seed, inputs), "result": result}), args.output)


def write_csv(args: argparse.Namespace, seed: int, inputs: List[str],
              rows: List[List[str]], extra: Dict[str, Any]) -> None:
    buffer = io.StringIO()
    header = dict(metadata(args, seed, inputs), **extra)
    for key in sorted(header):
        buffer.write(f"# {key}: {json.dumps(header[key], sort_keys=True)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    write_output(buffer.getvalue(), args.output)


def require(value: Optional[str], flag: str) -> str:
    if value is None:
        raise SchemaError(f"Missing required flag {flag}")
    return value


def load_matrix(path: str) -> ComplexMatrix:
    """Read a matrix literal stored either at top level or under ``"matrix"``."""
    document = load_document(path)
    return matrix_from_literal(document.get("matrix", document))


def cmd_analyze(args: argparse.Namespace, seed: int) -> int:
    path = require(args.input, "--input")
    system = ControlSystem.from_document(load_document(path))
    report = controllability_report(system)
    write_json(args, seed, [path], report.to_dict())
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace, seed: int) -> int:
    path = require(args.input, "--input")
    matrix = load_matrix(path)
    family = args.family or ("su2" if matrix.shape == (2, 2) else "sun")
    tol = args.tol if args.tol is not None else DECOMPOSE_TOL[family]

    if family == "su2":
        factors = kak_su2(matrix)
        result, residual = factors.to_dict(), factors.residual
    elif family == "sun":
        factors = kak_sun(matrix, build_su_n(matrix.shape[0]), seed=seed)
        result, residual = factors.to_dict(), factors.residual
    else:
        if matrix.shape[0] < 3:
            raise InvalidInputError("so_n1 decomposition needs at least a 3x3 matrix")
        kp = verify_kp_decomposition(matrix, build_so_n1(matrix.shape[0] - 1))
        result, residual = kp.to_dict(), kp.residual

    result["family"] = family
    result["within_tolerance"] = residual <= tol
    write_json(args, seed, [path], result)
    if residual > tol:
        logger.error(f"Decomposition residual {residual:.3g} exceeds tolerance {tol:.3g}")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_geodesic(args: argparse.Namespace, seed: int) -> int:
    family = args.family or "su2"
    if family == "su2":
        spec = su2_geodesic_spec(args.theta, args.c)
    elif family == "so_n1":
        spec = so21_geodesic_spec(args.theta, args.c)
    else:
        raise SchemaError(f"geodesic supports --family su2 or so_n1, got {family}")
    trajectory = geodesic_trajectory(spec, uniform_grid(args.horizon, args.steps))
    extra: Dict[str, Any] = {"family": family, "theta": args.theta, "c": args.c}
    if family == "su2":
        extra["length"] = horizontal_length(trajectory, spec.pair)
        extra["horizontal"] = is_horizontal(trajectory, spec.pair)
    write_csv(args, seed, [], trajectory.to_csv_rows(), extra)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, seed: int) -> int:
    path = require(args.input, "--input")
    law_path = require(args.law, "--law")
    system = ControlSystem.from_document(load_document(path))
    law = ControlLaw.from_document(load_document(law_path))
    trajectory = simulate(system, law, args.dt)
    extra = {"max_unitarity_defect": trajectory.max_unitarity_defect()}
    write_csv(args, seed, [path, law_path], trajectory.to_csv_rows(), extra)
    return EXIT_OK


def cmd_mintime(args: argparse.Namespace, seed: int) -> int:
    path = require(args.input, "--input")
    target_path = require(args.target, "--target")
    system = ControlSystem.from_document(load_document(path))
    target = load_matrix(target_path)
    result = min_time_estimate(system, target, eps=args.eps, budget=args.budget, seed=seed,
                               workers=args.workers, initial_horizon=args.horizon)
    write_json(args, seed, [path, target_path], result.to_dict())
    return EXIT_OK if result.reached else EXIT_TOLERANCE


def cmd_verify_formulas(args: argparse.Namespace, seed: int) -> int:
    entries = build_discrepancy_report(seed)
    write_json(args, seed, [], [entry.to_dict() for entry in entries])
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "geodesic": cmd_geodesic,
    "simulate": cmd_simulate,
    "mintime": cmd_mintime,
    "verify-paper": cmd_verify_formulas,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liectl",
        description="Controllability, Cartan decompositions and geodesics on matrix Lie groups.",
    )
    parser.add_argument("--version", action="version", version=f"liectl {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Analysis to run")
    parser.add_argument("-i", "--input", help="System or matrix file (JSON, or YAML by extension)")
    parser.add_argument("-o", "--output", help="Output file (default: stdout)")
    parser.add_argument("--seed", type=int, default=None,
                        help="Random seed (default: $LIECTL_SEED or the configured seed)")
    parser.add_argument("--tol", type=float, default=None, help="Override the pass tolerance")
    parser.add_argument("--workers", type=int, default=get_setting("workers", 1),
                        help="Threads for the minimum-time search")
    parser.add_argument("--family", choices=["su2", "sun", "so_n1"], default=None,
                        help="Group family for decompose / geodesic")
    parser.add_argument("--horizon", type=float, default=None,
                        help="Geodesic horizon, or initial minimum-time horizon")
    parser.add_argument("--budget", type=int, default=20_000, help="Simulation budget for mintime")
    parser.add_argument("--theta", type=float, default=0.0, help="Geodesic covector angle θ")
    parser.add_argument("--c", type=float, default=0.0, help="Geodesic covector k-component c")
    parser.add_argument("--steps", type=int, default=get_setting("geodesic_steps", 1000),
                        help="Geodesic grid intervals")
    parser.add_argument("--law", help="Control law file for simulate")
    parser.add_argument("--target", help="Target matrix file for mintime")
    parser.add_argument("--eps", type=float, default=1e-3, help="Target distance for mintime")
    parser.add_argument("--dt", type=float, default=get_setting("simulate_dt", 0.01),
                        help="Output sampling step for simulate")
    parser.add_argument("--debug", action="store_true", default=False, help="Verbose logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        The process exit code.
    """
    args = build_parser().parse_args(argv)
    debug = args.debug or bool(get_setting("debug", False))
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.horizon is None:
        args.horizon = (get_setting("geodesic_horizon", 3.0) if args.command == "geodesic"
                        else get_setting("mintime_initial_horizon", 1.0))

    try:
        seed = resolve_seed(args.seed)
        return COMMANDS[args.command](args, seed)
    except (SchemaError, InvalidInputError) as exc:
        logger.error(f"Invalid input: {exc}")
        return EXIT_SCHEMA
    except LieCtlError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
