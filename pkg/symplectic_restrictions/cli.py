"""Command-line interface.

    python -m symplectic_restrictions basis --germ U7
    python -m symplectic_restrictions action-table --germ U8 --format md
    python -m symplectic_restrictions classify --germ U7 --coeffs 1,3,0,1,0,0,0
    python -m symplectic_restrictions invariants --germ U9 --class 6
    python -m symplectic_restrictions invariants --scene scene.json
    python -m symplectic_restrictions verify --family all

Exit codes: 0 success, 1 verification mismatch, 2 input or parse error,
3 bound exhausted.
"""

import argparse
import logging
import sys
from typing import List, Optional

from symplectic_restrictions import __version__
from symplectic_restrictions.commands import (
    action_table_report,
    basis_report,
    class_invariants_report,
    classify_report,
    scene_invariants_report,
    verify_report,
)
from symplectic_restrictions.config import configure_logging
from symplectic_restrictions.errors import ParseError, RestrictionError
from symplectic_restrictions.models import Report, load_scene_file
from symplectic_restrictions.rendering import render_markdown

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symplectic-restrictions",
        description="Algebraic restrictions and symplectic invariants of quasi-homogeneous curve germs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "md"), default="json", help="output format")
    common.add_argument("--record", action="store_true", help="store the report in the report database")
    common.add_argument("--degree-bound", type=int, default=None, help="truncation quasi-degree D")

    sub = parser.add_subparsers(dest="command", required=True)

    basis = sub.add_parser("basis", parents=[common], help="bases of [Λ²] and [Z²]")
    basis.add_argument("--germ", required=True, help="U7, U8, U9 or a germ file")

    table = sub.add_parser("action-table", parents=[common], help="infinitesimal actions of tangent fields")
    table.add_argument("--germ", required=True, help="U7, U8, U9 or a germ file")

    classify = sub.add_parser("classify", parents=[common], help="normal form of a closed restriction")
    classify.add_argument("--germ", required=True, help="U7, U8, U9 or a germ file")
    classify.add_argument("--coeffs", required=True, help="comma separated coefficients on θ1, θ2, ...")

    invariants = sub.add_parser("invariants", parents=[common], help="invariants of a class or a scene")
    target = invariants.add_mutually_exclusive_group(required=True)
    target.add_argument("--germ", help="U7, U8 or U9, together with --class")
    target.add_argument("--scene", help="scene file")
    invariants.add_argument("--class", dest="label", help="class index, e.g. 3,0_inf")
    invariants.add_argument("--moduli", default=None, help="comma separated moduli; seeded values when omitted")
    invariants.add_argument("--sign", type=int, choices=(1, -1), default=1, help="sign of a ± normal form")
    invariants.add_argument("--ceiling", type=int, default=None, help="tangency search ceiling")
    invariants.add_argument("--seed", type=int, default=None)

    verify = sub.add_parser("verify", parents=[common], help="recompute every stored table cell")
    verify.add_argument("--family", default="all", help="U7, U8, U9 or all")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--workers", type=int, default=None)
    verify.add_argument("--golden", default=None, help="directory with replacement table files")
    return parser


def run_command(args: argparse.Namespace) -> Report:
    if args.command == "basis":
        return basis_report(args.germ, args.degree_bound)
    if args.command == "action-table":
        return action_table_report(args.germ, args.degree_bound)
    if args.command == "classify":
        return classify_report(args.germ, args.coeffs, args.degree_bound)
    if args.command == "invariants":
        if args.scene:
            return scene_invariants_report(load_scene_file(args.scene), args.ceiling, args.degree_bound)
        if not args.label:
            raise ParseError("--class is required with --germ")
        return class_invariants_report(
            args.germ, args.label, args.moduli, args.sign, args.degree_bound, args.ceiling, args.seed
        )
    return verify_report(args.family, args.seed, args.workers, args.golden, args.degree_bound)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        report = run_command(args)
    except RestrictionError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code

    if args.record:
        from symplectic_restrictions.database import get_db_manager

        report_id = get_db_manager().save_report(report)
        logger.info("stored report %d", report_id)
    print(render_markdown(report) if args.format == "md" else report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
