#!/usr/bin/env python3
# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Command line entry point: study | properties | dump-qip."""

import argparse
import logging
import sys
from typing import Optional

from sqip.harness.properties import Level, run_property_suite
from sqip.harness.report import emit_report, to_markdown
from sqip.harness.study import OutputFormat, StudySpec, run_study
from sqip.lib.errors import ParameterError, SqipError
from sqip.lib.util import atomic_write, call_using_args, read_key_value_file
from sqip.splines.bspline import build_space
from sqip.splines.quasi_interp import QipVariant, build_qip, dump_stencils, projector_defect

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

logging.basicConfig(
    format="%(asctime)s %(levelname)-8s %(message)s",
    level=logging.WARNING,
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger("sqip.cli")
logger.setLevel(logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqip", description=__doc__)
    parser.add_argument(
        "--verbose", action="store_true", help="Debug logging for the sqip package"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    study_parser = subparsers.add_parser("study", help="Run a convergence study")
    study_group = study_parser.add_argument_group("Study")
    StudySpec.add_arguments(study_group)

    properties_parser = subparsers.add_parser("properties", help="Run the invariant suite")
    properties_group = properties_parser.add_argument_group("Properties")
    properties_group.add_argument(
        "--level", default=Level.QUICK.value, choices=[level.value for level in Level]
    )

    dump_parser = subparsers.add_parser("dump-qip", help="Write QIP stencils as CSV")
    dump_group = dump_parser.add_argument_group("Scheme")
    dump_group.add_argument("--qip", default=QipVariant.Q2.name, choices=[v.name for v in QipVariant])
    dump_group.add_argument("--n", type=int, default=16)
    dump_group.add_argument(
        "--degree", type=int, help="Must match the variant's degree if given"
    )
    dump_group.add_argument("--out", help="CSV path; logged if unset")
    return parser


STUDY_KEYS = (
    "problem",
    "c",
    "method",
    "qip",
    "n_list",
    "seed_policy",
    "damping",
    "tol",
    "max_iter",
    "quad_points",
    "grid_size",
    "workers",
    "format",
    "out",
)


def study_spec_from_args(args: argparse.Namespace) -> StudySpec:
    """Config file values first, explicit flags on top."""
    config = {}
    if args.config:
        config.update(read_key_value_file(args.config))
    for key in STUDY_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return StudySpec.from_config(config)


def run_study_command(args) -> int:
    spec = study_spec_from_args(args)
    report = run_study(spec)
    if spec.out:
        emit_report(report, spec.out, spec.format)
        if spec.format == OutputFormat.CSV:
            with open(spec.out, "r") as f:
                logger.info("Convergence study:\n%s", f.read())
    elif spec.format == OutputFormat.MARKDOWN:
        logger.info("Convergence study:\n%s", to_markdown(report))
    else:
        logger.info("Convergence study:\n%s", report.to_dataframe().to_csv(index=False))
    if report.failed:
        logger.error("Failed rows: n=%s", report.metadata["failed_rows"])
        return EXIT_FAILURE
    return EXIT_OK


def run_properties_command(args) -> int:
    summary = run_property_suite(Level(args.level))
    if not summary.passed:
        logger.error("Failed checks: %s", ", ".join(summary.failures))
        return EXIT_FAILURE
    return EXIT_OK


def dump_qip(qip: str, n: int, degree: Optional[int] = None, out: Optional[str] = None):
    variant = QipVariant.parse(qip)
    if degree is not None and degree != variant.degree:
        raise ParameterError(
            f"--degree {degree} does not match {variant.name} (degree {variant.degree})"
        )
    scheme = build_qip(build_space(variant.degree, n), variant)
    logger.info("%s, n=%d: projector defect %.3e", variant.name, n, projector_defect(scheme))
    df = dump_stencils(scheme)
    if out:
        with atomic_write(out) as f:
            df.to_csv(f, index=False)
        logger.info("Wrote %d stencil entries to %s", len(df), out)
    else:
        logger.info("Stencils:\n%s", df.to_csv(index=False))
    return df


def run_dump_command(args) -> int:
    call_using_args(dump_qip, args)
    return EXIT_OK


COMMANDS = {
    "study": run_study_command,
    "properties": run_properties_command,
    "dump-qip": run_dump_command,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger("sqip").setLevel(logging.DEBUG)
    else:
        logging.getLogger("sqip").setLevel(logging.INFO)
    try:
        return COMMANDS[args.command](args)
    except ParameterError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (SqipError, OSError) as e:
        logger.error("%s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
