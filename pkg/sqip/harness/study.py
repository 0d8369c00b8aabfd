# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Convergence studies: solve for each n, measure errors and empirical orders."""

import argparse
import dataclasses
import datetime
import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from sqip.integration.quadrature import DEFAULT_POINTS, MAX_POINTS, gauss_rule
from sqip.lib.errors import ParameterError, SqipError
from sqip.lib.util import parse_bool, parse_int_list
from sqip.problems.catalog import ProblemCatalogEntry, make_problem, problem_ids
from sqip.solvers.collocation import solve_collocation
from sqip.solvers.highorder import solve_highorder
from sqip.solvers.newton import Method, NewtonConfig, SeedPolicy
from sqip.splines.bspline import Spline, build_space
from sqip.splines.quasi_interp import QipVariant, build_qip

logger = logging.getLogger(__name__)

GRID_SIZE = 1500
REPORT_COLUMNS = ["n", "E_inf", "O_inf", "ES", "O_ES", "iters", "residual"]


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    MARKDOWN = "markdown"


def _parse_enum(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    text = str(value).strip()
    for member in enum_cls:
        if text.lower() in (member.name.lower(), str(member.value).lower()):
            return member
    raise ParameterError(
        f"invalid {enum_cls.__name__} {value!r}; expected one of "
        f"{[m.name.lower() for m in enum_cls]}"
    )


def _parse_variant(value) -> QipVariant:
    return value if isinstance(value, QipVariant) else QipVariant.parse(value)


@dataclasses.dataclass(frozen=True)
class StudySpec:
    problem: str = "test1"
    c: Optional[float] = None
    method: Method = Method.HIGHORDER
    qip: QipVariant = QipVariant.Q2
    n_list: Tuple[int, ...] = (40, 80, 160)
    # None: the catalog entry decides
    seed_policy: Optional[SeedPolicy] = None
    damping: Optional[bool] = None
    tol: float = 1e-14
    max_iter: int = 50
    quad_points: int = DEFAULT_POINTS
    grid_size: int = GRID_SIZE
    workers: int = 1
    format: OutputFormat = OutputFormat.CSV
    out: Optional[str] = None

    def __post_init__(self):
        n_list = tuple(int(n) for n in self.n_list)
        object.__setattr__(self, "n_list", n_list)
        if not n_list:
            raise ParameterError("n_list is empty")
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ParameterError(f"n_list must be strictly increasing, got {n_list}")
        if n_list[0] < self.qip.degree + 1:
            raise ParameterError(
                f"n must be >= {self.qip.degree + 1} for {self.qip.name}, got {n_list[0]}"
            )
        if self.problem not in problem_ids():
            raise ParameterError(
                f"unknown problem {self.problem!r}; expected one of {problem_ids()}"
            )
        if not 1 <= self.quad_points <= MAX_POINTS:
            raise ParameterError(
                f"quad_points must be in 1..{MAX_POINTS}, got {self.quad_points}"
            )
        if self.grid_size < 2:
            raise ParameterError(f"grid_size must be >= 2, got {self.grid_size}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "StudySpec":
        """Build from a flat mapping of (possibly string) values."""
        converters = {
            "problem": str,
            "c": float,
            "method": lambda v: _parse_enum(Method, v),
            "qip": _parse_variant,
            "n_list": lambda v: parse_int_list(v) if isinstance(v, str) else list(v),
            "seed_policy": lambda v: _parse_enum(SeedPolicy, v),
            "damping": lambda v: v if isinstance(v, bool) else parse_bool(v),
            "tol": float,
            "max_iter": int,
            "quad_points": int,
            "grid_size": int,
            "workers": int,
            "format": lambda v: _parse_enum(OutputFormat, v),
            "out": str,
        }
        kwargs = {}
        for key, value in config.items():
            if value is None:
                continue
            if key not in converters:
                raise ParameterError(f"unknown study setting {key!r}")
            try:
                kwargs[key] = converters[key](value)
            except (ValueError, argparse.ArgumentTypeError) as e:
                raise ParameterError(f"invalid value for {key}: {e}")
        return cls(**kwargs)

    @classmethod
    def add_arguments(cls, parser):
        """Study flags; every default is None so config files can fill gaps."""
        parser.add_argument("--config", help="key = value file with study settings")
        parser.add_argument("--problem", choices=problem_ids())
        parser.add_argument("--c", type=float, help="test2 parameter c > 0")
        parser.add_argument("--method", choices=[m.value for m in Method])
        parser.add_argument("--qip", choices=[v.name for v in QipVariant])
        parser.add_argument("--n-list", "--n_list", dest="n_list", type=parse_int_list)
        parser.add_argument(
            "--seed-policy",
            "--seed_policy",
            dest="seed_policy",
            choices=[p.value for p in SeedPolicy if p != SeedPolicy.CUSTOM],
        )
        parser.add_argument("--damping", type=parse_bool)
        parser.add_argument("--tol", type=float)
        parser.add_argument("--max-iter", "--max_iter", dest="max_iter", type=int)
        parser.add_argument("--quad-points", "--quad_points", dest="quad_points", type=int)
        parser.add_argument("--grid-size", "--grid_size", dest="grid_size", type=int)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--format", choices=[f.value for f in OutputFormat])
        parser.add_argument("--out", help="report path; CSV goes to stdout log if unset")

    def problem_parameters(self) -> Dict[str, float]:
        return {} if self.c is None else {"c": self.c}

    def newton_config(self, entry: ProblemCatalogEntry) -> NewtonConfig:
        return NewtonConfig(
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.seed_policy or entry.seed_policy,
            damping=entry.damping if self.damping is None else self.damping,
        )


@dataclasses.dataclass
class StudyRow:
    n: int
    e_inf: float = math.nan
    es: float = math.nan
    iterations: Optional[int] = None
    residual: float = math.nan
    wall_time: float = 0.0
    error: Optional[str] = None
    o_inf: float = math.nan
    o_es: float = math.nan

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclasses.dataclass
class ConvergenceReport:
    rows: List[StudyRow]
    metadata: Dict[str, Any]

    @property
    def failed(self) -> bool:
        return any(row.failed for row in self.rows)

    def to_dataframe(self) -> pd.DataFrame:
        records = [
            {
                "n": row.n,
                "E_inf": row.e_inf,
                "O_inf": row.o_inf,
                "ES": row.es,
                "O_ES": row.o_es,
                "iters": row.iterations,
                "residual": row.residual,
            }
            for row in self.rows
        ]
        df = pd.DataFrame(records, columns=REPORT_COLUMNS)
        df["iters"] = df["iters"].astype("Int64")
        return df


def empirical_order(previous: float, current: float) -> float:
    """log2(previous / current); NaN if either error is unusable."""
    if not (previous > 0 and current > 0) or not (
        math.isfinite(previous) and math.isfinite(current)
    ):
        return math.nan
    return math.log2(previous / current)


def fill_orders(rows: List[StudyRow]):
    for prev, row in zip(rows, rows[1:]):
        row.o_inf = empirical_order(prev.e_inf, row.e_inf)
        row.o_es = empirical_order(prev.es, row.es)


def evaluation_grid(size: int = GRID_SIZE) -> np.ndarray:
    """`size` equally spaced points including both endpoints."""
    return np.linspace(0.0, 1.0, size)


def _run_row(spec: StudySpec, entry: ProblemCatalogEntry, n: int) -> StudyRow:
    problem = entry.problem
    rule = gauss_rule(spec.quad_points)
    cfg = spec.newton_config(entry)
    grid = evaluation_grid(spec.grid_size)
    start = time.time()
    try:
        space = build_space(spec.qip.degree, n)
        scheme = build_qip(space, spec.qip)
        if spec.method == Method.COLLOCATION:
            result = solve_collocation(problem, space, scheme, cfg, rule)
            approx = Spline(space, result.coefficients)
        else:
            result, approx = solve_highorder(problem, space, scheme, cfg, rule)
        xi = scheme.node_set.values
        e_inf = float(np.max(np.abs(problem.exact_solution(grid) - approx(grid))))
        es = float(np.max(np.abs(problem.exact_solution(xi) - approx(xi))))
    except SqipError as e:
        logger.error("n=%d failed: %s", n, e)
        return StudyRow(n=n, wall_time=time.time() - start, error=str(e))
    row = StudyRow(
        n=n,
        e_inf=e_inf,
        es=es,
        iterations=result.iterations,
        residual=result.residual,
        wall_time=time.time() - start,
    )
    logger.info(
        "n=%d: E_inf %.3e, ES %.3e, %d iterations, %.1fs",
        n,
        row.e_inf,
        row.es,
        row.iterations,
        row.wall_time,
    )
    return row


def run_study(spec: StudySpec) -> ConvergenceReport:
    entry = make_problem(spec.problem, **spec.problem_parameters())
    if entry.problem.exact_solution is None:
        raise ParameterError(f"{entry.problem.label} has no exact solution to measure against")
    cfg = spec.newton_config(entry)
    logger.info(
        "Study %s, %s, %s, n=%s, seed %s%s",
        entry.problem.label,
        spec.method.value,
        spec.qip.name,
        spec.n_list,
        cfg.seed.value,
        " (damped)" if cfg.damping else "",
    )
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda n: _run_row(spec, entry, n), spec.n_list))
    else:
        rows = [_run_row(spec, entry, n) for n in spec.n_list]
    fill_orders(rows)
    for row in rows[1:]:
        if not row.failed:
            logger.info("n=%d: O_inf %.2f, O_ES %.2f", row.n, row.o_inf, row.o_es)
    metadata = {
        "problem": spec.problem,
        "label": entry.problem.label,
        "parameters": entry.parameters,
        "method": spec.method.value,
        "variant": spec.qip.name,
        "degree": spec.qip.degree,
        "n_list": list(spec.n_list),
        "quad_points": spec.quad_points,
        "grid_size": spec.grid_size,
        "seed_policy": cfg.seed.value,
        "damping": cfg.damping,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "failed_rows": [row.n for row in rows if row.failed],
        "timestamp": datetime.datetime.now().isoformat(timespec="seconds"),
    }
    return ConvergenceReport(rows=rows, metadata=metadata)
