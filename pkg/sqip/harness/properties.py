# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Invariant checks across all modules, run as one pass/fail suite."""

import dataclasses
import enum
import logging
import math
import time
from typing import Callable, List, Optional, Sequence

import numpy as np

from sqip.harness.study import StudySpec, empirical_order, run_study
from sqip.integration.operator import (
    apply_K,
    apply_Kprime,
    knot_quadrature,
)
from sqip.integration.quadrature import composite_integrate, gauss_rule
from sqip.lib.errors import SqipError
from sqip.problems.catalog import closed_form_integral, make_test1
from sqip.solvers.linalg import dense_solve
from sqip.solvers.newton import Method
from sqip.splines.bspline import Spline, build_space
from sqip.splines.quasi_interp import (
    QipScheme,
    QipVariant,
    apply_qip,
    build_qip,
    norm_estimate,
    projector_defect,
)

logger = logging.getLogger(__name__)

SchemeHook = Callable[[QipScheme], QipScheme]

SHIPPED_VARIANTS = (QipVariant.Q2, QipVariant.Q2dB, QipVariant.Q3)


class Level(enum.Enum):
    QUICK = "quick"
    FULL = "full"


@dataclasses.dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.value:.4g} (threshold {self.threshold:.4g})"
        return f"{text} {self.detail}".rstrip()


@dataclasses.dataclass
class PropertySummary:
    level: Level
    checks: List[CheckResult]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]


def _at_most(name, value, threshold, detail="") -> CheckResult:
    return CheckResult(name, bool(value <= threshold), float(value), threshold, detail)


def _at_least(name, value, threshold, detail="") -> CheckResult:
    return CheckResult(name, bool(value >= threshold), float(value), threshold, detail)


def _orders(errors: Sequence[float]) -> List[float]:
    return [empirical_order(a, b) for a, b in zip(errors, errors[1:])]


def _finest_orders(errors: Sequence[float], pairs: int = 2) -> float:
    orders = _orders(errors)[-pairs:]
    return min(orders) if orders else math.nan


def _scheme(variant: QipVariant, n: int, hook: Optional[SchemeHook]) -> QipScheme:
    scheme = build_qip(build_space(variant.degree, n), variant)
    return hook(scheme) if hook else scheme


def _qip_errors(variant: QipVariant, n_list, hook=None):
    """Max, integral and node errors of pi_n exp for every n."""
    t = np.linspace(0.0, 1.0, 1000)
    rule = gauss_rule(20)
    max_err, integral_err, node_err = [], [], []
    for n in n_list:
        scheme = _scheme(variant, n, hook)
        projected = apply_qip(scheme, scheme.node_set.sample(np.exp))
        max_err.append(float(np.max(np.abs(projected(t) - np.exp(t)))))
        integral = composite_integrate(
            lambda s: np.exp(s) * (projected(np.clip(s, 0.0, 1.0)) - np.exp(s)),
            scheme.space.grid.knots,
            rule,
        )
        integral_err.append(abs(integral))
        xi = scheme.node_set.values
        node_err.append(float(np.max(np.abs(projected(xi) - np.exp(xi)))))
    return max_err, integral_err, node_err


def check_projectors(n_list, hook=None) -> List[CheckResult]:
    checks = []
    for variant in (QipVariant.Q1,) + SHIPPED_VARIANTS:
        for n in n_list:
            checks.append(
                _at_most(
                    f"projector_defect[{variant.name}, n={n}]",
                    projector_defect(_scheme(variant, n, hook)),
                    1e-12,
                )
            )
    return checks


def check_spline_reproduction(n: int = 16, hook=None) -> List[CheckResult]:
    rng = np.random.default_rng(0)
    t = np.linspace(0.0, 1.0, 500)
    checks = []
    for variant in SHIPPED_VARIANTS:
        scheme = _scheme(variant, n, hook)
        worst = 0.0
        for _ in range(20):
            spline = Spline(scheme.space, rng.standard_normal(scheme.space.dimension))
            projected = apply_qip(scheme, scheme.node_set.sample(spline))
            scale = 1.0 + float(np.max(np.abs(spline(t))))
            worst = max(worst, float(np.max(np.abs(projected(t) - spline(t)))) / scale)
        checks.append(_at_most(f"spline_reproduction[{variant.name}, n={n}]", worst, 1e-11))
    return checks


def check_qip_orders(n_list, hook=None, report_tables: bool = False) -> List[CheckResult]:
    checks = []
    for variant in SHIPPED_VARIANTS:
        d = variant.degree
        max_err, integral_err, node_err = _qip_errors(variant, n_list, hook)
        if report_tables:
            for n, e, o in zip(n_list, max_err, [math.nan] + _orders(max_err)):
                logger.info(
                    "pi_n order table %s: n=%d, error %.3e, order %.2f",
                    variant.name,
                    n,
                    e,
                    o,
                )
        checks.append(
            _at_least(f"approximation_order[{variant.name}]", _finest_orders(max_err), d + 0.7)
        )
        if d % 2 == 0:
            checks.append(
                _at_least(
                    f"integral_superconvergence[{variant.name}]",
                    _finest_orders(integral_err),
                    d + 1.7,
                )
            )
        if d == 2:
            checks.append(
                _at_least(
                    f"node_superconvergence[{variant.name}]",
                    _finest_orders(node_err),
                    3.7,
                )
            )
    return checks


def check_norm_bounded(n_list=(16, 64, 320), hook=None) -> List[CheckResult]:
    checks = []
    for variant in SHIPPED_VARIANTS:
        # same sample positions inside every cell, whatever n
        estimates = [
            norm_estimate(_scheme(variant, n, hook), samples=32 * n + 1) for n in n_list
        ]
        spread = (max(estimates) - min(estimates)) / min(estimates)
        checks.append(
            _at_least(f"norm_estimate_at_least_one[{variant.name}]", min(estimates), 1.0 - 1e-12)
        )
        checks.append(
            _at_most(
                f"norm_estimate_uniform[{variant.name}]",
                spread,
                0.1,
                "estimates " + ", ".join(f"{e:.3f}" for e in estimates),
            )
        )
    return checks


def check_quadrature() -> List[CheckResult]:
    worst = 0.0
    for m in (2, 5, 20):
        rule = gauss_rule(m)
        for k in range(2 * m):
            exact = (1.0 - (-1.0) ** (k + 1)) / (k + 1)
            value = float(np.sum(rule.weights * rule.nodes**k))
            worst = max(worst, abs(value - exact) / max(abs(exact), 1.0))
    rule = gauss_rule(20)
    whole = composite_integrate(np.exp, np.linspace(0.0, 1.0, 11), rule)
    split = composite_integrate(np.exp, [0.0, 0.3], rule) + composite_integrate(
        np.exp, [0.3, 1.0], rule
    )
    return [
        _at_most("gauss_exactness", worst, 1e-13),
        _at_most("quadrature_additivity", abs(whole - split), 1e-14),
    ]


def check_dense_solve() -> List[CheckResult]:
    rng = np.random.default_rng(1)
    M = rng.standard_normal((50, 50)) + 50.0 * np.eye(50)
    b = rng.standard_normal(50)
    x = dense_solve(M, b)
    return [_at_most("dense_solve_residual", float(np.max(np.abs(M @ x - b))), 1e-11)]


def check_operator() -> List[CheckResult]:
    problem = make_test1()
    rule = gauss_rule(20)
    grid = build_space(2, 16).grid
    s = np.linspace(0.0, 1.0, 7)

    def x(t):
        return np.cos(3.0 * t)

    def h1(t):
        return np.exp(t)

    def h2(t):
        return t * t

    combined = apply_Kprime(problem, x, lambda t: 2.0 * h1(t) - 3.0 * h2(t), s, rule, grid)
    separate = 2.0 * apply_Kprime(problem, x, h1, s, rule, grid) - 3.0 * apply_Kprime(
        problem, x, h2, s, rule, grid
    )

    def remainder(eps):
        shifted = apply_K(problem, lambda t: x(t) + eps * h1(t), s, rule, grid)
        return float(
            np.max(
                np.abs(
                    shifted
                    - apply_K(problem, x, s, rule, grid)
                    - eps * apply_Kprime(problem, x, h1, s, rule, grid)
                )
            )
        )

    ratio = remainder(1e-3) / remainder(1e-4)
    return [
        _at_most("kprime_linearity", float(np.max(np.abs(combined - separate))), 1e-13),
        CheckResult("frechet_remainder_ratio", 100.0 / 3 <= ratio <= 300.0, ratio, 100.0),
    ]


def check_test2_rhs() -> List[CheckResult]:
    quad = knot_quadrature(128, 20)
    worst = 0.0
    for c in (0.1, 1.0):
        for s in (0.0, 0.5, 1.0):
            t = quad.points
            numeric = float(quad.integrate((t + c) / ((t + c) * (t + s) + 1.0)))
            worst = max(worst, abs(numeric - float(closed_form_integral(s, c))))
    return [_at_most("test2_closed_form", worst, 1e-13)]


def check_small_solve() -> List[CheckResult]:
    report = run_study(
        StudySpec(
            problem="test2",
            c=1.0,
            method=Method.HIGHORDER,
            qip=QipVariant.Q3,
            n_list=(4, 8),
        )
    )
    return [_at_most("test2_Q3_highorder_n8", report.rows[-1].e_inf, 1e-10)]


def check_method_orders() -> List[CheckResult]:
    checks = []
    for method, order, node_order in (
        (Method.COLLOCATION, 2.6, 3.6),
        (Method.HIGHORDER, 6.4, 7.4),
    ):
        report = run_study(
            StudySpec(problem="test1", method=method, qip=QipVariant.Q2, n_list=(40, 80, 160))
        )
        e_inf = [row.e_inf for row in report.rows]
        es = [row.es for row in report.rows]
        checks.append(_at_least(f"method_order[{method.value}, Q2]", _finest_orders(e_inf), order))
        checks.append(_at_least(f"node_order[{method.value}, Q2]", _finest_orders(es), node_order))
    return checks


def run_property_suite(
    level: Level = Level.QUICK, scheme_hook: Optional[SchemeHook] = None
) -> PropertySummary:
    """Run every invariant check; `scheme_hook` rewrites each built scheme (fault injection)."""
    level = Level(level)
    start = time.time()
    full = level == Level.FULL
    defect_n = (16, 64, 256) if full else (16, 64)
    order_n = (32, 64, 128, 256) if full else (16, 32, 64)
    sections = [
        ("projectors", lambda: check_projectors(defect_n, scheme_hook)),
        ("spline_reproduction", lambda: check_spline_reproduction(16, scheme_hook)),
        ("qip_orders", lambda: check_qip_orders(order_n, scheme_hook, report_tables=full)),
        ("norm_bounded", lambda: check_norm_bounded(hook=scheme_hook)),
        ("quadrature", check_quadrature),
        ("dense_solve", check_dense_solve),
        ("operator", check_operator),
        ("test2_rhs", check_test2_rhs),
        ("small_solve", check_small_solve),
    ]
    if full:
        sections.append(("method_orders", check_method_orders))
    checks: List[CheckResult] = []
    for name, section in sections:
        try:
            results = section()
        except SqipError as e:
            results = [CheckResult(name, False, math.nan, math.nan, f"raised {e}")]
        for check in results:
            log = logger.info if check.passed else logger.error
            log("%s", check)
        checks.extend(results)
    summary = PropertySummary(level=level, checks=checks, wall_time=time.time() - start)
    logger.info(
        "%d/%d checks passed in %.1fs",
        sum(c.passed for c in checks),
        len(checks),
        summary.wall_time,
    )
    return summary
