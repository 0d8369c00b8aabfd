# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import pytest

from sqip.harness.properties import (
    Level,
    check_dense_solve,
    check_norm_bounded,
    check_operator,
    check_projectors,
    check_quadrature,
    check_small_solve,
    check_spline_reproduction,
    check_test2_rhs,
    run_property_suite,
)


def _perturb(scheme):
    return scheme.perturbed(3, 0, 1e-3)


@pytest.mark.parametrize(
    "check",
    [check_quadrature, check_dense_solve, check_operator, check_test2_rhs],
)
def test_standalone_checks_pass(check):
    results = check()
    assert results
    assert all(result.passed for result in results), [str(r) for r in results]


def test_projector_checks():
    assert all(r.passed for r in check_projectors((16,)))
    assert all(r.passed for r in check_spline_reproduction(8))
    assert all(r.passed for r in check_norm_bounded((16, 32)))


def test_perturbed_scheme_is_caught():
    results = check_projectors((16,), hook=_perturb)
    assert results and not any(r.passed for r in results)
    assert not all(r.passed for r in check_spline_reproduction(8, hook=_perturb))


def test_check_result_text():
    result = check_projectors((8,))[0]
    assert str(result).startswith("PASS projector_defect[Q1, n=8]")


def test_small_solve_check():
    assert all(r.passed for r in check_small_solve())


@pytest.mark.slow
def test_quick_suite_passes():
    summary = run_property_suite(Level.QUICK)
    assert summary.passed, summary.failures


@pytest.mark.slow
def test_quick_suite_fails_under_fault_injection():
    summary = run_property_suite("quick", scheme_hook=_perturb)
    assert not summary.passed
    assert any(name.startswith("projector_defect") for name in summary.failures)
