# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import json
import math

import pandas as pd
import pytest

from sqip.harness.report import (
    MISSING,
    emit_report,
    format_error,
    format_order,
    sidecar_path,
    to_markdown,
)
from sqip.harness.study import ConvergenceReport, OutputFormat, StudyRow, fill_orders
from sqip.lib.errors import ParameterError


@pytest.fixture
def report():
    rows = [
        StudyRow(n=40, e_inf=1.08e-6, es=6.97e-7, iterations=4, residual=1e-16),
        StudyRow(n=80, e_inf=4.08e-9, es=2.26e-9, iterations=4, residual=2e-16),
        StudyRow(n=160, error="no convergence in 1 iterations"),
    ]
    fill_orders(rows)
    metadata = {"label": "test1", "method": "highorder", "variant": "Q2", "degree": 2}
    return ConvergenceReport(rows=rows, metadata=metadata)


@pytest.mark.parametrize(
    "value, text",
    [
        (4.08e-9, "4.08(-09)"),
        (1.0, "1.00(00)"),
        (6.77e-4, "6.77(-04)"),
        (2.5e12, "2.50(12)"),
        (math.nan, MISSING),
        (None, MISSING),
    ],
)
def test_format_error(value, text):
    assert format_error(value) == text


def test_format_order():
    assert format_order(8.07) == "8.1"
    assert format_order(math.nan) == MISSING


def test_markdown(report):
    text = to_markdown(report)
    lines = text.splitlines()
    assert lines[0] == "test1, highorder, Q2"
    assert "E_inf^H2" in lines[2]
    assert lines[4] == "| 40 | 1.08(-06) | - | 6.97(-07) | - |"
    assert lines[5] == "| 80 | 4.08(-09) | 8.0 | 2.26(-09) | 8.3 |"
    assert lines[6] == "| 160 | - | - | - | - |"


def test_sidecar_path():
    assert sidecar_path("out/table1.csv") == "out/table1.json"
    assert sidecar_path("table1") == "table1.json"


def test_emit_csv(report, tmp_path):
    path = tmp_path / "runs" / "table.csv"
    meta_path = emit_report(report, str(path))
    df = pd.read_csv(path)
    assert list(df["n"]) == [40, 80, 160]
    assert df["E_inf"].iloc[1] == pytest.approx(4.08e-9)
    assert df["E_inf"].isna().iloc[2]
    with open(meta_path) as f:
        assert json.load(f)["variant"] == "Q2"
    assert [p.name for p in path.parent.iterdir() if p.name.startswith(".tmp-")] == []


def test_emit_markdown_without_metadata(report, tmp_path):
    path = tmp_path / "table.md"
    assert emit_report(report, str(path), OutputFormat.MARKDOWN, metadata=False) is None
    assert path.read_text() == to_markdown(report)
    assert not (tmp_path / "table.json").exists()


def test_empty_report_rejected(tmp_path):
    with pytest.raises(ParameterError):
        emit_report(ConvergenceReport(rows=[], metadata={}), str(tmp_path / "x.csv"))


def test_csv_line_count(report, tmp_path):
    report.rows = report.rows[:2]
    path = tmp_path / "two.csv"
    emit_report(report, str(path), metadata=False)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0] == "n,E_inf,O_inf,ES,O_ES,iters,residual"
    assert lines[1].split(",")[2] == ""
