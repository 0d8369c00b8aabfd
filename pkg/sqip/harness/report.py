# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import json
import logging
import math
import os
from typing import List, Optional

from sqip.harness.study import ConvergenceReport, OutputFormat
from sqip.lib.errors import ParameterError
from sqip.lib.util import atomic_write

logger = logging.getLogger(__name__)

MISSING = "-"


def format_error(value: float) -> str:
    """Mantissa(exponent) notation with 3 significant digits: 4.08e-9 -> 4.08(-09)."""
    if value is None or not math.isfinite(value):
        return MISSING
    mantissa, exponent = f"{value:.2e}".split("e")
    return f"{mantissa}({int(exponent):+03d})".replace("(+", "(")


def format_order(value: float) -> str:
    if value is None or not math.isfinite(value):
        return MISSING
    return f"{value:.1f}"


def to_markdown(report: ConvergenceReport) -> str:
    meta = report.metadata
    method = "H" if meta.get("method") == "highorder" else "C"
    d = meta.get("degree", "")
    header = [
        "n",
        f"E_inf^{method}{d}",
        "O_inf",
        f"ES^{method}{d}",
        "O",
    ]
    lines: List[str] = [
        f"{meta.get('label', '')}, {meta.get('method', '')}, {meta.get('variant', '')}",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in report.rows:
        if row.failed:
            cells = [str(row.n), MISSING, MISSING, MISSING, MISSING]
        else:
            cells = [
                str(row.n),
                format_error(row.e_inf),
                format_order(row.o_inf),
                format_error(row.es),
                format_order(row.o_es),
            ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def sidecar_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def emit_report(
    report: ConvergenceReport,
    path: str,
    format: OutputFormat = OutputFormat.CSV,
    metadata: bool = True,
) -> Optional[str]:
    """Write the report atomically; metadata goes to a JSON file next to it.

    Returns the path of the metadata file, if one was written.
    """
    if not report.rows:
        raise ParameterError("refusing to write an empty report")
    format = OutputFormat(format)
    with atomic_write(path) as f:
        if format == OutputFormat.CSV:
            report.to_dataframe().to_csv(f, index=False)
        else:
            f.write(to_markdown(report))
    logger.info("Wrote %s report to %s", format.value, path)
    if not metadata:
        return None
    meta_path = sidecar_path(path)
    with atomic_write(meta_path) as f:
        json.dump(report.metadata, f, indent=2, sort_keys=True)
        f.write("\n")
    return meta_path
