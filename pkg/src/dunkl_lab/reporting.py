"""Flat report writers: CSV with a fixed column order and an optional JSON mirror."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, TextIO

from .base import ParameterError

logger = logging.getLogger(__name__)

CALCULUS_COLUMNS = ("generator_id", "operation", "parameter", "value", "error_estimate")


def _cell(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def render_csv(records: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """CSV text with a header row; missing cells are left empty.

    Raises:
        ParameterError: If a record carries a key outside ``columns``.
    """

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), restval="", lineterminator="\n")
    writer.writeheader()
    for record in records:
        extra = sorted(set(record) - set(columns))
        if extra:
            raise ParameterError(f"Record has columns outside the report schema: {', '.join(extra)}")
        writer.writerow({key: _cell(value) for key, value in record.items()})
    return buffer.getvalue()


def render_json(records: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """JSON array of objects whose keys follow ``columns``."""

    ordered = [{column: _cell(record.get(column, "")) for column in columns} for record in records]
    return json.dumps(ordered, indent=2) + "\n"


def write_report(
    records: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    output: Path | None = None,
    fmt: str = "csv",
    mirror: bool = False,
    stream: TextIO | None = None,
) -> list[Path]:
    """Write records to ``output`` (or ``stream``, standard output by default).

    Args:
        records: Report rows.
        columns: Column order.
        output: Destination file; ``None`` writes to ``stream``.
        fmt: ``csv`` or ``json``.
        mirror: With CSV output to a file, also write ``<output>.json``.
        stream: Target when ``output`` is ``None``.

    Returns:
        The files written.
    """

    if fmt == "csv":
        text = render_csv(records, columns)
    elif fmt == "json":
        text = render_json(records, columns)
    else:
        raise ParameterError(f"Unknown report format {fmt!r}")
    if output is None:
        (stream or sys.stdout).write(text)
        return []
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    written = [output]
    if mirror and fmt == "csv":
        twin = output.with_suffix(".json")
        twin.write_text(render_json(records, columns), encoding="utf-8")
        written.append(twin)
    logger.info("Wrote %d rows to %s", len(records), ", ".join(str(path) for path in written))
    return written


def calculus_records(records: Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Suite check records recast as calculus experiment rows.

    The subject becomes the generator id and the check error the error
    estimate; an unknown error leaves the cell empty.
    """

    rows = []
    for record in records:
        rows.append(
            {
                "generator_id": record["subject"],
                "operation": record["name"],
                "parameter": record["parameter"],
                "value": record["value"],
                "error_estimate": record.get("error", ""),
            },
        )
    return rows


__all__ = [
    "CALCULUS_COLUMNS",
    "calculus_records",
    "render_csv",
    "render_json",
    "write_report",
]
