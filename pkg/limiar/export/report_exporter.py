"""
CSV and JSON report writer.

The ReportExporter turns tables (header + rows) and nested report
dictionaries into files. Both formats are written atomically: the content
goes to a temporary file in the destination directory which then replaces
the target.

- CSV: the ``csv`` module with minimal quoting, CRLF line endings and a
  mandatory header row; non-finite floats become ``inf``, ``-inf``, ``nan``.
- JSON: sorted keys, two-space indent; floats keep their ``repr`` so they
  round-trip, non-finite floats become ``null``.

Identical inputs always produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np


class ExportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _plain(value: Any) -> Any:
    """Convert numpy scalars and containers to plain JSON-able values."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def _cell(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return value


class ReportExporter:
    """
    Writer for tabular (CSV) and structured (JSON) reports.
    """

    def render_csv(self, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """
        Render a table as CSV text with CRLF line endings.

        Args:
            header (Sequence[str]): Column names, always written first.
            rows (Iterable[Sequence[Any]]): Table rows.

        Returns:
            str: The CSV document.

        Raises:
            ValueError: If a row and the header differ in length.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError("row length does not match the header")
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def render_json(self, report: Any) -> str:
        """
        Render a report as sorted, indented JSON with a trailing newline.

        Non-finite floats become ``null``.

        Raises:
            TypeError: If the report holds an object JSON cannot represent.
        """
        return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def export_table(
        self,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        path: Union[str, Path],
        fmt: ExportFormat | str = ExportFormat.CSV,
    ) -> None:
        """
        Write a table as CSV, or as a JSON list of row objects.

        Args:
            header: Column names.
            rows: Rows aligned with ``header``.
            path: Destination file.
            fmt: ``csv`` or ``json``.
        """
        fmt = ExportFormat(fmt)
        if fmt is ExportFormat.CSV:
            content = self.render_csv(header, rows)
        else:
            content = self.render_json([dict(zip(header, row)) for row in rows])
        self._write(Path(path), content)

    def export_report(
        self,
        report: Any,
        path: Union[str, Path],
        fmt: ExportFormat | str = ExportFormat.JSON,
        table: tuple[Sequence[str], Iterable[Sequence[Any]]] | None = None,
    ) -> None:
        """
        Write a report dictionary as JSON; for CSV its ``table`` part is written.

        Raises:
            ValueError: If CSV is requested for a report without a table.
        """
        fmt = ExportFormat(fmt)
        if fmt is ExportFormat.JSON:
            self._write(Path(path), self.render_json(report))
            return
        if table is None:
            raise ValueError("this report has no tabular form")
        header, rows = table
        self._write(Path(path), self.render_csv(header, rows))

    def _write(self, path: Path, content: str) -> None:
        """Atomically replace ``path`` with ``content``."""
        dirpath = path.parent
        dirpath.mkdir(parents=True, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=str(dirpath), prefix=f".{path.name}.", text=True)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as tf:
                tf.write(content)
            os.replace(tmp_path, str(path))
        finally:
            if os.path.exists(tmp_path):
                try:
                    os.remove(tmp_path)
                except OSError:
                    pass
