"""Delimited-text ingestion of annual series and summary files."""
from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path

from .errors import DataError
from .model import EconomySummary
from .moments import AnnualSeries

REQUIRED = "consumption"
OPTIONAL = ("equity_return", "rf_return", "dividends")
LEVEL_COLUMNS = ("consumption", "dividends")


class SeriesFormatError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(message)


def detect_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def _parse_number(text: str, decimal: str) -> float:
    text = text.strip()
    if decimal != ".":
        text = text.replace(decimal, ".")
    return float(text)


def _parse_label(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return text


def load_series(path, delimiter: str | None = None, decimal: str = ".") -> AnnualSeries:
    """Read an annual series from a delimited file with a header row.

    Columns are matched by (case-insensitive) header name; unknown columns
    are ignored.  Data rows are numbered from 1 in diagnostics.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SeriesFormatError(f"{path}: empty file")
    if delimiter is None:
        delimiter = detect_delimiter(lines[0])
    if decimal == delimiter:
        raise DataError("decimal mark and delimiter must differ")
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    if REQUIRED not in header:
        raise SeriesFormatError(f"{path}: required column {REQUIRED!r} is missing", column=REQUIRED)
    index = {name: header.index(name) for name in ("year", REQUIRED, *OPTIONAL) if name in header}

    cols = {name: [] for name in index}
    for row_no, row in enumerate(reader, start=1):
        if len(row) != len(header):
            raise SeriesFormatError(
                f"{path}: row {row_no} has {len(row)} fields, header has {len(header)}",
                row=row_no)
        for name, j in index.items():
            cell = row[j]
            if name == "year":
                cols[name].append(_parse_label(cell))
                continue
            try:
                value = _parse_number(cell, decimal)
            except ValueError:
                raise SeriesFormatError(
                    f"{path}: row {row_no}, column {name!r}: {cell!r} is not a number",
                    row=row_no, column=name) from None
            if not math.isfinite(value) or value <= 0:
                why = ("zero consumption is never optimal" if name == "consumption"
                       else "values must be positive")
                raise SeriesFormatError(
                    f"{path}: row {row_no}, column {name!r}: non-positive value {cell.strip()!r} ({why})",
                    row=row_no, column=name)
            cols[name].append(value)

    n = len(cols[REQUIRED])
    if n < 2:
        raise SeriesFormatError(f"{path}: need at least 2 data rows, found {n}")
    periods = cols.pop("year", None)
    if periods is not None:
        for i in range(1, n):
            try:
                ok = periods[i] > periods[i - 1]
            except TypeError:
                ok = False
            if not ok:
                raise SeriesFormatError(
                    f"{path}: row {i + 1}, column 'year': labels must be strictly increasing",
                    row=i + 1, column="year")
    return AnnualSeries.from_columns(cols.pop(REQUIRED), periods, **cols)


def load_summary(path) -> EconomySummary:
    """Read an EconomySummary from a JSON object with the five Table-1 fields."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read summary {path}: {exc}") from exc
    fields = ("mean_equity_return", "risk_free_rate", "mean_growth", "sd_growth")
    missing = [f for f in fields if f not in data]
    if missing:
        raise DataError(f"summary {path} is missing {', '.join(missing)}")
    try:
        return EconomySummary(*(float(data[f]) for f in fields),
                              mean_premium=data.get("mean_premium"))
    except (TypeError, ValueError) as exc:
        raise DataError(f"summary {path}: {exc}") from exc


def fixture_path(name: str = "table1_series.csv") -> Path:
    return Path(str(resources.files("ccapm") / "data" / name))
