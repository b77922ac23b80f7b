"""Strict CSV ingestion for load series and small CSV writers."""

from __future__ import annotations

import csv
import math
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ArtifactError, DataError
from .series import DEFAULT_SAMPLING_PERIOD, TimeSeries


TIME_NAMES = {"timestamp", "time", "datetime", "date", "settlementdate"}


def _parse_time(text: str) -> datetime:
    # AEMO exports use "2020/01/01 00:30:00"
    return datetime.fromisoformat(text.strip().replace("/", "-"))


def read_series(
    path,
    value_col: Optional[str] = None,
    time_col: Optional[str] = None,
    sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD,
) -> TimeSeries:
    """Load one series from a headed, UTF-8, comma-separated file.

    ``time_col`` is picked up automatically when exactly one header is a
    common timestamp name (timestamp, time, datetime, date, settlementdate).
    ``value_col`` defaults to the only remaining column. Empty or non-numeric cells are rejected with the offending
    line number; nothing is imputed.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if time_col is None:
            named = [h for h in header if h.lower() in TIME_NAMES and h != value_col]
            if len(named) == 1:
                time_col = named[0]
        if value_col is None:
            candidates = [h for h in header if h != time_col]
            if len(candidates) != 1:
                raise DataError(
                    f"{path}: cannot infer the value column from {header}; pass value_col"
                )
            value_col = candidates[0]
        for col in (value_col, time_col):
            if col is not None and col not in header:
                raise DataError(f"{path}: column {col!r} not in header {header}")
        vi = header.index(value_col)
        ti = header.index(time_col) if time_col is not None else None

        values, stamps = [], []
        for row_no, row in enumerate(reader, start=1):
            line = row_no + 1
            if not row or all(not c.strip() for c in row):
                raise DataError(f"{path}: row {row_no} (line {line}) is empty")
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_no} (line {line}) has {len(row)} fields, expected {len(header)}"
                )
            cell = row[vi].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {row_no} (line {line}): {value_col}={cell!r} is not a number"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {row_no} (line {line}): non-finite value {cell!r}")
            values.append(v)
            if ti is not None:
                try:
                    stamps.append(_parse_time(row[ti]))
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no} (line {line}): bad timestamp {row[ti]!r}"
                    ) from None
    if not values:
        raise DataError(f"{path}: no data rows")
    return TimeSeries(values, tuple(stamps) if ti is not None else None, sampling_period)


def write_series(path, series: TimeSeries, value_col: str = "load", time_col: str = "timestamp") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if series.timestamps is None:
            writer.writerow([value_col])
            writer.writerows([[repr(float(v))] for v in series.values])
        else:
            writer.writerow([time_col, value_col])
            for ts, v in zip(series.timestamps, series.values):
                writer.writerow([ts.isoformat(sep=" "), repr(float(v))])


def write_table(path, header, rows) -> None:
    """Write rows with floats in round-trip ``repr`` form."""
    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return v

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_error_matrix(path):
    """Read a ``dataset, model1, model2, ...`` table; returns (errors[models, datasets], models, datasets)."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one dataset row")
    models = [h.strip() for h in rows[0][1:]]
    datasets, data = [], []
    for row_no, row in enumerate(rows[1:], start=1):
        if len(row) != len(rows[0]):
            raise DataError(
                f"{path}: row {row_no} has {len(row)} fields, expected {len(rows[0])} (ragged matrix)"
            )
        datasets.append(row[0].strip())
        try:
            data.append([float(c) for c in row[1:]])
        except ValueError:
            raise DataError(f"{path}: row {row_no} contains a non-numeric error value") from None
    return np.array(data).T, models, datasets
