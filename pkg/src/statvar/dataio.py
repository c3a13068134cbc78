"""CSV reading/writing and reversible preprocessing.

CSV dialect: comma separated, '.' decimal, mandatory header row, UTF-8.
Writes go to a temporary file in the target directory followed by an
atomic rename, so readers never observe partial output.
"""

from __future__ import annotations

import csv
import os
import tempfile

import numpy as np

from .errors import BadCsv, ConfigInvalid


def read_csv(path: str) -> tuple[list, np.ndarray]:
    """Read a numeric CSV with a header row; returns (names, array)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise BadCsv(f"{path}: empty file")
            rows = list(reader)
    except OSError as exc:
        raise BadCsv(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise BadCsv(f"{path}: no data rows")
    try:
        data = np.array([[float(c) for c in row] for row in rows if row])
    except ValueError as exc:
        raise BadCsv(f"{path}: non-numeric cell ({exc})") from exc
    if data.shape[1] != len(header):
        raise BadCsv(f"{path}: row width does not match header")
    return [h.strip() for h in header], data


def write_csv(path: str, header: list, rows) -> None:
    """Write rows atomically; floats serialised with shortest round-trip repr."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(c) for c in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(c):
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    return c


def preprocess(data: np.ndarray, difference: int = 0, log_columns=(),
               standardise: bool = False) -> tuple[np.ndarray, dict]:
    """Log-transform chosen columns, difference, then standardise.

    Returns the processed array and a metadata dict sufficient to invert
    the transformation (see :func:`undo_preprocessing`).
    """
    data = np.asarray(data, dtype=float)
    if difference not in (0, 1, 2):
        raise ConfigInvalid("difference must be 0, 1 or 2")
    log_columns = sorted(set(int(c) for c in log_columns))
    out = data.copy()
    meta = {"difference": difference, "log_columns": log_columns,
            "standardise": bool(standardise), "initials": []}
    for c in log_columns:
        if np.any(out[:, c] <= 0):
            raise ConfigInvalid(f"column {c} has non-positive values; cannot log")
        out[:, c] = np.log(out[:, c])
    for _ in range(difference):
        meta["initials"].append(out[0].tolist())
        out = np.diff(out, axis=0)
    if standardise:
        means = out.mean(axis=0)
        sds = out.std(axis=0, ddof=1)
        if np.any(sds == 0):
            raise ConfigInvalid("constant column cannot be standardised")
        out = (out - means) / sds
        meta["means"] = means.tolist()
        meta["sds"] = sds.tolist()
    return out, meta


def undo_preprocessing(processed: np.ndarray, meta: dict) -> np.ndarray:
    """Invert :func:`preprocess`; also re-integrates appended forecast rows."""
    out = np.asarray(processed, dtype=float).copy()
    if meta.get("standardise"):
        out = out * np.asarray(meta["sds"]) + np.asarray(meta["means"])
    for initial in reversed(meta.get("initials", [])):
        out = np.vstack([np.asarray(initial), out]).cumsum(axis=0)
    for c in meta.get("log_columns", []):
        out[:, c] = np.exp(out[:, c])
    return out
