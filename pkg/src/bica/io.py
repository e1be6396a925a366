"""CSV matrix files and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile

import numpy as np


class InputError(ValueError):
    """Unreadable or malformed input file (CLI exit code 2)."""


def _atomic_write_text(path, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_row(values) -> str:
    return ",".join(format(float(v), ".17g") for v in values)


def write_matrix(path, mat, header: bool = False):
    """Rows = components, columns = samples; 17 significant digits."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    lines = []
    if header:
        lines.append(",".join(f"c{j}" for j in range(mat.shape[1])))
    lines.extend(format_row(row) for row in mat)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_table(path, columns, rows):
    lines = [",".join(columns)]
    lines.extend(format_row(r) for r in rows)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Parse a numeric CSV matrix, reporting line/column of the first bad field."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    rows = []
    width = None
    with fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            row = []
            for col, field in enumerate(fields, start=1):
                try:
                    v = float(field)
                except ValueError:
                    raise InputError(
                        f"{path}:{lineno}:{col}: cannot parse {field.strip()!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise InputError(f"{path}:{lineno}:{col}: non-finite value {field.strip()!r}")
                row.append(v)
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError(
                    f"{path}:{lineno}: expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, manifest: dict):
    _atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: cannot read manifest ({exc})") from None
