"""Byte-reproducible writers for CSV matrices and JSON reports.

Files are written to a temporary sibling and moved into place with
``os.replace`` so an interrupted run never leaves a partial artifact.
"""

import json
import os
import tempfile
from contextlib import contextmanager
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

FLOAT_FORMAT = ".17g"


def format_float(x: float) -> str:
    """Locale-free float text with 17 significant digits."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, FLOAT_FORMAT)


@contextmanager
def atomic_write(path: str, mode: str = "w"):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def _to_builtin(obj: Any) -> Any:
    if hasattr(obj, "to_json"):
        return _to_builtin(obj.to_json())
    if hasattr(obj, "_asdict"):
        return _to_builtin(obj._asdict())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        # JSON has no inf/nan; keep them readable and reproducible
        if np.isnan(x) or np.isinf(x):
            return format_float(x)
        return x
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(_to_builtin(obj), indent=2) + "\n"


def write_json(path: str, obj: Any) -> str:
    with atomic_write(path) as f:
        f.write(dumps_json(obj))
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return format_float(v)
        return str(v)

    with atomic_write(path) as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(cell(v) for v in row) + "\n")
    return path


def write_matrix_csv(path: str, u_grid: Sequence[float], matrix: np.ndarray) -> str:
    """Write an ``n_replicates x len(u_grid)`` matrix with ``u=<value>`` headers."""
    header = [f"u={format_float(u)}" for u in u_grid]
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return write_csv(path, header, matrix.tolist())


def dumps_line(obj: Any) -> str:
    """Compact single-line JSON for the stdout run summary."""
    return json.dumps(_to_builtin(obj), separators=(",", ":"))
