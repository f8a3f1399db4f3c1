"""JSON reading and writing with full-precision floats.

Matrices are stored as ``{"n": n, "re": [...], "im": [...]}`` with row-major
real and imaginary parts.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import NotHermitianError
from .hermitian import HERMITIAN_ATOL, as_hermitian


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def dumps(obj, indent: int | None = 2, _level: int = 0) -> str:
    """Serialize like :func:`json.dumps`, but with every float at 17 significant digits.

    Non-finite floats become ``null``. Lists of scalars are kept on one line.
    """
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + pad + (sep + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps(v, indent, _level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(items) + "]"
        return "[" + pad + (sep + pad).join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def matrix_to_dict(M) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    n = M.shape[0]
    return {"n": n, "re": M.real.ravel().tolist(), "im": M.imag.ravel().tolist()}


def matrix_from_dict(data: dict, hermitian: bool = True) -> np.ndarray:
    """Parse the matrix format; Hermitian input is validated to ``1e-12`` asymmetry."""
    try:
        n = int(data["n"])
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data.get("im", np.zeros(n * n)), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if n < 1 or re.shape != (n * n,) or im.shape != (n * n,):
        raise ValueError(f"matrix JSON expects n >= 1 and n^2 = {n * n} entries in 're' and 'im'")
    M = (re + 1j * im).reshape(n, n)
    if hermitian:
        return as_hermitian(M, atol=HERMITIAN_ATOL)
    if not np.all(np.isfinite(M)):
        raise NotHermitianError("matrix has non-finite entries")
    return M


def write_matrix(path, M) -> None:
    Path(path).write_text(dumps(matrix_to_dict(M)) + "\n")


def read_matrix(path, hermitian: bool = True) -> np.ndarray:
    with open(path) as fh:
        data = json.load(fh)
    return matrix_from_dict(data, hermitian=hermitian)
