"""Reading kernels, weights and start measures from CSV / JSON files.

CSV kernels are ``n`` lines of ``n`` comma-separated probabilities. JSON
kernels are objects ``{"n": int, "rows": [[...]], "v": [...], "labels": [...]}``
where ``v`` and ``labels`` are optional. Files are read as UTF-8.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .core import Kernel, LyapunovWeight, Measure, StateSpace
from .errors import HarrisError


class InputError(HarrisError):
    """Unreadable or malformed input file."""


@dataclass(frozen=True, eq=False)
class LoadedKernel:
    kernel: Kernel
    V: Optional[LyapunovWeight]
    source: str
    row_sum_max_dev: float


def _parse_csv_rows(text: str, where: str) -> List[List[float]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        row = []
        for col, field in enumerate(line.split(","), start=1):
            try:
                row.append(float(field))
            except ValueError:
                raise InputError(f"{where}: line {lineno}, column {col}: cannot parse {field.strip()!r}") from None
        rows.append(row)
    if not rows:
        raise InputError(f"{where}: no data")
    return rows


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _load_json(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _build(rows, where: str, V=None, labels=None) -> LoadedKernel:
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() != len(rows):
        raise InputError(f"{where}: kernel must be square, got {len(rows)} rows of widths {sorted({len(r) for r in rows})}")
    P = np.asarray(rows, dtype=float)
    dev = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
    space = StateSpace(P.shape[0], tuple(labels) if labels is not None else None)
    try:
        k = Kernel(P, space)
        w = None if V is None else LyapunovWeight(np.asarray(V, dtype=float))
    except HarrisError as exc:
        raise InputError(f"{where}: {exc}") from None
    if w is not None and w.n != k.n:
        raise InputError(f"{where}: v has {w.n} entries for {k.n} states")
    return LoadedKernel(k, w, where, dev)


def read_kernel(path: str) -> LoadedKernel:
    text = _read_text(path)
    if path.lower().endswith(".json"):
        obj = _load_json(text, path)
        if not isinstance(obj, dict) or "rows" not in obj:
            raise InputError(f"{path}: expected an object with a 'rows' array")
        rows = obj["rows"]
        if "n" in obj and obj["n"] != len(rows):
            raise InputError(f"{path}: n = {obj['n']} but {len(rows)} rows given")
        try:
            rows = [[float(v) for v in r] for r in rows]
        except (TypeError, ValueError) as exc:
            raise InputError(f"{path}: non-numeric entry in rows ({exc})") from None
        return _build(rows, path, obj.get("v"), obj.get("labels"))
    return _build(_parse_csv_rows(text, path), path)


def read_vector(source: str, n: int, what: str = "V") -> np.ndarray:
    """A vector given inline (``"1,2,3"``) or as a CSV / JSON file."""
    if Path(source).is_file():
        text = _read_text(source)
        if source.lower().endswith(".json"):
            obj = _load_json(text, source)
            if isinstance(obj, dict):
                obj = obj.get("v", obj.get("values"))
            values = np.asarray(obj, dtype=float).ravel()
        else:
            values = np.asarray([x for row in _parse_csv_rows(text, source) for x in row])
    else:
        if "," not in source and not _is_number(source):
            raise InputError(f"{what}: no such file {source!r}")
        values = np.asarray(_parse_csv_rows(source, f"inline {what}")[0])
    if values.size != n:
        raise InputError(f"{what} has {values.size} entries, expected {n}")
    return values


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_measure(source: str, n: int) -> Measure:
    """``"uniform"``, ``"delta:<i>"``, or a vector as accepted by :func:`read_vector`."""
    try:
        if source == "uniform":
            return Measure.uniform(n)
        if source.startswith("delta:"):
            return Measure.delta(n, int(source.split(":", 1)[1]))
        return Measure(read_vector(source, n, "mu0"))
    except (ValueError, HarrisError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"mu0 {source!r}: {exc}") from None


def parse_indices(source: str, n: int) -> Tuple[int, ...]:
    try:
        out = tuple(int(s) for s in source.split(",") if s.strip())
    except ValueError:
        raise InputError(f"state set {source!r} must be comma-separated integers") from None
    if not out or min(out) < 0 or max(out) >= n:
        raise InputError(f"state set {source!r} must be nonempty indices in 0..{n - 1}")
    return out
