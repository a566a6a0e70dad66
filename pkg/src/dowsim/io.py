"""Deterministic writers for tables, summaries and grayscale heatmaps.

Tables are written with a fixed column order and 17 significant digits so
that runs with equal inputs produce byte-identical files.  Wall-clock data
goes to a separate metadata file that is outside that guarantee.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import re
import time
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (tuple, list, np.ndarray)):
        return " ".join(format_value(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_table(path: Path, columns: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write rows as CSV (default) or as a JSON list of records; returns the path written."""
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [list(r) for r in rows]
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([format_value(v) for v in r])
    elif fmt == "json":
        records = [dict(zip(columns, (_jsonable(v) for v in r))) for r in rows]
        path.write_text(json.dumps(records, indent=1) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    return path


def write_json(path: Path, data: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_metadata(out: Path, command: str, started: float, threads: int) -> Path:
    return write_json(Path(out) / "metadata.json", {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": threads,
        "started_unix": started,
        "elapsed_s": time.time() - started,
    })


def to_gray(image: np.ndarray) -> np.ndarray:
    """Scale a non-negative 2D array to 8-bit gray, maximum mapped to 255."""
    a = np.asarray(image, dtype=float)
    top = a.max() if a.size else 0.0
    if not top > 0:
        return np.zeros(a.shape, dtype=np.uint8)
    return np.clip(np.rint(255.0 * a / top), 0, 255).astype(np.uint8)


def write_pgm(path: Path, image: np.ndarray) -> Path:
    """Binary PGM (P5) of ``image``; rows are axis 1 reversed so that y points up."""
    gray = to_gray(np.atleast_2d(image))
    if gray.ndim != 2:
        raise ValueError("heatmaps need a 1D or 2D array")
    if np.ndim(image) == 2:
        gray = gray.T[::-1]
    h, w = gray.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(gray).tobytes())
    return path


def read_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM")
    w, h, top = (int(g) for g in m.groups())
    if top != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    return np.frombuffer(data[m.end(): m.end() + w * h], dtype=np.uint8).reshape(h, w)
