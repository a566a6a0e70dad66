"""Rank-based scoring of competing models across qualitative criteria.

Each criterion ranks ``n`` models from 1 (best) to ``n``; a rank ``r`` earns
``n + 1 - r`` points, points are summed per model and the totals are
normalized into posterior weights.  Tied ranks are scored as given.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, EmptyInput, InvalidRank


@dataclass(frozen=True)
class RankingTable:
    models: tuple[str, ...]
    criteria: tuple[str, ...]
    ranks: np.ndarray            # (n_models, n_criteria) integer ranks

    def __post_init__(self):
        ranks = np.asarray(self.ranks)
        if ranks.shape != (len(self.models), len(self.criteria)):
            raise InvalidRank(f"rank matrix {ranks.shape} does not match "
                              f"{len(self.models)} models x {len(self.criteria)} criteria")
        if not len(self.models) or not len(self.criteria):
            raise EmptyInput("ranking table needs at least one model and one criterion")
        if len(set(self.models)) != len(self.models):
            raise InvalidRank("model names must be unique")
        if not np.issubdtype(ranks.dtype, np.integer):
            if not np.all(np.equal(np.mod(ranks, 1), 0)):
                raise InvalidRank("ranks must be integers")
            ranks = ranks.astype(int)
        n = len(self.models)
        if ranks.min() < 1 or ranks.max() > n:
            raise InvalidRank(f"ranks must lie in 1..{n}")
        ranks = ranks.copy()
        ranks.setflags(write=False)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "ranks", ranks)


def load_table(path: str | Path) -> RankingTable:
    """Read a CSV with a header ``model,<criterion>,...`` and one row per model."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise EmptyInput(f"{path}: no model rows")
    header, body = rows[0], rows[1:]
    criteria = [c.strip() for c in header[1:]]
    models, ranks = [], []
    for row in body:
        if len(row) != len(header):
            raise ConfigError(f"{path}: row {row[0]!r} has {len(row)} fields, expected {len(header)}")
        models.append(row[0].strip())
        try:
            ranks.append([int(c) for c in row[1:]])
        except ValueError:
            raise InvalidRank(f"{path}: non-integer rank in row {row[0]!r}") from None
    return RankingTable(tuple(models), tuple(criteria), np.array(ranks, dtype=int))


def default_table() -> RankingTable:
    """The shipped six-model, four-criterion ranking."""
    with resources.as_file(resources.files("dowsim") / "data" / "table2.csv") as path:
        return load_table(path)


def scores_from_ranks(table: RankingTable) -> dict[str, int]:
    n = len(table.models)
    points = (n + 1 - table.ranks).sum(axis=1)
    return {m: int(p) for m, p in zip(table.models, points)}


def posteriors(scores: Mapping[str, float] | Sequence[float]) -> dict | np.ndarray:
    """Normalize positive scores into weights summing to one.

    A mapping gives a mapping back; a sequence gives an array.
    """
    keys = list(scores) if isinstance(scores, Mapping) else None
    values = np.asarray([scores[k] for k in keys] if keys is not None else list(scores), dtype=float)
    if values.size == 0:
        raise EmptyInput("no scores given")
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise InvalidRank("scores must be positive and finite")
    p = values / values.sum()
    return dict(zip(keys, p.tolist())) if keys is not None else p
