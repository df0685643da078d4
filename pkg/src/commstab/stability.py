"""Agreement between partitions of non-equal unit sets.

Scores are computed on the units present in both partitions; units present
in only one of them are reported as incomers or outgoers. The default
scorer is the chance-adjusted pair-counting (Hubert-Arabie) index; any
callable taking a :class:`ContingencyTable` can stand in for it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .netmodel import Partition

__all__ = [
    "ContingencyTable",
    "RandResult",
    "StabilitySeries",
    "AGGREGATES",
    "contingency",
    "adjusted_rand",
    "modified_rand",
    "rand_detail",
    "stability_series",
]

AGGREGATES = ("consecutive-mean", "all-pairs-mean", "min")


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    shared_units: tuple[str, ...]
    row_clusters: tuple[int, ...]
    col_clusters: tuple[int, ...]
    counts: np.ndarray
    outgoers: tuple[str, ...]  # only in the first partition
    incomers: tuple[str, ...]  # only in the second partition

    @property
    def n(self) -> int:
        return len(self.shared_units)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def contingency(p1: Partition, p2: Partition) -> ContingencyTable:
    """Cross-tabulate two partitions over their shared units (in ``p1`` order)."""
    a1, a2 = p1.assignment, p2.assignment
    shared = tuple(u for u in p1.units if u in a2)
    if len(shared) < 2:
        raise ValueError(f"partitions share {len(shared)} unit(s); at least 2 are required")
    rows = tuple(sorted({a1[u] for u in shared}))
    cols = tuple(sorted({a2[u] for u in shared}))
    ri = {c: i for i, c in enumerate(rows)}
    ci = {c: i for i, c in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for u in shared:
        counts[ri[a1[u]], ci[a2[u]]] += 1
    return ContingencyTable(
        shared_units=shared,
        row_clusters=rows,
        col_clusters=cols,
        counts=counts,
        outgoers=tuple(u for u in p1.units if u not in a2),
        incomers=tuple(u for u in p2.units if u not in a1),
    )


def _pairs(x) -> int:
    x = int(x)
    return x * (x - 1) // 2


@dataclass(frozen=True)
class RandResult:
    score: float
    degenerate: bool
    n_shared: int
    outgoers: tuple[str, ...]
    incomers: tuple[str, ...]


def _adjusted(table: ContingencyTable) -> tuple[float, bool]:
    index = sum(_pairs(v) for v in table.counts.ravel())
    a = sum(_pairs(v) for v in table.row_sums)
    b = sum(_pairs(v) for v in table.col_sums)
    expected = Fraction(a * b, _pairs(table.n))
    denom = Fraction(a + b, 2) - expected
    if denom == 0:
        # only when both sides are all-one-cluster or all-singletons
        return 1.0, True
    return float((index - expected) / denom), False


def adjusted_rand(table: ContingencyTable) -> float:
    """Chance-adjusted Rand index of a contingency table, exact arithmetic."""
    return _adjusted(table)[0]


Scorer = Callable[[ContingencyTable], float]


def rand_detail(p1: Partition, p2: Partition, scorer: Scorer | None = None) -> RandResult:
    table = contingency(p1, p2)
    if scorer is None:
        score, degenerate = _adjusted(table)
    else:
        score, degenerate = float(scorer(table)), False
    return RandResult(score, degenerate, table.n, table.outgoers, table.incomers)


def modified_rand(p1: Partition, p2: Partition, scorer: Scorer | None = None) -> float:
    """Stability score of two partitions over possibly different unit sets.

    1 for identical restricted partitions, about 0 for independent ones.
    """
    return rand_detail(p1, p2, scorer).score


@dataclass(frozen=True, eq=False)
class StabilitySeries:
    matrix: np.ndarray
    series: float
    aggregate: str

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "series": float(self.series),
        }


def stability_series(
    partitions: Sequence[Partition],
    aggregate: str = "consecutive-mean",
    scorer: Scorer | None = None,
) -> StabilitySeries:
    """Pairwise score matrix and a single series score.

    ``consecutive-mean`` averages periods (1,2), (2,3), ...; ``all-pairs-mean``
    averages every pair; ``min`` takes the worst pair.
    """
    m = len(partitions)
    if m < 2:
        raise ValueError("at least 2 partitions are required")
    if aggregate not in AGGREGATES:
        raise ValueError(f"aggregate must be one of {AGGREGATES}, got {aggregate!r}")
    mat = np.eye(m)
    for i, j in combinations(range(m), 2):
        mat[i, j] = mat[j, i] = modified_rand(partitions[i], partitions[j], scorer)
    if aggregate == "consecutive-mean":
        series = float(np.mean([mat[i, i + 1] for i in range(m - 1)]))
    elif aggregate == "all-pairs-mean":
        series = float(np.mean([mat[i, j] for i, j in combinations(range(m), 2)]))
    else:
        series = float(min(mat[i, j] for i, j in combinations(range(m), 2)))
    return StabilitySeries(mat, series, aggregate)
