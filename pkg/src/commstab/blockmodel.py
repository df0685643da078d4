"""Indirect structural-equivalence blockmodeling.

Pipeline: corrected Euclidean dissimilarity between actor profiles, Ward
agglomerative clustering, binary block image relative to overall density,
position labels (core / semi-periphery / periphery / bridge) and the
nearest ideal global structure.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .netmodel import OneModeNetwork, Partition

__all__ = [
    "DissimilarityMatrix",
    "BlockModel",
    "STRUCTURES",
    "POSITIONS",
    "structural_dissimilarity",
    "ward_merges",
    "agglomerative_cluster",
    "image_matrix",
    "label_positions",
    "classify_structure",
    "ideal_pattern",
    "fit_blockmodel",
]

NULL, COMPLETE = "null", "complete"
CORE, SEMI, PERIPHERY, BRIDGE = "core", "semi-periphery", "periphery", "bridge"
POSITIONS = (CORE, SEMI, PERIPHERY, BRIDGE)
STRUCTURES = ("cohesive-subgroups", "core-periphery", "centralized", "hierarchical", "transitive")
OTHER = "other"
EPS = 1e-9
MAX_CLASSIFY_K = 9


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    units: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = len(self.units)
        if v.shape != (n, n):
            raise ValueError(f"values shape {v.shape} does not match {n} units")
        if np.any(np.diag(v) != 0):
            raise ValueError("dissimilarity diagonal must be zero")
        if not np.array_equal(v, v.T):
            raise ValueError("dissimilarity must be symmetric")
        if np.any(v < 0):
            raise ValueError("dissimilarity must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, pair):
        i, j = (self.units.index(u) for u in pair)
        return self.values[i, j]


def structural_dissimilarity(net: OneModeNetwork, p: float = 1) -> DissimilarityMatrix:
    r"""Corrected Euclidean distance between the in- and out-profiles of actors.

    .. math::

        d(i,j)^2 = \sum_{s \ne i,j} (x_{is}-x_{js})^2 + (x_{si}-x_{sj})^2
                   + p\,[(x_{ii}-x_{jj})^2 + (x_{ij}-x_{ji})^2]

    ``p`` weights the reciprocal-tie term (0, 1 or 2).
    """
    if net.n < 2:
        raise ValueError("structural dissimilarity needs at least 2 actors")
    if p not in (0, 1, 2):
        raise ValueError(f"correction weight p must be 0, 1 or 2, got {p}")
    x = net.adjacency()
    n = net.n
    d2 = np.zeros((n, n))
    diag = np.diag(x)
    ar = np.arange(n)
    for i in range(n):
        out_sq = (x[i] - x) ** 2  # row j: (x_is - x_js)^2 over s
        in_sq = (x[:, i][None, :] - x.T) ** 2  # row j: (x_si - x_sj)^2 over s
        total = out_sq + in_sq
        # drop s = i and s = j
        total[:, i] = 0.0
        total[ar, ar] = 0.0
        d2[i] = total.sum(axis=1)
        d2[i] += p * ((diag[i] - diag) ** 2 + (x[i] - x[:, i]) ** 2)
    d2[ar, ar] = 0.0
    d2 = np.maximum(d2, d2.T)
    return DissimilarityMatrix(net.actors, np.sqrt(d2))


def ward_merges(dissim: DissimilarityMatrix) -> list[tuple[int, int, float, int]]:
    """Full Ward agglomeration by Lance-Williams updates.

    Each merge is ``(a, b, height, size)`` where ``a < b`` are the smallest
    unit indices of the two merged clusters. Among equal-height candidates
    the lexicographically smallest ``(a, b)`` merges first.
    """
    n = len(dissim.units)
    s = np.array(dissim.values, dtype=float) ** 2
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    merges = []
    for _ in range(n - 1):
        mask = upper & active[:, None] & active[None, :]
        cand = np.where(mask, s, np.inf)
        flat = int(np.argmin(cand))  # first minimum in row-major order
        a, b = divmod(flat, n)
        h = cand[a, b]
        na, nb = size[a], size[b]
        tot = na + nb + size
        new = ((na + size) * s[a] + (nb + size) * s[b] - size * h) / tot
        new = np.maximum(new, 0.0)
        s[a, :] = new
        s[:, a] = new
        s[a, a] = 0.0
        active[b] = False
        size[a] = na + nb
        merges.append((a, b, math.sqrt(h), int(size[a])))
    return merges


def agglomerative_cluster(dissim: DissimilarityMatrix, k: int) -> Partition:
    """Cut the Ward hierarchy at ``k`` clusters.

    Cluster ids follow the smallest unit index in each cluster.
    """
    n = len(dissim.units)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    label = list(range(n))
    if n > 1:
        for a, b, _, _ in ward_merges(dissim)[: n - k]:
            lb = label[b]
            label = [a if x == lb else x for x in label]
    return Partition(dissim.units, label)


@dataclass(frozen=True, eq=False)
class BlockModel:
    partition: Partition
    density: np.ndarray
    block_types: tuple[tuple[str, ...], ...]
    overall_density: float
    alpha: float = 0.5
    positions: Mapping[int, str] = field(default_factory=dict)
    structure: str | None = None

    @property
    def k(self) -> int:
        return self.partition.k

    def type_matrix(self) -> np.ndarray:
        return np.array([[t == COMPLETE for t in row] for row in self.block_types], dtype=bool).reshape(self.k, self.k)

    def position_of(self, unit: str) -> str:
        return self.positions[self.partition.assignment[unit]]

    def sizes(self) -> dict[int, int]:
        return {c: len(self.partition.members(c)) for c in range(1, self.k + 1)}

    def to_dict(self) -> dict:
        return {
            "units": list(self.partition.units),
            "clusters": list(self.partition.clusters),
            "k": self.k,
            "alpha": self.alpha,
            "overall_density": float(self.overall_density),
            "density": [[float(v) for v in row] for row in self.density],
            "block_types": [list(row) for row in self.block_types],
            "positions": {str(c): self.positions[c] for c in sorted(self.positions)},
            "sizes": {str(c): n for c, n in self.sizes().items()},
            "structure": self.structure,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BlockModel":
        part = Partition(d["units"], d["clusters"])
        return cls(
            partition=part,
            density=np.array(d["density"], dtype=float).reshape(part.k, part.k),
            block_types=tuple(tuple(r) for r in d["block_types"]),
            overall_density=float(d["overall_density"]),
            alpha=float(d.get("alpha", 0.5)),
            positions={int(c): v for c, v in d["positions"].items()},
            structure=d.get("structure"),
        )


def image_matrix(net: OneModeNetwork, partition: Partition, alpha: float = 0.5) -> BlockModel:
    """Block densities and binary block types, with positions and structure.

    A block is complete when its density reaches ``alpha`` times the overall
    network density. Loops never count; a singleton diagonal block has
    density 0.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if set(partition.units) != set(net.actors) or len(partition.units) != net.n:
        raise ValueError("partition units must equal the network actors")
    k = partition.k
    assign = partition.assignment
    counts = np.zeros((k, k))
    for (s, t) in net.arcs:
        if s != t:
            counts[assign[s] - 1, assign[t] - 1] += 1
    sizes = np.array([len(partition.members(c)) for c in range(1, k + 1)], dtype=float)
    possible = np.outer(sizes, sizes)
    np.fill_diagonal(possible, sizes * (sizes - 1))
    density = np.divide(counts, possible, out=np.zeros_like(counts), where=possible > 0)
    n = net.n
    n_arcs = sum(1 for s, t in net.arcs if s != t)
    overall = n_arcs / (n * (n - 1)) if n > 1 else 0.0
    threshold = alpha * max(overall, EPS)
    types = tuple(tuple(COMPLETE if v >= threshold else NULL for v in row) for row in density)
    bm = BlockModel(partition, density, types, overall, alpha)
    bm = label_positions(bm)
    return replace(bm, structure=classify_structure(bm))


def label_positions(bm: BlockModel) -> BlockModel:
    """Assign core / semi-periphery / periphery / bridge to every cluster.

    A singleton cluster with a complete block (in either direction) to at
    least half of the other clusters is the bridge; at most one is chosen.
    The remaining clusters are ranked by within-cluster density: the densest
    is the core, the sparsest the periphery, any in between semi-periphery.
    A lone remaining cluster is core if its diagonal block is complete.
    """
    k = bm.k
    t = bm.type_matrix()
    sizes = bm.sizes()
    positions: dict[int, str] = {}
    candidates = []
    if k >= 2:
        for c in range(1, k + 1):
            if sizes[c] != 1:
                continue
            i = c - 1
            linked = sum(1 for j in range(k) if j != i and (t[i, j] or t[j, i]))
            if linked >= 1 and 2 * linked >= k - 1:
                strength = float(bm.density[i].sum() + bm.density[:, i].sum())
                candidates.append((-linked, -strength, c))
    if candidates:
        positions[min(candidates)[2]] = BRIDGE
    rest = [c for c in range(1, k + 1) if c not in positions]
    ranked = sorted(rest, key=lambda c: (-bm.density[c - 1, c - 1], c))
    if len(ranked) == 1:
        c = ranked[0]
        positions[c] = CORE if t[c - 1, c - 1] else PERIPHERY
    elif ranked:
        positions[ranked[0]] = CORE
        positions[ranked[-1]] = PERIPHERY
        for c in ranked[1:-1]:
            positions[c] = SEMI
    return replace(bm, positions=dict(sorted(positions.items())))


def ideal_pattern(structure: str, k: int) -> np.ndarray:
    """Boolean ``k x k`` ideal image (True = complete) in canonical cluster order.

    Cluster 0 plays the core / centre role; hierarchies run downward from
    cluster 0.
    """
    i, j = np.indices((k, k))
    if structure == "cohesive-subgroups":
        return i == j
    if structure == "core-periphery":
        return (i == 0) | (j == 0)
    if structure == "centralized":
        return ((i == 0) | (j == 0)) & (i != j)
    if structure == "hierarchical":
        return i > j
    if structure == "transitive":
        return i >= j
    raise ValueError(f"unknown structure {structure!r}")


def _min_hamming(types: np.ndarray, pattern: np.ndarray) -> int:
    k = types.shape[0]
    perms = np.array(list(itertools.permutations(range(k))))
    permuted = pattern[perms[:, :, None], perms[:, None, :]]
    return int((permuted != types[None]).sum(axis=(1, 2)).min())


def classify_structure(bm_or_types) -> str:
    """Nearest ideal structure by Hamming distance over all cluster orderings.

    Accepts a :class:`BlockModel` or a square matrix of block types (booleans
    or ``"null"``/``"complete"`` labels). Ties between structures give
    ``"other"``, as does a matrix larger than ``MAX_CLASSIFY_K``. A single cluster is cohesive when its block is complete.
    """
    if isinstance(bm_or_types, BlockModel):
        types = bm_or_types.type_matrix()
    else:
        arr = np.asarray(bm_or_types)
        types = (arr == COMPLETE) if arr.dtype.kind in "UO" else arr.astype(bool)
    k = types.shape[0]
    if types.shape != (k, k):
        raise ValueError("block type matrix must be square")
    if k == 0:
        return OTHER
    if k == 1:
        return "cohesive-subgroups" if types[0, 0] else OTHER
    if k > MAX_CLASSIFY_K:
        # k! orderings; beyond this the search is too slow to be useful
        warnings.warn(f"{k} clusters: structure classification is limited to {MAX_CLASSIFY_K}; reporting {OTHER!r}",
                      stacklevel=2)
        return OTHER
    dist = {s: _min_hamming(types, ideal_pattern(s, k)) for s in STRUCTURES}
    best = min(dist.values())
    winners = [s for s, v in dist.items() if v == best]
    return winners[0] if len(winners) == 1 else OTHER


def fit_blockmodel(net: OneModeNetwork, k: int = 2, alpha: float = 0.5, p: float = 1) -> BlockModel:
    """Dissimilarity, Ward clustering at ``k``, image, positions and structure."""
    if net.has_loops():
        net = net.without_loops()
    if k == 1:
        part = Partition(net.actors, [1] * net.n)
    else:
        part = agglomerative_cluster(structural_dissimilarity(net, p), k)
    return image_matrix(net, part, alpha)
