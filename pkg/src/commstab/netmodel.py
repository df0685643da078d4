"""Core network types and Pajek ``.net`` / ``.clu`` input/output.

Vertex identity is the quoted label in a Pajek file; numeric indices are
local to a file so that actor ids survive across period files.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "TwoModeNetwork",
    "OneModeNetwork",
    "Partition",
    "PajekFormatError",
    "read_pajek_net",
    "write_pajek_net",
    "read_partition_clu",
    "write_partition_clu",
    "format_weight",
]


class PajekFormatError(ValueError):
    """Malformed Pajek input; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _check_unique(units: Sequence[str], what: str) -> None:
    if len(set(units)) != len(units):
        seen = set()
        dup = next(u for u in units if u in seen or seen.add(u))
        raise ValueError(f"duplicate {what} id {dup!r}")


@dataclass(frozen=True, eq=True)
class TwoModeNetwork:
    """Sparse count matrix between two disjoint unit sets.

    Unit ids are namespaced by kind (``actor:``, ``pub:``, ``comment:``,
    ``reaction:``) so the row and column sets never collide.
    """

    row_units: tuple[str, ...]
    col_units: tuple[str, ...]
    weights: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "row_units", tuple(self.row_units))
        object.__setattr__(self, "col_units", tuple(self.col_units))
        object.__setattr__(self, "weights", dict(self.weights))
        _check_unique(self.row_units, "row unit")
        _check_unique(self.col_units, "column unit")
        overlap = set(self.row_units) & set(self.col_units)
        if overlap:
            raise ValueError(f"row and column units overlap: {sorted(overlap)[:3]}")
        rows, cols = set(self.row_units), set(self.col_units)
        for (r, c), w in self.weights.items():
            if r not in rows or c not in cols:
                raise ValueError(f"weight key ({r!r}, {c!r}) references unknown unit")
            if int(w) != w or w < 1:
                raise ValueError(f"weight for ({r!r}, {c!r}) must be a positive integer, got {w!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_units), len(self.col_units)

    def to_sparse(self) -> sp.csr_matrix:
        ri = {u: i for i, u in enumerate(self.row_units)}
        ci = {u: i for i, u in enumerate(self.col_units)}
        if self.weights:
            keys = list(self.weights)
            rows = [ri[r] for r, _ in keys]
            cols = [ci[c] for _, c in keys]
            data = [int(self.weights[k]) for k in keys]
        else:
            rows, cols, data = [], [], []
        return sp.csr_matrix(
            (np.asarray(data, dtype=np.int64), (rows, cols)),
            shape=self.shape,
            dtype=np.int64,
        )

    @classmethod
    def from_sparse(cls, row_units, col_units, matrix) -> "TwoModeNetwork":
        coo = sp.coo_matrix(matrix)
        weights = {
            (row_units[i], col_units[j]): int(v)
            for i, j, v in zip(coo.row, coo.col, coo.data)
            if v != 0
        }
        return cls(tuple(row_units), tuple(col_units), weights)

    def transpose(self) -> "TwoModeNetwork":
        return TwoModeNetwork(
            self.col_units,
            self.row_units,
            {(c, r): w for (r, c), w in self.weights.items()},
        )


@dataclass(frozen=True, eq=True)
class OneModeNetwork:
    """Directed, weighted actor-actor network.

    ``arcs`` maps ``(source, target)`` to a positive finite weight. Loops are
    representable (a freshly read file may contain them) but every network
    produced by :mod:`commstab.transform` is loop-free.
    """

    actors: tuple[str, ...]
    arcs: Mapping[tuple[str, str], float] = field(default_factory=dict)

    directed = True

    def __post_init__(self):
        object.__setattr__(self, "actors", tuple(self.actors))
        object.__setattr__(self, "arcs", dict(self.arcs))
        _check_unique(self.actors, "actor")
        members = set(self.actors)
        for (s, t), w in self.arcs.items():
            if s not in members or t not in members:
                raise ValueError(f"arc ({s!r}, {t!r}) has an endpoint outside the actor set")
            if not (isinstance(w, (int, float, np.integer, np.floating)) and math.isfinite(w) and w > 0):
                raise ValueError(f"arc ({s!r}, {t!r}) has non-positive or non-finite weight {w!r}")

    @property
    def n(self) -> int:
        return len(self.actors)

    @property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.actors)}

    def adjacency(self, binary: bool = False) -> np.ndarray:
        """Dense ``n x n`` weight matrix, absent arcs as 0."""
        idx = self.index
        x = np.zeros((self.n, self.n), dtype=float)
        for (s, t), w in self.arcs.items():
            x[idx[s], idx[t]] = 1.0 if binary else float(w)
        return x

    def strength(self) -> dict[str, float]:
        """Weighted in-degree plus weighted out-degree of every actor."""
        out = dict.fromkeys(self.actors, 0.0)
        for (s, t), w in self.arcs.items():
            out[s] += w
            out[t] += w
        return out

    def subnetwork(self, keep: Iterable[str]) -> "OneModeNetwork":
        """Induced subnetwork; survivors keep their original order."""
        keep = set(keep)
        actors = tuple(a for a in self.actors if a in keep)
        arcs = {(s, t): w for (s, t), w in self.arcs.items() if s in keep and t in keep}
        return OneModeNetwork(actors, arcs)

    def without_loops(self) -> "OneModeNetwork":
        return OneModeNetwork(self.actors, {(s, t): w for (s, t), w in self.arcs.items() if s != t})

    def has_loops(self) -> bool:
        return any(s == t for s, t in self.arcs)


class Partition:
    """Assignment of every unit to a cluster id in ``1..k``.

    Cluster ids are renumbered on construction, preserving the relative order
    of the supplied labels: labels ``(7, 3, 7)`` become ``(2, 1, 2)``.
    """

    __slots__ = ("units", "clusters")

    def __init__(self, units: Sequence[str], labels: Sequence):
        units = tuple(units)
        labels = list(labels)
        if len(units) != len(labels):
            raise ValueError(f"{len(units)} units but {len(labels)} cluster labels")
        _check_unique(units, "unit")
        rank = {lab: i + 1 for i, lab in enumerate(sorted(set(labels)))}
        self.units: tuple[str, ...] = units
        self.clusters: tuple[int, ...] = tuple(rank[lab] for lab in labels)

    @classmethod
    def from_mapping(cls, assignment: Mapping[str, object]) -> "Partition":
        return cls(tuple(assignment), tuple(assignment.values()))

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[str]]) -> "Partition":
        units, labels = [], []
        for c, block in enumerate(blocks, start=1):
            for u in block:
                units.append(u)
                labels.append(c)
        return cls(units, labels)

    @property
    def k(self) -> int:
        return max(self.clusters, default=0)

    @property
    def assignment(self) -> dict[str, int]:
        return dict(zip(self.units, self.clusters))

    def members(self, cluster: int) -> tuple[str, ...]:
        return tuple(u for u, c in zip(self.units, self.clusters) if c == cluster)

    def blocks(self) -> list[tuple[str, ...]]:
        return [self.members(c) for c in range(1, self.k + 1)]

    def restrict(self, keep: Iterable[str]) -> "Partition":
        keep = set(keep)
        pairs = [(u, c) for u, c in zip(self.units, self.clusters) if u in keep]
        return Partition([u for u, _ in pairs], [c for _, c in pairs])

    def __len__(self) -> int:
        return len(self.units)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.units == other.units and self.clusters == other.clusters

    def __hash__(self):
        return hash((self.units, self.clusters))

    def __repr__(self):
        return f"Partition(n={len(self.units)}, k={self.k})"


# --- Pajek I/O -------------------------------------------------------------

_VERTICES_RE = re.compile(r"^\*vertices\s+(\d+)(?:\s+\d+)?\s*$", re.IGNORECASE)
_VERTEX_RE = re.compile(r'^(\d+)\s+(?:"([^"]*)"|(\S+))(?:\s.*)?$')
_INT_RE = re.compile(r"^[+-]?\d+$")


def format_weight(w) -> str:
    """Shortest decimal that round-trips; integral values without a fraction."""
    w = float(w)
    if w.is_integer():
        return str(int(w))
    return repr(w)


def _parse_weight(token: str, lineno: int):
    try:
        if _INT_RE.match(token):
            return int(token)
        w = float(token)
    except ValueError:
        raise PajekFormatError(lineno, f"bad arc weight {token!r}") from None
    if not math.isfinite(w):
        raise PajekFormatError(lineno, f"non-finite arc weight {token!r}")
    return w


def _content_lines(text: str):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        yield lineno, line


def read_pajek_net(text: str) -> OneModeNetwork:
    """Parse a directed Pajek network (``*Vertices`` followed by ``*Arcs``).

    Vertices without an explicit line get their index as label. A missing
    arc weight means 1. ``*Edges``, ``*Matrix`` and list sections raise
    :class:`PajekFormatError`, as do duplicate arcs and weights <= 0.
    """
    lines = iter(_content_lines(text))
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise PajekFormatError(1, "empty input, expected '*Vertices n'") from None
    m = _VERTICES_RE.match(line)
    if not m:
        raise PajekFormatError(lineno, f"expected '*Vertices n', got {line!r}")
    n = int(m.group(1))
    labels: list[str | None] = [None] * n
    arcs: dict[tuple[int, int], object] = {}
    section = "vertices"
    for lineno, line in lines:
        if line.startswith("*"):
            name = line.split()[0].lower()
            if name == "*arcs" and section == "vertices":
                section = "arcs"
                continue
            raise PajekFormatError(lineno, f"unsupported section {line.split()[0]!r}")
        if section == "vertices":
            vm = _VERTEX_RE.match(line)
            if not vm:
                raise PajekFormatError(lineno, f"bad vertex line {line!r}")
            i = int(vm.group(1))
            if not 1 <= i <= n:
                raise PajekFormatError(lineno, f"vertex index {i} out of range 1..{n}")
            if labels[i - 1] is not None:
                raise PajekFormatError(lineno, f"vertex {i} defined twice")
            labels[i - 1] = vm.group(2) if vm.group(2) is not None else vm.group(3)
        else:
            parts = line.split()
            if len(parts) not in (2, 3):
                raise PajekFormatError(lineno, f"bad arc line {line!r}")
            try:
                s, t = int(parts[0]), int(parts[1])
            except ValueError:
                raise PajekFormatError(lineno, f"bad arc endpoints {line!r}") from None
            for v in (s, t):
                if not 1 <= v <= n:
                    raise PajekFormatError(lineno, f"vertex index {v} out of range 1..{n}")
            w = _parse_weight(parts[2], lineno) if len(parts) == 3 else 1
            if w <= 0:
                raise PajekFormatError(lineno, f"non-positive arc weight {parts[2]!r}")
            if (s, t) in arcs:
                raise PajekFormatError(lineno, f"duplicate arc {s} -> {t}")
            arcs[(s, t)] = w
    actors = [lab if lab is not None else str(i + 1) for i, lab in enumerate(labels)]
    if len(set(actors)) != n:
        raise PajekFormatError(1, "vertex labels are not unique")
    return OneModeNetwork(
        tuple(actors),
        {(actors[s - 1], actors[t - 1]): w for (s, t), w in arcs.items()},
    )


def _check_label(label: str) -> None:
    if '"' in label or "\n" in label or "\r" in label:
        raise ValueError(f"label {label!r} cannot be written to Pajek")


def write_pajek_net(net: OneModeNetwork) -> str:
    """Serialize deterministically: vertices in actor order, arcs sorted by index."""
    out = [f"*Vertices {net.n}"]
    for i, a in enumerate(net.actors, start=1):
        _check_label(a)
        out.append(f'{i} "{a}"')
    if net.n:
        out.append("*Arcs")
        idx = net.index
        for (s, t), w in sorted(net.arcs.items(), key=lambda kv: (idx[kv[0][0]], idx[kv[0][1]])):
            out.append(f"{idx[s] + 1} {idx[t] + 1} {format_weight(w)}")
    return "\n".join(out) + "\n"


def read_partition_clu(text: str, units: Sequence[str] | None = None) -> Partition:
    """Parse a Pajek ``.clu`` file.

    A ``.clu`` carries no labels, so ``units`` supplies the actor ids in
    vertex order (typically ``read_pajek_net(...).actors``). Without it the
    units are ``"1".."n"``.
    """
    lines = iter(_content_lines(text))
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise PajekFormatError(1, "empty input, expected '*Vertices n'") from None
    m = _VERTICES_RE.match(line)
    if not m:
        raise PajekFormatError(lineno, f"expected '*Vertices n', got {line!r}")
    n = int(m.group(1))
    labels = []
    last = lineno
    for lineno, line in lines:
        if not _INT_RE.match(line):
            raise PajekFormatError(lineno, f"cluster id must be an integer, got {line!r}")
        labels.append(int(line))
        last = lineno
    if len(labels) != n:
        raise PajekFormatError(last, f"header declares {n} vertices but {len(labels)} cluster ids given")
    if units is None:
        units = [str(i) for i in range(1, n + 1)]
    elif len(units) != n:
        raise ValueError(f"{len(units)} units supplied for a {n}-vertex partition")
    return Partition(units, labels)


def write_partition_clu(partition: Partition) -> str:
    lines = [f"*Vertices {len(partition)}"] + [str(c) for c in partition.clusters]
    return "\n".join(lines) + "\n"
