"""Per-actor position trajectories across periods.

A state of ``NA`` means the actor is absent from that period's reduced
network. It does not mean the actor left the group: members outside the
active core of communication are simply not observed.
"""
from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .blockmodel import BRIDGE, CORE, PERIPHERY, SEMI, BlockModel
from .netmodel import Partition

__all__ = [
    "State",
    "TrajectoryRecord",
    "FlowTable",
    "TYPES",
    "PERSPECTIVES",
    "classify_trajectory",
    "build_trajectories",
    "states_from_partitions",
    "flow_counts",
    "trajectories_csv",
    "parse_states",
]


class State(str, enum.Enum):
    CORE = "C"
    PERIPHERY = "P"
    SEMI = "S"
    BRIDGE = "B"
    NA = "NA"


TYPES = ("entries", "peripheral", "internal", "borderline", "alienations", "mixed")
PERSPECTIVES = ("foothold", "switch", "alienation")


def classify_trajectory(states: Sequence[State]) -> tuple[str, frozenset[str]]:
    """Trajectory type and perspectives of one state sequence.

    Type, first matching rule wins:

    1. ``borderline``  - any bridge state;
    2. ``entries``     - absent in the first period;
    3. ``internal``    - every active state is core;
    4. ``peripheral``  - every active state is non-core;
    5. ``alienations`` - absent in the last period, active states mixed;
    6. otherwise the majority side: ``internal`` when core states outnumber
       non-core ones, ``peripheral`` for the reverse, ``mixed`` on a tie.

    Perspectives: ``foothold`` when all active states are equal, ``switch``
    when two successive active states differ, ``alienation`` when an absence
    follows an active period.
    """
    states = tuple(State(s) for s in states)
    active = [s for s in states if s is not State.NA]
    if not active:
        raise ValueError("trajectory has no active period")
    n_core = sum(s is State.CORE for s in active)
    n_other = len(active) - n_core
    if State.BRIDGE in active:
        kind = "borderline"
    elif states[0] is State.NA:
        kind = "entries"
    elif n_other == 0:
        kind = "internal"
    elif n_core == 0:
        kind = "peripheral"
    elif states[-1] is State.NA:
        kind = "alienations"
    elif n_core > n_other:
        kind = "internal"
    elif n_other > n_core:
        kind = "peripheral"
    else:
        kind = "mixed"

    persp = set()
    if len(set(active)) == 1:
        persp.add("foothold")
    if any(a != b for a, b in zip(active, active[1:])):
        persp.add("switch")
    first_active = next(i for i, s in enumerate(states) if s is not State.NA)
    if any(s is State.NA for s in states[first_active:]):
        persp.add("alienation")
    return kind, frozenset(persp)


@dataclass(frozen=True)
class TrajectoryRecord:
    actor: str
    states: tuple[State, ...]
    type: str
    perspectives: frozenset[str]

    @classmethod
    def classify(cls, actor: str, states: Sequence[State]) -> "TrajectoryRecord":
        states = tuple(State(s) for s in states)
        kind, persp = classify_trajectory(states)
        return cls(actor, states, kind, persp)

    def perspective_list(self) -> list[str]:
        return [p for p in PERSPECTIVES if p in self.perspectives]


_POSITION_STATE = {CORE: State.CORE, SEMI: State.PERIPHERY, PERIPHERY: State.PERIPHERY, BRIDGE: State.BRIDGE}


def build_trajectories(
    models: Sequence[BlockModel],
    universe: Iterable[str] | None = None,
    three_state: bool = False,
) -> list[TrajectoryRecord]:
    """One classified record per actor in ``universe`` (default: union of models).

    Semi-periphery maps to periphery unless ``three_state`` keeps it apart.
    """
    seen = []
    for m in models:
        seen.extend(m.partition.units)
    if universe is None:
        universe = sorted(set(seen))
    universe = list(universe)
    members = set(universe)
    stray = [u for u in seen if u not in members]
    if stray:
        raise ValueError(f"actor {stray[0]!r} appears in a model but not in the universe")
    absent = members - set(seen)
    if absent:
        raise ValueError(f"actor {sorted(absent)[0]!r} is not active in any period")
    lookups = [m.partition.assignment for m in models]
    records = []
    for actor in universe:
        states = []
        for m, lookup in zip(models, lookups):
            c = lookup.get(actor)
            if c is None:
                states.append(State.NA)
                continue
            pos = m.positions[c]
            states.append(State.SEMI if three_state and pos == SEMI else _POSITION_STATE[pos])
        records.append(TrajectoryRecord.classify(actor, states))
    return records


def states_from_partitions(partitions: Sequence[Partition], core_cluster: int = 1) -> dict[str, tuple[State, ...]]:
    """Two-state sequences from partitions whose core is a known cluster id."""
    actors = sorted({u for p in partitions for u in p.units})
    lookups = [p.assignment for p in partitions]
    out = {}
    for a in actors:
        seq = []
        for lk in lookups:
            c = lk.get(a)
            seq.append(State.NA if c is None else State.CORE if c == core_cluster else State.PERIPHERY)
        out[a] = tuple(seq)
    return out


@dataclass(frozen=True)
class FlowTable:
    """Transition counts between consecutive periods, NA included."""

    pairs: tuple[tuple[str, str], ...]
    counts: tuple[dict[tuple[State, State], int], ...]

    def rows(self) -> list[tuple[str, str, str, int]]:
        order = {s: i for i, s in enumerate(State)}
        out = []
        for (a, b), table in zip(self.pairs, self.counts):
            for (f, t), n in sorted(table.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]])):
                out.append((f"{a}->{b}", f.value, t.value, n))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["period_pair", "from", "to", "count"])
        w.writerows(self.rows())
        return buf.getvalue()


def flow_counts(records: Sequence[TrajectoryRecord], labels: Sequence[str] | None = None) -> FlowTable:
    if not records:
        raise ValueError("no trajectory records")
    m = len(records[0].states)
    if any(len(r.states) != m for r in records):
        raise ValueError("records have different numbers of periods")
    labels = list(labels) if labels is not None else [f"T{i + 1}" for i in range(m)]
    pairs, counts = [], []
    for i in range(m - 1):
        pairs.append((labels[i], labels[i + 1]))
        counts.append(dict(Counter((r.states[i], r.states[i + 1]) for r in records)))
    return FlowTable(tuple(pairs), tuple(counts))


def trajectories_csv(records: Sequence[TrajectoryRecord], labels: Sequence[str] | None = None) -> str:
    m = len(records[0].states) if records else len(labels or ())
    labels = list(labels) if labels is not None else [f"T{i + 1}" for i in range(m)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["actor", *labels, "type", "perspectives"])
    for r in records:
        w.writerow([r.actor, *(s.value for s in r.states), r.type, ";".join(r.perspective_list())])
    return buf.getvalue()


def parse_states(text: str) -> tuple[State, ...]:
    """Parse ``"C,P,NA"`` into states."""
    return tuple(State(tok.strip().upper()) for tok in text.split(","))
