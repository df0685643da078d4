"""Planted core-periphery networks, static and with membership churn.

Everything is drawn from a single ``numpy.random.Generator`` seeded by the
config, so equal configs give identical output.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from datetime import timedelta
from typing import Mapping

import numpy as np

from .ingest import ActivityLog, ActivityRecord, PeriodSpec, RecordKind
from .netmodel import OneModeNetwork, Partition
from .trajectory import State, TrajectoryRecord, trajectories_csv

__all__ = [
    "SynthConfig",
    "TemporalSample",
    "generate_planted",
    "generate_temporal",
    "synth_activity_log",
    "truth_csv",
    "default_synth_periods",
]

CORE_ID, PERIPHERY_ID = 1, 2
INCOMER_CORE_PROB = 0.1


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters.

    ``densities`` are arc probabilities for core->core, core->periphery,
    periphery->core and periphery->periphery. ``churn`` holds per-period
    incomer, outgoer and switch rates: incomers number
    ``Binomial(n_actors, incomer)``, each member leaves with probability
    ``outgoer``, each retained member changes side with probability
    ``switch``. Arc weights are geometric on ``{1, 2, ...}`` with mean
    ``weight_mean``.
    """

    n_actors: int = 100
    core_fraction: float = 0.1
    densities: tuple[float, float, float, float] = (0.8, 0.4, 0.4, 0.05)
    n_periods: int = 4
    churn: tuple[float, float, float] = (0.1, 0.1, 0.05)
    weight_mean: float = 3.0
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "densities", tuple(float(x) for x in self.densities))
        object.__setattr__(self, "churn", tuple(float(x) for x in self.churn))
        if self.n_actors < 4:
            raise ValueError("n_actors must be at least 4")
        if len(self.densities) != 4 or any(not 0 <= d <= 1 for d in self.densities):
            raise ValueError("densities must be four probabilities in [0, 1]")
        if len(self.churn) != 3 or any(not 0 <= r <= 1 for r in self.churn):
            raise ValueError("churn must be three rates in [0, 1]")
        if not 0 <= self.core_fraction <= 1:
            raise ValueError("core_fraction must lie in [0, 1]")
        if self.n_core < 2:
            raise ValueError(f"core of {self.n_core} actors; need at least 2")
        if self.weight_mean < 1:
            raise ValueError("weight_mean must be >= 1")
        if self.n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_core(self) -> int:
        return int(round(self.core_fraction * self.n_actors))

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["densities"] = list(self.densities)
        d["churn"] = list(self.churn)
        return d


def _actor_name(i: int) -> str:
    return f"a{i:05d}"


def _draw_arcs(rng: np.random.Generator, actors, is_core: np.ndarray, cfg: SynthConfig) -> OneModeNetwork:
    n = len(actors)
    cc, cp, pc, pp = cfg.densities
    prob = np.where(
        is_core[:, None],
        np.where(is_core[None, :], cc, cp),
        np.where(is_core[None, :], pc, pp),
    )
    draw = rng.random((n, n)) < prob
    np.fill_diagonal(draw, False)
    weights = rng.geometric(1.0 / cfg.weight_mean, size=(n, n))
    src, dst = np.nonzero(draw)
    arcs = {(actors[i], actors[j]): int(weights[i, j]) for i, j in zip(src, dst)}
    return OneModeNetwork(tuple(actors), arcs)


def _partition(actors, is_core) -> Partition:
    return Partition(actors, [CORE_ID if c else PERIPHERY_ID for c in is_core])


def generate_planted(cfg: SynthConfig, rng: np.random.Generator | None = None) -> tuple[OneModeNetwork, Partition]:
    """One planted core-periphery network and its ground-truth partition.

    The core is a random subset of ``cfg.n_core`` actors and is cluster 1 of
    the returned partition.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    actors = [_actor_name(i) for i in range(cfg.n_actors)]
    is_core = np.zeros(cfg.n_actors, dtype=bool)
    is_core[rng.permutation(cfg.n_actors)[: cfg.n_core]] = True
    return _draw_arcs(rng, actors, is_core, cfg), _partition(actors, is_core)


@dataclass(frozen=True)
class TemporalSample:
    networks: tuple[OneModeNetwork, ...]
    partitions: tuple[Partition, ...]
    truth: tuple[TrajectoryRecord, ...]


def _event_label(h: dict) -> tuple[str, frozenset[str]]:
    # Labels from the churn events themselves, not from the state sequence.
    persp = set()
    persp.add("switch" if h["switches"] else "foothold")
    if h["left"] is not None:
        persp.add("alienation")
    if h["joined"] > 0:
        kind = "entries"
    elif h["switches"] == 0:
        kind = "internal" if h["side"][0] else "peripheral"
    elif h["left"] is not None:
        kind = "alienations"
    else:
        n_core = sum(h["side"])
        n_per = len(h["side"]) - n_core
        kind = "internal" if n_core > n_per else "peripheral" if n_per > n_core else "mixed"
    return kind, frozenset(persp)


def generate_temporal(cfg: SynthConfig) -> TemporalSample:
    """Networks, core(1)/periphery(2) partitions and true trajectories per period.

    Each period after the first removes outgoers, adds incomers (core with
    probability 0.1) and flips the side of retained members at the switch
    rate, then redraws all arcs from the planted densities. Departed actors
    never return; incomers get fresh ids.
    """
    if cfg.n_periods < 2:
        raise ValueError("temporal generation needs at least 2 periods")
    rng = np.random.default_rng(cfg.seed)
    inc_rate, out_rate, sw_rate = cfg.churn
    net, part = generate_planted(cfg, rng)
    members = list(part.units)
    side = {u: c == CORE_ID for u, c in zip(part.units, part.clusters)}
    hist = {u: {"joined": 0, "side": [side[u]], "left": None, "switches": 0} for u in members}
    nets, parts = [net], [part]
    next_id = cfg.n_actors
    for t in range(1, cfg.n_periods):
        leave = rng.random(len(members)) < out_rate
        retained = []
        for u, gone in zip(members, leave):
            if gone:
                hist[u]["left"] = t
            else:
                retained.append(u)
        n_new = int(rng.binomial(cfg.n_actors, inc_rate))
        new_core = rng.random(n_new) < INCOMER_CORE_PROB
        flips = rng.random(len(retained)) < sw_rate
        # only members carried over from the previous period can switch
        for u, f in zip(retained, flips):
            if f:
                side[u] = not side[u]
                hist[u]["switches"] += 1
        incomers = []
        for c in new_core:
            u = _actor_name(next_id)
            next_id += 1
            side[u] = bool(c)
            hist[u] = {"joined": t, "side": [], "left": None, "switches": 0}
            incomers.append(u)
        members = retained + incomers
        if not any(side[u] for u in members):
            raise ValueError(f"churn emptied the core in period {t + 1}")
        for u in members:
            hist[u]["side"].append(side[u])
        is_core = np.array([side[u] for u in members], dtype=bool)
        nets.append(_draw_arcs(rng, members, is_core, cfg))
        parts.append(_partition(members, is_core))

    truth = []
    for u in sorted(hist):
        h = hist[u]
        states = [State.NA] * cfg.n_periods
        end = h["left"] if h["left"] is not None else cfg.n_periods
        for t, s in zip(range(h["joined"], end), h["side"]):
            states[t] = State.CORE if s else State.PERIPHERY
        kind, persp = _event_label(h)
        truth.append(TrajectoryRecord(u, tuple(states), kind, persp))
    return TemporalSample(tuple(nets), tuple(parts), tuple(truth))


def synth_activity_log(sample: TemporalSample, spec: PeriodSpec, seed: int = 0) -> ActivityLog:
    """Activity records whose comment projection reproduces ``sample.networks``.

    In every period each actor writes one post; an arc ``u -> v`` of weight
    ``w`` becomes ``w`` comments by ``u`` on ``v``'s post and one reaction
    by ``u`` to that post. Timestamps fall inside the matching period.
    """
    if len(spec.periods) != len(sample.networks):
        raise ValueError("one period per generated network is required")
    rng = np.random.default_rng(seed)
    records = []
    for t, (period, net) in enumerate(zip(spec.periods, sample.networks)):
        span = (period.end - period.start).total_seconds()
        base = period.start
        post_of = {}
        for a in net.actors:
            pid = f"p{t + 1}-{a}"
            ts = base + timedelta(seconds=float(rng.uniform(0, span / 2)))
            records.append(ActivityRecord(pid, RecordKind.POST, a, ts))
            post_of[a] = (pid, ts)
        for n_arc, ((u, v), w) in enumerate(sorted(net.arcs.items())):
            pid, pts = post_of[v]
            room = (period.end - pts).total_seconds()
            for c in range(int(w)):
                ts = pts + timedelta(seconds=float(rng.uniform(1, room - 1)))
                records.append(ActivityRecord(f"c{t + 1}-{n_arc}-{c}", RecordKind.COMMENT, u, ts, pid))
            ts = pts + timedelta(seconds=float(rng.uniform(1, room - 1)))
            records.append(ActivityRecord(f"r{t + 1}-{n_arc}", RecordKind.REACTION, u, ts, pid, "reaction"))
    return ActivityLog.from_records(records)


def truth_csv(sample: TemporalSample, labels=None) -> str:
    return trajectories_csv(list(sample.truth), labels)


def default_synth_periods(n_periods: int, months_each: int = 3) -> PeriodSpec:
    """Consecutive ``months_each``-month periods starting January 2020."""
    triples = []
    for t in range(n_periods):
        a = t * months_each
        b = a + months_each - 1
        triples.append((f"T{t + 1}", f"{2020 + a // 12}-{a % 12 + 1:02d}", f"{2020 + b // 12}-{b % 12 + 1:02d}"))
    return PeriodSpec.from_months(triples)

