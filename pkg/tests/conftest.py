from __future__ import annotations

import random
from collections import Counter
from datetime import datetime, timedelta, timezone

import pytest

from commstab.ingest import ActivityLog, ActivityRecord, RecordKind
from commstab.netmodel import OneModeNetwork

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def random_log(rng: random.Random, n_records: int, n_actors: int = 6) -> ActivityLog:
    """A well-formed log: posts, comments on any earlier publication, reactions."""
    actors = [f"u{i}" for i in range(n_actors)]
    records, pubs = [], []
    for i in range(n_records):
        ts = T0 + timedelta(minutes=i)
        author = rng.choice(actors)
        roll = rng.random()
        if not pubs or roll < 0.3:
            rec = ActivityRecord(f"r{i:03d}", RecordKind.POST, author, ts)
        elif roll < 0.65:
            rec = ActivityRecord(f"r{i:03d}", RecordKind.COMMENT, author, ts, rng.choice(pubs))
        else:
            rec = ActivityRecord(f"r{i:03d}", RecordKind.REACTION, author, ts, rng.choice(pubs),
                                 rng.choice(["like", "love"]))
        records.append(rec)
        if rec.kind is not RecordKind.REACTION:
            pubs.append(rec.record_id)
    return ActivityLog.from_records(records)


def brute_force_arcs(log: ActivityLog, kind: RecordKind) -> dict:
    """Count (actor, owner) pairs record by record; no matrices involved."""
    owner = {r.record_id: r.author_id for r in list(log.records) + list(log.context.values())}
    counts = Counter()
    for r in log.records:
        if r.kind is kind and r.author_id != owner[r.parent_id]:
            counts[(r.author_id, owner[r.parent_id])] += 1
    if kind is RecordKind.REACTION:
        return dict.fromkeys(counts, 1)
    return dict(counts)


def random_network(rng: random.Random, n: int, p: float = 0.3, integer: bool = True) -> OneModeNetwork:
    actors = [f"v{i}" for i in range(n)]
    arcs = {}
    for a in actors:
        for b in actors:
            if a != b and rng.random() < p:
                arcs[(a, b)] = rng.randint(1, 9) if integer else rng.uniform(0.01, 5.0)
    return OneModeNetwork(tuple(actors), arcs)


@pytest.fixture
def rng():
    return random.Random(20240601)


# --- acceptance summary --------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
