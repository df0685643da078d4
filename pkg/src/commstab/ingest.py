"""Activity logs: parsing, two-mode incidence networks, period slicing, statistics."""
from __future__ import annotations

import csv
import enum
import io
import json
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .netmodel import TwoModeNetwork

__all__ = [
    "RecordKind",
    "ActivityRecord",
    "ActivityLog",
    "ActivityLogError",
    "Period",
    "PeriodSpec",
    "PeriodStats",
    "StatsTable",
    "REACTION_KINDS",
    "parse_activity_log",
    "write_activity_log",
    "build_two_mode",
    "slice_periods",
    "activity_stats",
    "stats_from_counts",
    "per_month",
    "months_spanned",
    "default_periods",
    "parse_periods",
]

REACTION_KINDS = ("like", "love", "wow", "haha", "sad", "angry", "thankful")
MERGED_REACTION = "reaction"

FIELDS = ("record_id", "kind", "parent_id", "author_id", "timestamp", "reaction_kind")


class ActivityLogError(ValueError):
    pass


class RecordKind(str, enum.Enum):
    POST = "post"
    COMMENT = "comment"
    REACTION = "reaction"


_KIND_ALIASES = {
    "post": RecordKind.POST,
    "comment": RecordKind.COMMENT,
    "comment_to_post": RecordKind.COMMENT,
    "comment_to_comment": RecordKind.COMMENT,
    "reply": RecordKind.COMMENT,
    "reaction": RecordKind.REACTION,
}


@dataclass(frozen=True)
class ActivityRecord:
    record_id: str
    kind: RecordKind
    author_id: str
    timestamp: datetime
    parent_id: str | None = None
    reaction_kind: str | None = None

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise ActivityLogError(f"record {self.record_id}: timestamp must be timezone-aware")
        if (self.parent_id is None) != (self.kind is RecordKind.POST):
            raise ActivityLogError(f"record {self.record_id}: parent_id must be set iff kind is not post")
        if (self.reaction_kind is None) != (self.kind is not RecordKind.REACTION):
            raise ActivityLogError(f"record {self.record_id}: reaction_kind must be set iff kind is reaction")

    @property
    def is_publication(self) -> bool:
        return self.kind is not RecordKind.REACTION


def _sort_key(r: ActivityRecord):
    return (r.timestamp, r.record_id)


@dataclass(frozen=True)
class ActivityLog:
    """Chronologically ordered, validated activity records.

    ``context`` holds records that are referenced as parents but live outside
    this log (a comment in one period on a post from an earlier one). They
    resolve parent authors during projection and are never counted.
    """

    records: tuple[ActivityRecord, ...]
    context: Mapping[str, ActivityRecord] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "context", dict(self.context))
        ids = set()
        for r in self.records:
            if r.record_id in ids:
                raise ActivityLogError(f"duplicate record_id {r.record_id!r}")
            ids.add(r.record_id)
        for prev, cur in zip(self.records, self.records[1:]):
            if _sort_key(prev) > _sort_key(cur):
                raise ActivityLogError("records are not sorted by (timestamp, record_id)")
        lookup = self.lookup
        for r in self.records:
            if r.parent_id is None:
                continue
            parent = lookup.get(r.parent_id)
            if parent is None:
                raise ActivityLogError(f"record {r.record_id}: dangling parent {r.parent_id!r}")
            if not parent.is_publication:
                raise ActivityLogError(f"record {r.record_id}: parent {r.parent_id!r} is a reaction")
            if parent.timestamp > r.timestamp:
                raise ActivityLogError(f"record {r.record_id}: precedes its parent {r.parent_id!r}")

    @classmethod
    def from_records(cls, records: Iterable[ActivityRecord], context=None) -> "ActivityLog":
        return cls(tuple(sorted(records, key=_sort_key)), context or {})

    @property
    def lookup(self) -> dict[str, ActivityRecord]:
        table = dict(self.context)
        table.update((r.record_id, r) for r in self.records)
        return table

    @property
    def actor_index(self) -> tuple[str, ...]:
        return tuple(sorted({r.author_id for r in self.records}))

    def of_kind(self, *kinds: RecordKind) -> list[ActivityRecord]:
        return [r for r in self.records if r.kind in kinds]

    def __len__(self):
        return len(self.records)


# --- parsing ---------------------------------------------------------------


def _parse_timestamp(value: str) -> datetime:
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def parse_activity_log(
    text: str,
    schema: Mapping[str, str] | None = None,
    *,
    merge_reactions: bool = True,
    on_dangling: str = "error",
) -> ActivityLog:
    """Read a delimited (comma or tab) activity export.

    Parameters
    ----------
    text
        File contents with a header row.
    schema
        Maps the canonical field names (``record_id``, ``kind``, ``parent_id``,
        ``author_id``, ``timestamp``, ``reaction_kind``) to header names.
        Unmapped fields are looked up under their canonical name.
    merge_reactions
        Collapse every reaction label to the single label ``"reaction"``.
    on_dangling
        ``"error"`` raises on a parent id missing from the file; ``"drop"``
        discards such records (and their descendants) with a warning.
    """
    if on_dangling not in ("error", "drop"):
        raise ValueError(f"on_dangling must be 'error' or 'drop', got {on_dangling!r}")
    schema = {f: (schema or {}).get(f, f) for f in FIELDS}
    header = text.split("\n", 1)[0]
    delimiter = "\t" if "\t" in header else ","
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    columns = reader.fieldnames or []
    for f in FIELDS:
        if f == "reaction_kind" and schema[f] not in columns:
            continue
        if schema[f] not in columns:
            raise ActivityLogError(f"missing column {schema[f]!r} (for field {f})")

    records = []
    for rowno, row in enumerate(reader, start=2):
        def get(f):
            v = row.get(schema[f])
            v = v.strip() if v is not None else ""
            return v or None

        rid = get("record_id")
        if rid is None:
            raise ActivityLogError(f"row {rowno}: empty record_id")
        raw_kind = (get("kind") or "").lower()
        kind = _KIND_ALIASES.get(raw_kind)
        if kind is None and raw_kind in REACTION_KINDS:
            kind = RecordKind.REACTION
        if kind is None:
            raise ActivityLogError(f"row {rowno} (record {rid}): unknown kind {raw_kind!r}")
        try:
            ts = _parse_timestamp(get("timestamp") or "")
        except ValueError:
            raise ActivityLogError(f"row {rowno} (record {rid}): unparseable timestamp {get('timestamp')!r}") from None
        reaction = None
        if kind is RecordKind.REACTION:
            reaction = (get("reaction_kind") or (raw_kind if raw_kind in REACTION_KINDS else None))
            if merge_reactions:
                reaction = MERGED_REACTION
            elif reaction is None:
                raise ActivityLogError(f"row {rowno} (record {rid}): reaction without reaction_kind")
            else:
                reaction = reaction.lower()
        author = get("author_id")
        if author is None:
            raise ActivityLogError(f"row {rowno} (record {rid}): empty author_id")
        records.append(ActivityRecord(rid, kind, author, ts, get("parent_id"), reaction))

    known = {r.record_id for r in records}
    dangling = [r.record_id for r in records if r.parent_id is not None and r.parent_id not in known]
    if dangling:
        if on_dangling == "error":
            raise ActivityLogError(f"dangling parent references in records: {', '.join(dangling)}")
        while dangling:
            drop = set(dangling)
            records = [r for r in records if r.record_id not in drop]
            known -= drop
            warnings.warn(f"dropped records with dangling parents: {', '.join(sorted(drop))}", stacklevel=2)
            dangling = [r.record_id for r in records if r.parent_id is not None and r.parent_id not in known]
    return ActivityLog.from_records(records)


def write_activity_log(log: ActivityLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in log.records:
        w.writerow([r.record_id, r.kind.value, r.parent_id or "", r.author_id,
                    r.timestamp.isoformat(), r.reaction_kind or ""])
    return buf.getvalue()


# --- two-mode networks -------------------------------------------------------

RELATIONS = ("AP", "PC", "PR", "CA", "RA")


def _actor(a):
    return f"actor:{a}"


def _pub(p):
    return f"pub:{p}"


def build_two_mode(log: ActivityLog, relation: str) -> TwoModeNetwork:
    """Incidence network for one relation of the projection formula.

    ``AP`` author x publication (posts and comments), ``PC`` publication x
    comment attached to it, ``PR`` publication x reaction attached to it,
    ``CA`` and ``RA`` comment/reaction x its author. Publications referenced
    through ``log.context`` are included so cross-period replies resolve.
    """
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}; expected one of {RELATIONS}")
    lookup = log.lookup
    pubs = [r for r in log.records if r.is_publication]
    pub_ids = {r.record_id for r in pubs}
    extra = sorted(
        {r.parent_id for r in log.records if r.parent_id is not None and r.parent_id not in pub_ids}
    )
    pubs = pubs + [lookup[p] for p in extra]
    actors = sorted({r.author_id for r in log.records} | {p.author_id for p in pubs})
    comments = log.of_kind(RecordKind.COMMENT)
    reactions = log.of_kind(RecordKind.REACTION)
    pub_units = tuple(_pub(p.record_id) for p in pubs)
    actor_units = tuple(_actor(a) for a in actors)

    weights: dict[tuple[str, str], int] = {}

    def bump(key):
        weights[key] = weights.get(key, 0) + 1

    if relation == "AP":
        for p in pubs:
            bump((_actor(p.author_id), _pub(p.record_id)))
        return TwoModeNetwork(actor_units, pub_units, weights)
    if relation in ("PC", "CA"):
        children, prefix = comments, "comment:"
    else:
        children, prefix = reactions, "reaction:"
    child_units = tuple(prefix + c.record_id for c in children)
    if relation in ("PC", "PR"):
        for c in children:
            bump((_pub(c.parent_id), prefix + c.record_id))
        return TwoModeNetwork(pub_units, child_units, weights)
    for c in children:
        bump((prefix + c.record_id, _actor(c.author_id)))
    return TwoModeNetwork(child_units, actor_units, weights)


# --- periods ---------------------------------------------------------------


def months_spanned(start: datetime, end: datetime) -> int:
    """Calendar months from ``start`` to ``end``, both months counted."""
    return (end.year - start.year) * 12 + end.month - start.month + 1


@dataclass(frozen=True)
class Period:
    label: str
    start: datetime  # inclusive
    end: datetime  # inclusive

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts <= self.end


def _month_start(spec: str) -> datetime:
    y, m = (int(x) for x in spec.split("-")[:2])
    return datetime(y, m, 1, tzinfo=timezone.utc)


def _month_end(spec: str) -> datetime:
    start = _month_start(spec)
    nxt = datetime(start.year + (start.month == 12), start.month % 12 + 1, 1, tzinfo=timezone.utc)
    return nxt - timedelta(microseconds=1)


@dataclass(frozen=True)
class PeriodSpec:
    """Contiguous, non-overlapping periods with the month count used for normalization."""

    periods: tuple[Period, ...]
    month_counts: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(self.periods))
        if not self.periods:
            raise ValueError("at least one period is required")
        counts = tuple(self.month_counts) or tuple(months_spanned(p.start, p.end) for p in self.periods)
        object.__setattr__(self, "month_counts", counts)
        if len(counts) != len(self.periods):
            raise ValueError("month_counts must have one entry per period")
        if any(c < 1 for c in counts):
            raise ValueError("each period must span at least one month")
        if len({p.label for p in self.periods}) != len(self.periods):
            raise ValueError("period labels must be unique")
        for p in self.periods:
            if p.end < p.start:
                raise ValueError(f"period {p.label} ends before it starts")
        for a, b in zip(self.periods, self.periods[1:]):
            if b.start - a.end != timedelta(microseconds=1):
                raise ValueError(f"periods {a.label} and {b.label} are not contiguous")

    @classmethod
    def from_months(cls, triples: Sequence[tuple[str, str, str]], month_counts=()) -> "PeriodSpec":
        """Build from ``(label, "YYYY-MM", "YYYY-MM")`` triples covering whole months."""
        return cls(tuple(Period(lab, _month_start(a), _month_end(b)) for lab, a, b in triples), tuple(month_counts))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.periods)

    def locate(self, ts: datetime) -> int | None:
        for i, p in enumerate(self.periods):
            if p.contains(ts):
                return i
        return None

    def to_dict(self) -> dict:
        return {
            "periods": [[p.label, p.start.isoformat(), p.end.isoformat()] for p in self.periods],
            "month_counts": list(self.month_counts),
        }


def default_periods() -> PeriodSpec:
    """The four activity periods of the studied group (2011-2018).

    The first period is labelled September 2011 - December 2014 but is
    normalized by 39 months, the figure the published statistics use
    (logged activity starts in October 2011).
    """
    return PeriodSpec.from_months(
        [
            ("T1", "2011-09", "2014-12"),
            ("T2", "2015-01", "2015-11"),
            ("T3", "2015-12", "2016-05"),
            ("T4", "2016-06", "2018-01"),
        ],
        month_counts=(39, 11, 6, 20),
    )


def parse_periods(value) -> PeriodSpec:
    """Periods from ``"T1:2011-09:2014-12,T2:..."``, a JSON file path, or a dict.

    A JSON document is ``{"periods": [[label, start, end], ...],
    "month_counts": [...]}`` where start/end are ``YYYY-MM`` months.
    """
    if isinstance(value, Mapping):
        triples = [tuple(t) for t in value["periods"]]
        return PeriodSpec.from_months(triples, tuple(value.get("month_counts", ())))
    if isinstance(value, (list, tuple)):
        return PeriodSpec.from_months([tuple(t) for t in value])
    text = str(value)
    path = Path(text)
    if text.endswith(".json") and path.exists():
        return parse_periods(json.loads(path.read_text()))
    triples = []
    for chunk in text.split(","):
        parts = chunk.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"period {chunk!r} is not label:YYYY-MM:YYYY-MM")
        triples.append(tuple(parts))
    return PeriodSpec.from_months(triples)


def slice_periods(log: ActivityLog, spec: PeriodSpec) -> list[ActivityLog]:
    """Split a log by record timestamp, one log per period.

    A record lands in the period of its own timestamp. Parents from earlier
    periods travel along as ``context``.
    """
    buckets: list[list[ActivityRecord]] = [[] for _ in spec.periods]
    for r in log.records:
        i = spec.locate(r.timestamp)
        if i is None:
            raise ActivityLogError(f"record {r.record_id} at {r.timestamp.isoformat()} lies outside all periods")
        buckets[i].append(r)
    lookup = log.lookup
    out = []
    for recs in buckets:
        own = {r.record_id for r in recs}
        ctx = {}
        for r in recs:
            pid = r.parent_id
            while pid is not None and pid not in own and pid not in ctx:
                ctx[pid] = lookup[pid]
                pid = lookup[pid].parent_id
        out.append(ActivityLog(tuple(recs), ctx))
    return out


# --- statistics -------------------------------------------------------------


def per_month(count: int, months: int) -> int:
    """``count / months`` rounded to nearest, halves away from zero."""
    q = Fraction(count, months)
    return int(q + Fraction(1, 2)) if q >= 0 else -int(-q + Fraction(1, 2))


@dataclass(frozen=True)
class PeriodStats:
    label: str
    n_months: int
    n_posts_and_comments: int
    n_commenting_actors: int
    n_reacting_actors: int

    @property
    def posts_and_comments_per_month(self) -> int:
        return per_month(self.n_posts_and_comments, self.n_months)

    @property
    def commenting_actors_per_month(self) -> int:
        return per_month(self.n_commenting_actors, self.n_months)

    @property
    def reacting_actors_per_month(self) -> int:
        return per_month(self.n_reacting_actors, self.n_months)


@dataclass(frozen=True)
class StatsTable:
    """Per-period activity counts with per-month normalization.

    The total row sums months and posts+comments over periods; its actor
    counts are distinct actors over the whole log (an actor active in two
    periods counts once). Averages are totals divided by total months.
    """

    periods: tuple[PeriodStats, ...]
    total: PeriodStats

    @property
    def average(self) -> dict[str, int]:
        t = self.total
        return {
            "posts_and_comments_per_month": t.posts_and_comments_per_month if t.n_months else 0,
            "commenting_actors_per_month": t.commenting_actors_per_month if t.n_months else 0,
            "reacting_actors_per_month": t.reacting_actors_per_month if t.n_months else 0,
        }

    COLUMNS = (
        "period", "n_months", "posts_and_comments", "posts_and_comments_per_month",
        "commenting_actors", "commenting_actors_per_month",
        "reacting_actors", "reacting_actors_per_month",
    )

    def rows(self) -> list[dict]:
        out = []
        for p in self.periods:
            out.append({
                "period": p.label,
                "n_months": p.n_months,
                "posts_and_comments": p.n_posts_and_comments,
                "posts_and_comments_per_month": p.posts_and_comments_per_month,
                "commenting_actors": p.n_commenting_actors,
                "commenting_actors_per_month": p.commenting_actors_per_month,
                "reacting_actors": p.n_reacting_actors,
                "reacting_actors_per_month": p.reacting_actors_per_month,
            })
        avg = self.average
        out.append({"period": "average", "n_months": "", "posts_and_comments": "",
                    "posts_and_comments_per_month": avg["posts_and_comments_per_month"],
                    "commenting_actors": "", "commenting_actors_per_month": avg["commenting_actors_per_month"],
                    "reacting_actors": "", "reacting_actors_per_month": avg["reacting_actors_per_month"]})
        t = self.total
        out.append({"period": "total", "n_months": t.n_months, "posts_and_comments": t.n_posts_and_comments,
                    "posts_and_comments_per_month": "", "commenting_actors": t.n_commenting_actors,
                    "commenting_actors_per_month": "", "reacting_actors": t.n_reacting_actors,
                    "reacting_actors_per_month": ""})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "periods": [r for r in self.rows() if r["period"] not in ("average", "total")],
            "average": self.average,
            "total": {
                "n_months": self.total.n_months,
                "posts_and_comments": self.total.n_posts_and_comments,
                "commenting_actors": self.total.n_commenting_actors,
                "reacting_actors": self.total.n_reacting_actors,
            },
        }


def stats_from_counts(labels, months, posts_and_comments, commenters, reactors,
                      total_commenters=None, total_reactors=None) -> StatsTable:
    """Assemble a :class:`StatsTable` from already-counted columns.

    Distinct-actor totals cannot be derived from per-period counts; pass
    them explicitly, otherwise the column sums are used as an upper bound.
    """
    rows = tuple(
        PeriodStats(lab, m, n, c, r)
        for lab, m, n, c, r in zip(labels, months, posts_and_comments, commenters, reactors)
    )
    total = PeriodStats(
        "total",
        sum(months),
        sum(posts_and_comments),
        sum(commenters) if total_commenters is None else total_commenters,
        sum(reactors) if total_reactors is None else total_reactors,
    )
    return StatsTable(rows, total)


def activity_stats(slices: Sequence[ActivityLog], spec: PeriodSpec) -> StatsTable:
    if len(slices) != len(spec.periods):
        raise ValueError(f"{len(slices)} slices for {len(spec.periods)} periods")
    commenters_all, reactors_all = set(), set()
    pubs, comm, reac = [], [], []
    for s in slices:
        c = {r.author_id for r in s.of_kind(RecordKind.COMMENT)}
        rx = {r.author_id for r in s.of_kind(RecordKind.REACTION)}
        commenters_all |= c
        reactors_all |= rx
        pubs.append(len(s.of_kind(RecordKind.POST, RecordKind.COMMENT)))
        comm.append(len(c))
        reac.append(len(rx))
    return stats_from_counts(spec.labels, spec.month_counts, pubs, comm, reac,
                             len(commenters_all), len(reactors_all))
