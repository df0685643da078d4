"""From a tiny activity export to comment and reaction networks.

Posts, comments and reactions are linked through their parent ids. The
projection turns them into actor -> owner arcs: ``ben`` commenting twice on
``ana``'s post yields an arc of weight 2, while reactions are counted once
per pair.
"""
from __future__ import annotations

from commstab import comment_network, log_normalize, parse_activity_log, reaction_network, reduce_network

EXPORT = """record_id,kind,parent_id,author_id,timestamp,reaction_kind
p1,post,,ana,2020-01-01T09:00:00Z,
c1,comment,p1,ben,2020-01-01T09:10:00Z,
c2,comment,p1,ben,2020-01-01T09:20:00Z,
c3,comment,c1,cleo,2020-01-01T09:30:00Z,
r1,reaction,p1,cleo,2020-01-01T10:00:00Z,like
r2,reaction,p1,cleo,2020-01-01T10:01:00Z,love
r3,reaction,c3,ana,2020-01-01T10:05:00Z,like
"""


def main() -> None:
    log = parse_activity_log(EXPORT)
    comments = comment_network(log)
    reactions = reaction_network(log)
    print("comment arcs: ", dict(sorted(comments.arcs.items())))
    print("reaction arcs:", dict(sorted(reactions.arcs.items())))

    # keep the two strongest actors, then dampen heavy ties
    small = log_normalize(reduce_network(comments, top_n=2))
    for (a, b), w in sorted(small.arcs.items()):
        print(f"  {a} -> {b}: {w:.3f}")


if __name__ == "__main__":
    main()
