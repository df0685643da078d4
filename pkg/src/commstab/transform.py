"""Projection of two-mode incidence networks to directed actor networks.

The product ``AP . PC . CA`` counts, for owner ``u`` and commenter ``v``,
how many of ``v``'s comments sit on ``u``'s publications, so it points from
content owner to commenter. Networks here are oriented the other way,
commenter -> owner ("``v`` comments to ``u``"), by transposing the product;
``transpose=True`` returns the raw product orientation instead.
"""
from __future__ import annotations

import math
import warnings

import scipy.sparse as sp

from .ingest import ActivityLog, RecordKind, build_two_mode
from .netmodel import OneModeNetwork, TwoModeNetwork

__all__ = [
    "ReductionWarning",
    "multiply_two_mode",
    "comment_network",
    "reaction_network",
    "reduce_network",
    "log_normalize",
    "binarize",
]


class ReductionWarning(UserWarning):
    """Requested more survivors than the network has actors."""


def _check_chain(x: TwoModeNetwork, y: TwoModeNetwork) -> None:
    if x.col_units != y.row_units:
        raise ValueError(
            f"cannot multiply: left has {len(x.col_units)} column units, right has "
            f"{len(y.row_units)} row units, and the ordered sets differ"
        )


def multiply_two_mode(x: TwoModeNetwork, y: TwoModeNetwork) -> TwoModeNetwork:
    """Matrix product over counts; zero entries omitted."""
    _check_chain(x, y)
    prod = x.to_sparse() @ y.to_sparse()
    return TwoModeNetwork.from_sparse(x.row_units, y.col_units, prod)


def _one_mode(left: TwoModeNetwork, right: TwoModeNetwork, transpose: bool) -> tuple[tuple[str, ...], sp.coo_matrix]:
    _check_chain(left, right)
    if left.row_units != right.col_units:
        raise ValueError("closing product must return to the same unit set")
    prod = (left.to_sparse() @ right.to_sparse()).tocoo()
    if not transpose:
        prod = prod.T.tocoo()
    return left.row_units, prod


def _project(log: ActivityLog, children: str, transpose: bool, binary: bool) -> OneModeNetwork:
    ap = build_two_mode(log, "AP")
    pc = build_two_mode(log, "PC" if children == "comments" else "PR")
    ca = build_two_mode(log, "CA" if children == "comments" else "RA")
    ac = multiply_two_mode(ap, pc)
    units, prod = _one_mode(ac, ca, transpose)
    strip = len("actor:")
    names = [u[strip:] for u in units]
    arcs = {}
    for i, j, v in zip(prod.row, prod.col, prod.data):
        if i == j or v == 0:
            continue
        arcs[(names[i], names[j])] = 1 if binary else int(v)
    if children == "comments":
        present = {r.author_id for r in log.of_kind(RecordKind.POST, RecordKind.COMMENT)}
    else:
        present = {r.author_id for r in log.of_kind(RecordKind.REACTION)}
    present |= {a for arc in arcs for a in arc}
    return OneModeNetwork(tuple(sorted(present)), arcs)


def comment_network(log: ActivityLog, transpose: bool = False) -> OneModeNetwork:
    """Commenter -> owner network weighted by number of comments.

    Actors are the authors of posts and comments in ``log`` plus the owners
    of earlier-period publications that received comments. Self-replies are
    dropped.
    """
    return _project(log, "comments", transpose, binary=False)


def reaction_network(log: ActivityLog, transpose: bool = False) -> OneModeNetwork:
    """Reactor -> owner network; every arc has weight 1 regardless of count.

    Actors are the reactors plus the owners of reacted-to publications.
    """
    return _project(log, "reactions", transpose, binary=True)


def binarize(net: OneModeNetwork) -> OneModeNetwork:
    return OneModeNetwork(net.actors, dict.fromkeys(net.arcs, 1))


def reduce_network(net: OneModeNetwork, top_n: int = 80) -> OneModeNetwork:
    """Keep the ``top_n`` strongest actors and the arcs among them.

    Strength is weighted in-degree plus weighted out-degree; ties go to the
    smaller actor id. Isolated survivors stay.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    if top_n > net.n:
        warnings.warn(
            f"top_n={top_n} exceeds the {net.n} actors; network returned unchanged",
            ReductionWarning,
            stacklevel=2,
        )
        return net
    if top_n == net.n:
        return net
    strength = net.strength()
    ranked = sorted(net.actors, key=lambda a: (-strength[a], a))
    return net.subnetwork(ranked[:top_n])


def log_normalize(net: OneModeNetwork) -> OneModeNetwork:
    """Recode every arc weight ``w`` as ``ln(1 + w)``."""
    low = [arc for arc, w in net.arcs.items() if w < 1]
    if low:
        raise ValueError(f"log_normalize expects raw counts >= 1; arc {low[0]} has weight {net.arcs[low[0]]}")
    return OneModeNetwork(net.actors, {arc: math.log1p(w) for arc, w in net.arcs.items()})
