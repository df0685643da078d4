from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform

from commstab.blockmodel import (
    STRUCTURES,
    BlockModel,
    DissimilarityMatrix,
    agglomerative_cluster,
    classify_structure,
    fit_blockmodel,
    ideal_pattern,
    image_matrix,
    label_positions,
    structural_dissimilarity,
    ward_merges,
)
from commstab.netmodel import OneModeNetwork, Partition
from commstab.stability import modified_rand
from commstab.synth import SynthConfig, generate_planted

from conftest import random_network


def direct_d2(x: np.ndarray, i: int, j: int, p: float) -> float:
    """The corrected Euclidean formula, term by term."""
    total = 0.0
    for s in range(x.shape[0]):
        if s in (i, j):
            continue
        total += (x[i, s] - x[j, s]) ** 2 + (x[s, i] - x[s, j]) ** 2
    return total + p * ((x[i, i] - x[j, j]) ** 2 + (x[i, j] - x[j, i]) ** 2)


class TestDissimilarity:
    def test_hand_example(self):
        net = OneModeNetwork(("a", "b", "c"), {("a", "c"): 1, ("b", "c"): 1, ("a", "b"): 1})
        d = structural_dissimilarity(net, p=1)
        assert d[("a", "b")] ** 2 == pytest.approx(1.0)
        assert structural_dissimilarity(net, p=0)[("a", "b")] == 0.0

    def test_equivalent_pair_is_zero(self):
        net = OneModeNetwork(
            ("a", "b", "c", "d"),
            {("a", "c"): 2, ("b", "c"): 2, ("d", "a"): 1, ("d", "b"): 1, ("a", "b"): 1, ("b", "a"): 1},
        )
        assert structural_dissimilarity(net)[("a", "b")] == 0.0

    @pytest.mark.parametrize("p", [0, 1, 2])
    def test_against_formula(self, rng, p):
        for _ in range(15):
            net = random_network(rng, rng.randint(2, 9), integer=rng.random() < 0.5)
            x = net.adjacency()
            d = structural_dissimilarity(net, p).values
            for i, j in itertools.combinations(range(net.n), 2):
                assert d[i, j] == pytest.approx(np.sqrt(direct_d2(x, i, j, p)), rel=1e-12, abs=1e-12)
            assert np.array_equal(d, d.T)

    def test_too_small(self):
        with pytest.raises(ValueError):
            structural_dissimilarity(OneModeNetwork(("a",)))

    def test_read_only(self):
        d = structural_dissimilarity(random_network(random.Random(1), 4))
        with pytest.raises(ValueError):
            d.values[0, 1] = 5.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DissimilarityMatrix(("a", "b"), np.array([[0.0, 1.0], [2.0, 0.0]]))


def exhaustive_ward_2(values: np.ndarray) -> set[frozenset[int]]:
    """Best split into two clusters by Ward's within-cluster sum of squares."""
    n = values.shape[0]
    sq = values ** 2
    best, arg = np.inf, None
    for mask in range(1, 2 ** (n - 1)):
        a = [i for i in range(n) if mask >> i & 1]
        b = [i for i in range(n) if not mask >> i & 1]
        cost = sum(sq[np.ix_(g, g)].sum() / (2 * len(g)) for g in (a, b))
        if cost < best - 1e-12:
            best, arg = cost, {frozenset(a), frozenset(b)}
    return arg


class TestWard:
    def blobs(self, rng, n):
        cut = rng.randint(1, n - 1)
        side = [0] * cut + [1] * (n - cut)
        rng.shuffle(side)
        v = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            v[i, j] = v[j, i] = rng.uniform(0, 0.1) if side[i] == side[j] else rng.uniform(10, 12)
        return v, side

    def test_well_separated_blobs(self, rng):
        for _ in range(25):
            n = rng.randint(2, 10)
            v, side = self.blobs(rng, n)
            d = DissimilarityMatrix(tuple(f"u{i}" for i in range(n)), v)
            part = agglomerative_cluster(d, 2)
            got = {frozenset(i for i, c in enumerate(part.clusters) if c == k) for k in (1, 2)}
            truth = {frozenset(i for i in range(n) if side[i] == s) for s in (0, 1)}
            assert got == truth == exhaustive_ward_2(v)

    def test_matches_scipy_heights(self, rng):
        for _ in range(20):
            n = rng.randint(2, 25)
            pts = np.array([[rng.gauss(0, 1) for _ in range(3)] for _ in range(n)])
            v = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
            v = (v + v.T) / 2
            np.fill_diagonal(v, 0)
            ours = sorted(h for _, _, h, _ in ward_merges(DissimilarityMatrix(tuple(map(str, range(n))), v)))
            ref = sorted(linkage(squareform(v, checks=False), method="ward")[:, 2])
            assert np.allclose(ours, ref, rtol=1e-9, atol=1e-12)

    def test_trivial_cuts(self, rng):
        d = structural_dissimilarity(random_network(rng, 6))
        assert agglomerative_cluster(d, 6).k == 6
        assert agglomerative_cluster(d, 1).k == 1
        with pytest.raises(ValueError):
            agglomerative_cluster(d, 0)
        with pytest.raises(ValueError):
            agglomerative_cluster(d, 7)

    def test_ties_are_deterministic(self):
        d = DissimilarityMatrix(tuple("abcd"), np.ones((4, 4)) - np.eye(4))
        assert ward_merges(d)[0][:2] == (0, 1)
        assert agglomerative_cluster(d, 3).clusters == (1, 1, 2, 3)

    def test_equivalence_classes_stay_together(self, rng):
        for _ in range(15):
            n_cls = rng.randint(2, 5)
            base = random_network(rng, n_cls, p=0.6)
            x = base.adjacency()
            copies = [rng.randint(1, 3) for _ in range(n_cls)]
            owner = [c for c in range(n_cls) for _ in range(copies[c])]
            big = x[np.ix_(owner, owner)]
            # copies of a class are mutually tied exactly when the class has a loop
            for a, b in itertools.product(range(len(owner)), repeat=2):
                if a != b and owner[a] == owner[b]:
                    big[a, b] = 1.0
            np.fill_diagonal(big, 0)
            actors = tuple(f"w{i}" for i in range(len(owner)))
            net = OneModeNetwork(actors, {(actors[a], actors[b]): float(big[a, b])
                                          for a, b in zip(*np.nonzero(big))})
            d = structural_dissimilarity(net)
            for a, b in itertools.combinations(range(len(owner)), 2):
                if owner[a] == owner[b]:
                    assert d.values[a, b] == 0.0
            for k in range(1, n_cls + 1):
                part = agglomerative_cluster(d, k)
                for a, b in itertools.combinations(range(len(owner)), 2):
                    if owner[a] == owner[b]:
                        assert part.clusters[a] == part.clusters[b]


def brute_density(net: OneModeNetwork, part: Partition) -> np.ndarray:
    k = part.k
    out = np.zeros((k, k))
    for r in range(1, k + 1):
        for c in range(1, k + 1):
            pairs = [(s, t) for s in part.members(r) for t in part.members(c) if s != t]
            out[r - 1, c - 1] = sum((s, t) in net.arcs for s, t in pairs) / len(pairs) if pairs else 0.0
    return out


class TestImage:
    def test_complete_network_k1(self):
        actors = tuple("abcd")
        net = OneModeNetwork(actors, {(a, b): 1 for a in actors for b in actors if a != b})
        bm = fit_blockmodel(net, k=1)
        assert bm.density.tolist() == [[1.0]]
        assert bm.structure == "cohesive-subgroups"

    def test_empty_network_k1(self):
        bm = fit_blockmodel(OneModeNetwork(tuple("abc")), k=1)
        assert bm.structure == "other"

    def test_planted_six(self):
        core, per = ["c1", "c2", "c3"], ["p1", "p2", "p3"]
        arcs = {(a, b): 1 for a in core for b in core if a != b}
        arcs.update({("p1", "c1"): 1, ("p2", "c2"): 1, ("p3", "c3"): 1})
        net = OneModeNetwork(tuple(core + per), arcs)
        bm = image_matrix(net, Partition(net.actors, [1, 1, 1, 2, 2, 2]))
        assert bm.density[0, 0] == 1.0 and bm.density[1, 1] == 0.0
        assert bm.positions == {1: "core", 2: "periphery"}

    def test_density_oracle(self, rng):
        for _ in range(40):
            net = random_network(rng, rng.randint(2, 12), p=rng.random())
            labels = [rng.randint(1, 4) for _ in net.actors]
            part = Partition(net.actors, labels)
            bm = image_matrix(net, part)
            assert np.allclose(bm.density, brute_density(net, part), atol=0, rtol=0)
            overall = len(net.arcs) / (net.n * (net.n - 1))
            for (r, c), v in np.ndenumerate(bm.density):
                assert (bm.block_types[r][c] == "complete") == (v >= 0.5 * max(overall, 1e-9))

    def test_loops_ignored(self):
        net = OneModeNetwork(("a", "b"), {("a", "a"): 3, ("a", "b"): 1})
        bm = image_matrix(net, Partition(net.actors, [1, 2]))
        assert bm.density[0, 0] == 0.0

    def test_partition_mismatch(self):
        with pytest.raises(ValueError):
            image_matrix(OneModeNetwork(("a", "b")), Partition(["a", "c"], [1, 2]))

    def test_alpha_bounds(self):
        with pytest.raises(ValueError):
            image_matrix(OneModeNetwork(("a", "b")), Partition(["a", "b"], [1, 2]), alpha=1.0)

    def test_dict_round_trip(self, rng):
        bm = fit_blockmodel(random_network(rng, 10, p=0.4), k=3)
        back = BlockModel.from_dict(bm.to_dict())
        assert back.to_dict() == bm.to_dict()


def model_with_density(diag, offdiag=0.0, sizes=None):
    k = len(diag)
    sizes = sizes or [3] * k
    dens = np.full((k, k), offdiag)
    np.fill_diagonal(dens, diag)
    units = [f"u{c}_{i}" for c in range(k) for i in range(sizes[c])]
    labels = [c + 1 for c in range(k) for _ in range(sizes[c])]
    types = tuple(tuple("complete" if v >= 0.25 else "null" for v in row) for row in dens)
    return label_positions(BlockModel(Partition(units, labels), dens, types, 0.5))


class TestPositions:
    def test_two_clusters(self):
        assert model_with_density([0.9, 0.05]).positions == {1: "core", 2: "periphery"}

    def test_three_clusters(self):
        assert model_with_density([0.9, 0.4, 0.02]).positions == {1: "core", 2: "semi-periphery", 3: "periphery"}

    def test_order_independent(self):
        assert model_with_density([0.02, 0.9, 0.4]).positions == {1: "periphery", 2: "core", 3: "semi-periphery"}

    def test_star_center_is_bridge(self):
        actors = tuple(["hub"] + [f"s{i}" for i in range(6)])
        net = OneModeNetwork(actors, {("hub", s): 1 for s in actors[1:]})
        bm = image_matrix(net, Partition(actors, [1] + [2] * 6))
        assert bm.positions[1] == "bridge"
        assert bm.position_of("hub") == "bridge"

    def test_fit_isolates_star_center(self):
        actors = tuple(["hub"] + [f"s{i}" for i in range(6)])
        net = OneModeNetwork(actors, {("hub", s): 1 for s in actors[1:]})
        bm = fit_blockmodel(net, k=2)
        assert bm.partition.members(1) == ("hub",)
        assert bm.positions[1] == "bridge"

    def test_lone_cluster_after_bridge(self):
        bm = model_with_density([0.0, 0.0], offdiag=1.0, sizes=[1, 4])
        assert bm.positions == {1: "bridge", 2: "periphery"}


def types_of(pattern, perm):
    return pattern[np.ix_(perm, perm)]


class TestStructure:
    def test_examples(self):
        assert classify_structure([["complete", "complete"], ["complete", "null"]]) == "core-periphery"
        assert classify_structure([["complete", "null"], ["null", "complete"]]) == "cohesive-subgroups"
        assert classify_structure([["null", "null"], ["complete", "null"]]) == "hierarchical"

    @pytest.mark.parametrize("structure", STRUCTURES)
    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_ideal_patterns_recognized(self, structure, k):
        assert classify_structure(ideal_pattern(structure, k)) == structure

    def test_patterns_distinct(self):
        for k in (3, 4):
            pats = [ideal_pattern(s, k) for s in STRUCTURES]
            for a, b in itertools.combinations(pats, 2):
                assert not np.array_equal(a, b)

    @given(st.sampled_from(STRUCTURES), st.integers(2, 6), st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_relabeling_invariant(self, structure, k, r):
        pat = ideal_pattern(structure, k)
        perm = list(range(k))
        r.shuffle(perm)
        flips = pat.copy()
        if r.random() < 0.5:
            i, j = r.randrange(k), r.randrange(k)
            flips[i, j] = not flips[i, j]
        assert classify_structure(types_of(flips, perm)) == classify_structure(flips)

    def test_tie_is_other(self):
        # one flip from core-periphery and one from hierarchical
        assert classify_structure([[True, True], [False, False]]) == "other"
        assert classify_structure(np.zeros((2, 2), dtype=bool)) == "hierarchical"

    def test_too_many_clusters(self, rng):
        with pytest.warns(UserWarning, match="limited"):
            assert classify_structure(np.eye(10, dtype=bool)) == "other"
        with pytest.warns(UserWarning):
            bm = fit_blockmodel(random_network(rng, 25, p=0.3), k=10)
        assert bm.k == 10 and bm.structure == "other"


class TestFit:
    def test_deterministic(self, rng):
        net = random_network(rng, 20, p=0.3)
        a, b = fit_blockmodel(net, 3), fit_blockmodel(net, 3)
        assert a.to_dict() == b.to_dict()

    def test_planted_seed_42(self):
        net, truth = generate_planted(SynthConfig(seed=42))
        bm = fit_blockmodel(net, k=2)
        assert modified_rand(bm.partition, truth) >= 0.9
        core = [u for u, c in zip(truth.units, truth.clusters) if c == 1]
        assert sum(bm.position_of(u) == "core" for u in core) >= 0.8 * len(core)
        assert bm.structure == "core-periphery"
