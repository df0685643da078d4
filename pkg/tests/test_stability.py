from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from commstab.netmodel import Partition
from commstab.stability import (
    contingency,
    modified_rand,
    rand_detail,
    stability_series,
)


def random_partition(rng, units, k):
    return Partition(units, [rng.randint(1, k) for _ in units])


@st.composite
def overlapping_pair(draw):
    pool = [f"a{i}" for i in range(30)]
    u1 = draw(st.lists(st.sampled_from(pool), min_size=2, max_size=30, unique=True))
    extra = draw(st.lists(st.sampled_from(pool), max_size=30, unique=True))
    shared = draw(st.lists(st.sampled_from(u1), min_size=2, max_size=len(u1), unique=True))
    u2 = list(dict.fromkeys(shared + extra))
    l1 = draw(st.lists(st.integers(1, 5), min_size=len(u1), max_size=len(u1)))
    l2 = draw(st.lists(st.integers(1, 5), min_size=len(u2), max_size=len(u2)))
    return Partition(u1, l1), Partition(u2, l2)


class TestModifiedRand:
    def test_identical_is_one(self):
        p = Partition(list("abcdef"), [1, 1, 2, 2, 3, 3])
        assert modified_rand(p, p) == 1.0

    def test_relabelled_identical(self):
        assert modified_rand(Partition(list("abcd"), [1, 1, 2, 2]), Partition(list("abcd"), [2, 2, 1, 1])) == 1.0

    def test_incomers_and_outgoers_ignored(self):
        p1 = Partition(list("abcde"), [1, 1, 2, 2, 1])
        p2 = Partition(list("abcdxy"), [3, 3, 4, 4, 3, 4])
        res = rand_detail(p1, p2)
        assert res.score == 1.0
        assert res.outgoers == ("e",)
        assert res.incomers == ("x", "y")
        assert res.n_shared == 4

    def test_too_little_overlap(self):
        with pytest.raises(ValueError, match="share 1"):
            modified_rand(Partition(["a", "b"], [1, 2]), Partition(["a", "c"], [1, 2]))

    def test_degenerate_all_one_cluster(self):
        p = Partition(list("abc"), [1, 1, 1])
        res = rand_detail(p, p)
        assert res.score == 1.0 and res.degenerate

    @given(overlapping_pair())
    @settings(max_examples=200, deadline=None)
    def test_sklearn_oracle_on_shared_units(self, pair):
        p1, p2 = pair
        table = contingency(p1, p2)
        a1, a2 = p1.assignment, p2.assignment
        x = [a1[u] for u in table.shared_units]
        y = [a2[u] for u in table.shared_units]
        assert modified_rand(p1, p2) == pytest.approx(adjusted_rand_score(x, y), abs=1e-12)

    @given(overlapping_pair())
    @settings(max_examples=100, deadline=None)
    def test_symmetric(self, pair):
        p1, p2 = pair
        assert modified_rand(p1, p2) == pytest.approx(modified_rand(p2, p1), abs=1e-12)

    @given(overlapping_pair(), st.permutations(range(1, 6)))
    @settings(max_examples=100, deadline=None)
    def test_relabeling_invariant(self, pair, perm):
        p1, p2 = pair
        relabel = Partition(p2.units, [perm[c - 1] for c in p2.clusters])
        assert modified_rand(p1, relabel) == modified_rand(p1, p2)

    def test_random_baseline(self):
        rng = random.Random(11)
        units = [f"u{i}" for i in range(100)]
        scores = [modified_rand(random_partition(rng, units, 4), random_partition(rng, units, 4)) for _ in range(200)]
        assert abs(np.mean(scores)) < 0.02

    def test_custom_scorer(self):
        p = Partition(list("abcd"), [1, 1, 2, 2])
        assert modified_rand(p, p, scorer=lambda t: t.n / 10) == 0.4


class TestContingency:
    def test_counts(self):
        t = contingency(Partition(list("abcd"), [1, 1, 2, 2]), Partition(list("dcba"), [1, 2, 2, 2]))
        assert t.shared_units == ("a", "b", "c", "d")
        assert t.counts.tolist() == [[0, 2], [1, 1]]
        assert t.row_sums.tolist() == [2, 2] and t.col_sums.tolist() == [1, 3]


class TestSeries:
    def parts(self):
        return [
            Partition(list("abcd"), [1, 1, 2, 2]),
            Partition(list("abcd"), [1, 1, 2, 2]),
            Partition(list("abcd"), [1, 2, 1, 2]),
        ]

    def test_matrix(self):
        s = stability_series(self.parts())
        assert np.array_equal(np.diag(s.matrix), np.ones(3))
        assert np.array_equal(s.matrix, s.matrix.T)
        assert s.matrix[0, 1] == 1.0

    def test_aggregates(self):
        parts = self.parts()
        m = stability_series(parts).matrix
        assert stability_series(parts, "consecutive-mean").series == pytest.approx((m[0, 1] + m[1, 2]) / 2)
        assert stability_series(parts, "all-pairs-mean").series == pytest.approx((m[0, 1] + m[0, 2] + m[1, 2]) / 3)
        assert stability_series(parts, "min").series == min(m[0, 1], m[0, 2], m[1, 2])

    def test_errors(self):
        with pytest.raises(ValueError):
            stability_series(self.parts()[:1])
        with pytest.raises(ValueError):
            stability_series(self.parts(), "median")

    def test_to_dict(self):
        d = stability_series(self.parts()).to_dict()
        assert d["aggregate"] == "consecutive-mean" and len(d["matrix"]) == 3
