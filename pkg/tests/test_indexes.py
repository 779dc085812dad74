import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from outstream import LinearScanIndex, MTree, VPTree, range_query
from outstream.core import distance


def fill(index, points, payload=False):
    for i, p in enumerate(points):
        if payload:
            index.add(i, tuple(p), payload=i)
        else:
            index.add(i, tuple(p))
    return index


class TestLinearScan:
    def test_basic_range(self):
        idx = fill(LinearScanIndex(1), [(0.0,), (0.4,), (0.9,)])
        assert range_query(idx, (0.0,), 0.45) == {0, 1}

    def test_duplicate_id_rejected(self):
        idx = fill(LinearScanIndex(1), [(0.0,)])
        with pytest.raises(ValueError):
            idx.add(0, (1.0,))

    def test_remove_absent_rejected(self):
        with pytest.raises(ValueError):
            LinearScanIndex(1).remove(7)

    def test_compaction_keeps_survivors(self):
        idx = LinearScanIndex(1)
        for i in range(500):
            idx.add(i, (float(i),))
        for i in range(0, 500, 2):
            idx.remove(i)
        assert len(idx) == 250
        assert range_query(idx, (100.0,), 4.0) == {97, 99, 101, 103}


class TestMTree:
    def test_insert_then_range(self):
        tree = fill(MTree(), [(0.0,), (1.0,), (2.0,), (5.0,)])
        assert range_query(tree, (1.0,), 1.0) == {0, 1, 2}

    def test_empty_tree(self):
        assert range_query(MTree(), (3.0,), 100.0) == set()

    def test_random_points_match_linear_scan(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(0, 1, size=(200, 2))
        tree = fill(MTree(capacity=8), pts)
        ref = fill(LinearScanIndex(2), pts)
        for q in rng.normal(0, 1, size=(50, 2)):
            for r in (0.05, 0.3, 1.0):
                assert range_query(tree, tuple(q), r) == range_query(ref, tuple(q), r)
        tree.check_invariants()

    def test_remove_basic(self):
        tree = fill(MTree(), [(0.0,), (1.0,), (2.0,)])
        tree.remove(1)
        assert range_query(tree, (1.0,), 0.5) == set()

    def test_repeated_insert_remove_is_clean(self):
        tree = MTree(capacity=4)
        for _ in range(10):
            tree.add(42, (3.0,))
            tree.remove(42)
        assert range_query(tree, (3.0,), 10.0) == set()
        tree.add(42, (3.0,))
        assert range_query(tree, (3.0,), 0.0) == {42}

    def test_remove_absent_rejected(self):
        with pytest.raises(ValueError):
            MTree().remove(5)

    def test_duplicate_id_rejected(self):
        tree = fill(MTree(), [(0.0,)])
        with pytest.raises(ValueError):
            tree.add(0, (9.0,))

    def test_interleaved_inserts_and_removals_match_linear_scan(self):
        rng = np.random.default_rng(9)
        tree, ref = MTree(capacity=6), LinearScanIndex(2)
        live = []
        for step in range(1500):
            if live and rng.random() < 0.4:
                pick = live.pop(int(rng.integers(len(live))))
                tree.remove(pick)
                ref.remove(pick)
            else:
                pt = tuple(rng.normal(0, 1, size=2))
                tree.add(step, pt)
                ref.add(step, pt)
                live.append(step)
            if step % 100 == 0:
                q = tuple(rng.normal(0, 1, size=2))
                assert range_query(tree, q, 0.5) == range_query(ref, q, 0.5)
        assert len(tree) == len(ref) == len(live)
        tree.check_invariants()

    def test_radius_zero_returns_exact_duplicates(self):
        tree = fill(MTree(), [(1.0, 2.0), (1.0, 2.0 + 1e-12), (3.0, 4.0)])
        assert range_query(tree, (1.0, 2.0), 0.0) == {0}

    @settings(max_examples=40, derandomize=True, deadline=None)
    @given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                    min_size=1, max_size=60),
           st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
           st.floats(0, 50))
    def test_property_equivalence_with_linear_scan(self, pts, q, r):
        tree = fill(MTree(capacity=5), pts)
        ref = fill(LinearScanIndex(2), pts)
        assert range_query(tree, q, r) == range_query(ref, q, r)


class TestVPTree:
    def test_eight_distinct_points_reach_level_two(self):
        tree = VPTree([(float(i),) for i in range(8)], seed=3)
        nodes = tree.nodes_at_level(2)
        assert len(nodes) == 4
        assert tree.depth == 3    # ceil(log2(8)) levels below the root

    def test_single_point_single_leaf(self):
        tree = VPTree([(1.0,)])
        assert tree.root.is_leaf
        assert tree.depth == 0

    def test_duplicate_heavy_sample_still_builds(self):
        tree = VPTree([(2.0,)] * 16)
        assert tree.root.is_leaf          # ties all fall inside, no split possible
        assert sorted(tree.leaf_ids()) == list(range(16))

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            VPTree([])

    def test_sixteen_partitions_need_level_four(self):
        rng = np.random.default_rng(0)
        tree = VPTree(rng.normal(0, 1, size=(600, 1)), seed=1)
        assert len(tree.nodes_at_level(4)) == 16

    def test_level_one_is_the_root_split(self):
        rng = np.random.default_rng(0)
        tree = VPTree(rng.normal(0, 1, size=(64, 1)))
        assert len(tree.nodes_at_level(1)) == 2

    def test_level_beyond_depth_rejected(self):
        tree = VPTree([(0.0,), (1.0,)])
        with pytest.raises(ValueError):
            tree.nodes_at_level(tree.depth + 1)

    def test_routing_invariant_on_every_root_to_leaf_path(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(0, 1, size=(300, 2))
        tree = VPTree(pts, seed=7)

        def walk(node, idx_set):
            if node.is_leaf:
                for oid in node.ids:
                    assert oid in idx_set
                return
            inside, outside = set(), set()
            for oid in idx_set:
                d = distance(tuple(pts[oid]), tuple(node.vantage))
                (inside if d <= node.threshold else outside).add(oid)
            walk(node.inside, inside)
            walk(node.outside, outside)

        walk(tree.root, set(range(len(pts))))

    def test_range_queries_match_linear_scan(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(0, 1, size=(400, 3))
        tree = VPTree(pts, seed=2)
        ref = fill(LinearScanIndex(3), pts)
        for q in rng.normal(0, 1, size=(40, 3)):
            for r in (0.1, 0.6, 2.0):
                assert range_query(tree, tuple(q), r) == range_query(ref, tuple(q), r)

    def test_all_points_reachable(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(0, 1, size=(257, 2))
        tree = VPTree(pts)
        assert sorted(tree.leaf_ids()) == list(range(257))


def test_three_way_equivalence_manhattan():
    rng = np.random.default_rng(12)
    pts = rng.normal(0, 1, size=(150, 2))
    tree = fill(MTree(metric="manhattan", capacity=6), pts)
    vpt = VPTree(pts, metric="manhattan", seed=0)
    ref = fill(LinearScanIndex(2, metric="manhattan"), pts)
    for q in rng.normal(0, 1, size=(30, 2)):
        for r in (0.2, 0.8):
            want = range_query(ref, tuple(q), r)
            assert range_query(tree, tuple(q), r) == want
            assert range_query(vpt, tuple(q), r) == want


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        range_query(LinearScanIndex(1), (0.0,), -1.0)
