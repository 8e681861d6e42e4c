import numpy as np
import pytest

from mogafs.classifier import confusion_tally, predict, train, uar
from mogafs.data import Dataset


def dataset(X, y, n_classes=None):
    y = np.asarray(y, dtype=np.int64)
    n_classes = n_classes or int(y.max()) + 1
    return Dataset(
        X=np.asarray(X, dtype=np.float64),
        y=y,
        label_names=tuple(str(c) for c in range(n_classes)),
    )


class TestTrain:
    def test_linearly_separable_depth_one(self):
        d = dataset([[0.0], [1.0], [10.0], [11.0]], [0, 0, 1, 1])
        tree = train(d, max_depth=100)
        assert tree.depth == 1
        np.testing.assert_array_equal(predict(tree, d), d.y)

    def test_depth_zero_majority_stump(self):
        d = dataset([[0.0], [1.0], [2.0], [3.0], [4.0]], [1, 1, 1, 0, 0])
        tree = train(d, max_depth=0)
        assert tree.node_count == 1
        np.testing.assert_array_equal(predict(tree, d), [1] * 5)

    def test_stump_tie_lowest_class(self):
        d = dataset([[0.0], [1.0], [2.0], [3.0]], [1, 1, 2, 2], n_classes=3)
        tree = train(d, max_depth=0)
        assert tree.leaf_class[0] == 1

    def test_xor_depth_two(self):
        # Hand-enumerated: root splits one axis (zero gain), children split
        # the other; four pure leaves.
        X = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        y = [0, 1, 1, 0]
        d = dataset(X, y)
        tree = train(d, max_depth=2)
        assert tree.depth == 2
        np.testing.assert_array_equal(predict(tree, d), y)

    def test_memorizes_duplicate_free_data(self):
        rng = np.random.default_rng(0)
        d = dataset(rng.standard_normal((40, 3)), rng.integers(0, 3, 40))
        tree = train(d, max_depth=100)
        np.testing.assert_array_equal(predict(tree, d), d.y)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        d = dataset(rng.standard_normal((60, 4)), rng.integers(0, 2, 60))
        t1 = train(d, max_depth=10)
        t2 = train(d, max_depth=10)
        np.testing.assert_array_equal(t1.feature, t2.feature)
        np.testing.assert_array_equal(t1.threshold, t2.threshold)
        np.testing.assert_array_equal(t1.leaf_class, t2.leaf_class)

    def test_empty_view_errors(self):
        d = dataset(np.zeros((0, 2)), np.zeros(0), n_classes=2)
        with pytest.raises(ValueError, match="empty"):
            train(d)

    def test_respects_max_depth(self):
        rng = np.random.default_rng(2)
        d = dataset(rng.standard_normal((200, 5)), rng.integers(0, 2, 200))
        for depth in (1, 2, 3):
            assert train(d, max_depth=depth).depth <= depth


class TestPredict:
    def test_column_mismatch_errors(self):
        d = dataset([[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0]], [0, 0, 1, 1])
        tree = train(d)
        narrow = dataset([[0.0], [1.0]], [0, 1])
        with pytest.raises(ValueError, match="columns"):
            predict(tree, narrow)

    def test_heldout_xor_points(self):
        # Same XOR table; held-out points shifted slightly inside each cell.
        train_d = dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0])
        tree = train(train_d, max_depth=2)
        held = dataset([[0.1, 0.1], [0.1, 0.9], [0.9, 0.1], [0.9, 0.9]], [0, 1, 1, 0])
        np.testing.assert_array_equal(predict(tree, held), held.y)


class TestUar:
    def test_binary_example(self):
        assert uar(np.array([0, 0, 1, 0]), np.array([0, 0, 1, 1]), 2) == pytest.approx(0.75)

    def test_perfect(self):
        y = np.array([0, 1, 2, 1, 0])
        assert uar(y, y, 3) == 1.0

    def test_imbalance_insensitive(self):
        truth = np.array([0] * 90 + [1] * 10)
        preds = np.zeros(100, dtype=int)
        assert uar(preds, truth, 2) == pytest.approx(0.5)

    def test_balanced_truth_equals_accuracy(self):
        rng = np.random.default_rng(3)
        truth = np.array([0, 1] * 50)
        preds = rng.integers(0, 2, 100)
        accuracy = float((preds == truth).mean())
        # Balanced classes: per-class averaging cannot reweight anything.
        assert uar(preds, truth, 2) == pytest.approx(accuracy)

    def test_duplicating_a_class_leaves_uar_unchanged(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            truth = rng.integers(0, 3, 60)
            preds = rng.integers(0, 3, 60)
            if len(np.unique(truth)) < 3:
                continue
            base = uar(preds, truth, 3)
            dup = truth == 1
            truth2 = np.concatenate([truth, truth[dup].repeat(3)])
            preds2 = np.concatenate([preds, preds[dup].repeat(3)])
            assert uar(preds2, truth2, 3) == pytest.approx(base)

    def test_absent_class_excluded(self):
        truth = np.array([0, 0, 1, 1])
        preds = np.array([0, 0, 1, 1])
        assert uar(preds, truth, 5) == 1.0

    def test_length_mismatch_errors(self):
        with pytest.raises(ValueError, match="length"):
            uar(np.array([0]), np.array([0, 1]), 2)

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="empty"):
            uar(np.array([], dtype=int), np.array([], dtype=int), 2)


class TestConfusionTally:
    def test_counts_partition_class_support(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            truth = rng.integers(0, 4, 50)
            preds = rng.integers(0, 4, 50)
            tally = confusion_tally(preds, truth, 4)
            support = np.bincount(truth, minlength=4)
            np.testing.assert_array_equal(tally.tp + tally.fn, support)
            assert (tally.tp >= 0).all() and (tally.fn >= 0).all()

    def test_recalls_match_direct_computation(self):
        truth = np.array([0, 0, 1, 1, 1])
        preds = np.array([0, 1, 1, 1, 0])
        tally = confusion_tally(preds, truth, 2)
        np.testing.assert_allclose(tally.recalls, [0.5, 2 / 3])
