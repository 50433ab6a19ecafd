import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocap_har.errors import BadConfig, EmptyData
from mocap_har.models.forest import ForestModel, Tree, TreeConfig, train_forest, train_tree

BEST = TreeConfig(max_features="all")
RANDOM = TreeConfig(max_features="all", split_mode="random")


def _blobs(seed, n=100, p=4, gap=6.0):
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = rng.normal(size=(n, p))
    X[:, 0] += gap * y
    return X, y


def test_single_feature_split():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array(["A", "A", "B", "B"])
    for cfg in (BEST, RANDOM):
        t = train_tree(X, y, cfg, seed=1)
        assert t.feature[0] == 0 and 0 < t.threshold[0] <= 1
        assert list(t.predict(X)) == list(y)


def test_pure_input_is_single_leaf():
    t = train_tree(np.random.default_rng(0).normal(size=(7, 3)), [3] * 7)
    assert t.n_nodes == 1 and t.feature[0] == -1
    np.testing.assert_array_equal(t.predict_proba(np.zeros((2, 3))), [[1.0], [1.0]])


def test_tree_is_seed_pure():
    X, y = _blobs(1, gap=0.5)
    a = train_tree(X, y, TreeConfig(), seed=5)
    b = train_tree(X, y, TreeConfig(), seed=5)
    assert a.to_dict() == b.to_dict()


def test_best_split_matches_exhaustive_search():
    # root split must maximise the weighted Gini decrease over all midpoints
    rng = np.random.default_rng(7)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 3, size=40)

    def gini(lab):
        if len(lab) == 0:
            return 0.0
        p = np.bincount(lab, minlength=3) / len(lab)
        return 1 - np.sum(p * p)

    best = -1.0
    for j in range(3):
        v = np.unique(X[:, j])
        for thr in (v[1:] + v[:-1]) / 2:
            m = X[:, j] < thr
            dec = gini(y) - m.mean() * gini(y[m]) - (1 - m.mean()) * gini(y[~m])
            best = max(best, dec)
    t = train_tree(X, y, BEST, seed=0)
    got = t.impurity[0] - (t.n_samples[t.left[0]] * t.impurity[t.left[0]]
                           + t.n_samples[t.right[0]] * t.impurity[t.right[0]]) / t.n_samples[0]
    assert abs(got - best) < 1e-12


def test_leaves_respect_min_samples_leaf():
    X, y = _blobs(2, gap=0.3)
    t = train_tree(X, y, TreeConfig(min_samples_leaf=7), seed=3)
    leaves = t.feature < 0
    assert np.all(t.n_samples[leaves] >= 7)


def test_max_depth():
    X, y = _blobs(3, gap=0.3)
    t = train_tree(X, y, TreeConfig(max_depth=2, max_features="all"), seed=0)
    depth = np.zeros(t.n_nodes, int)
    for i in range(t.n_nodes):
        if t.feature[i] >= 0:
            depth[t.left[i]] = depth[t.right[i]] = depth[i] + 1
    assert depth.max() <= 2


def test_forest_blobs_train_accuracy():
    X, y = _blobs(4)
    for cfg in (TreeConfig(), TreeConfig(split_mode="random")):
        f = train_forest(X, y, n_trees=25, config=cfg, seed=0)
        assert np.mean(f.predict(X) == y) >= 0.99


def test_forest_proba_is_mean_of_trees():
    X, y = _blobs(5, gap=0.5)
    y = y + 3 * (np.arange(len(y)) % 3 == 0)
    f = train_forest(X, y, n_trees=9, seed=2)
    P = f.predict_proba(X)
    manual = sum(t.predict_proba(X) for t in f.trees) / 9
    np.testing.assert_array_equal(P, manual)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


def test_rf_and_et_build_different_trees():
    X, y = _blobs(6, gap=0.5)
    rf = train_forest(X, y, n_trees=1, config=TreeConfig(), seed=3)
    et = train_forest(X, y, n_trees=1, config=TreeConfig(split_mode="random"), seed=3)
    assert json.dumps(rf.trees[0].to_dict()) != json.dumps(et.trees[0].to_dict())
    assert rf.kind == "rf" and rf.bootstrap and et.kind == "et" and not et.bootstrap


def test_thread_count_does_not_change_forest():
    X, y = _blobs(7, gap=0.5)
    for cfg in (TreeConfig(), TreeConfig(split_mode="random")):
        a = train_forest(X, y, n_trees=12, config=cfg, seed=11, threads=1)
        b = train_forest(X, y, n_trees=12, config=cfg, seed=11, threads=4)
        assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_forest_serialisation_round_trip():
    X, y = _blobs(8, gap=0.4)
    f = train_forest(X, y * 2 + 1, n_trees=7, seed=1, feature_names=list("abcd"))
    g = ForestModel.from_dict(json.loads(json.dumps(f.to_dict())))
    Z = np.random.default_rng(0).normal(size=(100, 4))
    np.testing.assert_array_equal(f.predict_proba(Z), g.predict_proba(Z))
    assert g.feature_names == list("abcd")


def test_importances_normalised():
    X, y = _blobs(9, gap=1.0)
    imp = train_forest(X, y, n_trees=20, seed=0).feature_importances()
    assert abs(imp.sum() - 1) < 1e-12 and np.argmax(imp) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["exp", "cube", "affine"]))
def test_monotone_transform_keeps_predictions(seed, how):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    y = rng.integers(0, 3, size=50)
    f = {"exp": np.exp, "cube": lambda v: v ** 3 + v, "affine": lambda v: 3 * v - 2}[how]
    Z = X.copy()
    Z[:, 1] = f(X[:, 1])
    # full-sample trees: every row is a training row, so it sits on the same
    # side of each re-learned midpoint threshold
    a = train_forest(X, y, n_trees=5, config=TreeConfig(), seed=seed, bootstrap=False)
    b = train_forest(Z, y, n_trees=5, config=TreeConfig(), seed=seed, bootstrap=False)
    np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(Z))
    for ta, tb in zip(a.trees, b.trees):
        np.testing.assert_array_equal(ta.feature, tb.feature)


def test_monotone_transform_random_split_label_distribution():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, size=60)
    Z = X.copy()
    Z[:, 0] = np.exp(X[:, 0])
    for data in (X, Z):
        f = train_forest(data, y, n_trees=10, config=TreeConfig(split_mode="random"), seed=1)
        # fully grown trees on distinct points reproduce the training labels
        assert np.all(f.predict(data) == y)


def test_bad_inputs():
    with pytest.raises(EmptyData):
        train_tree(np.zeros((0, 3)), [])
    with pytest.raises(EmptyData):
        train_tree(np.array([[np.nan]]), [1])
    with pytest.raises(BadConfig):
        TreeConfig(split_mode="greedy")
    with pytest.raises(BadConfig):
        train_forest(np.zeros((3, 1)), [0, 1, 0], n_trees=0)


def test_n_candidates():
    assert TreeConfig().n_candidates(200) == 14
    assert TreeConfig(max_features="all").n_candidates(9) == 9
    assert TreeConfig(max_features=0.5).n_candidates(10) == 5
    assert TreeConfig(max_features=50).n_candidates(10) == 10


def test_constant_features_are_skipped():
    # with mtry 1 the kernel must keep drawing until it finds the informative column
    y = np.repeat([0, 1], 10)
    X = np.zeros((20, 30))
    X[:, 17] = y
    t = train_tree(X, y, TreeConfig(max_features=1), seed=0)
    assert t.feature[0] == 17 and np.all(t.predict(X) == y)


def test_tree_dict_round_trip():
    X, y = _blobs(10, gap=0.3)
    t = train_tree(X, y, seed=4)
    u = Tree.from_dict(t.to_dict(), t.classes)
    np.testing.assert_array_equal(t.predict_proba(X), u.predict_proba(X))
