"""Random Forest and Extra-Trees classifiers built on the compiled CART kernel."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .._seeding import derive_seed
from ..errors import BadConfig, EmptyData
from ._cart import apply_tree, build_tree


@dataclass(frozen=True)
class TreeConfig:
    """Growth parameters for a single tree.

    ``max_features`` is the number of candidate features tried per split:
    ``"sqrt"``, ``"all"``, an int, or a float fraction of ``p``.
    ``split_mode`` is ``"best"`` (CART thresholds, used by random forests)
    or ``"random"`` (one uniform threshold per candidate, Extra-Trees).
    """

    max_depth: int | None = None
    min_samples_leaf: int = 1
    max_features: int | float | str = "sqrt"
    split_mode: str = "best"

    def __post_init__(self):
        if self.split_mode not in ("best", "random"):
            raise BadConfig(f"split_mode must be 'best' or 'random', got {self.split_mode!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise BadConfig("max_depth must be positive")
        if self.min_samples_leaf < 1:
            raise BadConfig("min_samples_leaf must be positive")

    def n_candidates(self, p):
        mf = self.max_features
        if mf == "sqrt":
            k = int(math.sqrt(p))
        elif mf == "all" or mf is None:
            k = p
        elif isinstance(mf, float):
            k = int(mf * p)
        elif isinstance(mf, int):
            k = mf
        else:
            raise BadConfig(f"bad max_features {mf!r}")
        return max(1, min(p, k))


@dataclass
class Tree:
    """Flattened binary tree. Leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    impurity: np.ndarray
    classes: np.ndarray | None = None

    @property
    def n_nodes(self):
        return len(self.feature)

    def apply(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        return apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict_proba(self, X):
        counts = self.value[self.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def predict(self, X):
        proba = self.predict_proba(X)
        idx = proba.argmax(axis=1)
        return idx if self.classes is None else self.classes[idx]

    def impurity_decrease(self, n_features):
        """Un-normalised MDI: sample-weighted Gini decrease summed per feature."""
        out = np.zeros(n_features)
        internal = np.flatnonzero(self.feature >= 0)
        if len(internal) == 0:
            return out
        w = self.n_samples / self.n_samples[0]
        l, r = self.left[internal], self.right[internal]
        dec = (w[internal] * self.impurity[internal]
               - w[l] * self.impurity[l] - w[r] * self.impurity[r])
        np.add.at(out, self.feature[internal], dec)
        return out

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.astype(np.int64).tolist(),
            "n_samples": self.n_samples.tolist(),
            "impurity": self.impurity.tolist(),
        }

    @classmethod
    def from_dict(cls, d, classes=None):
        return cls(
            feature=np.asarray(d["feature"], np.int64),
            threshold=np.asarray(d["threshold"], np.float64),
            left=np.asarray(d["left"], np.int64),
            right=np.asarray(d["right"], np.int64),
            value=np.asarray(d["value"], np.float64).reshape(len(d["feature"]), -1),
            n_samples=np.asarray(d["n_samples"], np.float64),
            impurity=np.asarray(d["impurity"], np.float64),
            classes=classes,
        )


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyData("training matrix is empty")
    if len(y) != X.shape[0]:
        raise EmptyData("X and y lengths differ")
    if not np.all(np.isfinite(X)):
        raise EmptyData("training matrix contains non-finite values")
    return X, y


def _encode(y, classes):
    classes = np.unique(y) if classes is None else np.asarray(classes)
    pos = np.searchsorted(classes, y)
    pos = np.clip(pos, 0, len(classes) - 1)
    if not np.all(classes[pos] == y):
        raise BadConfig("labels outside the declared class list")
    return classes, pos.astype(np.int64)


class _Prepared:
    """Feature-major copy and per-feature sort order, shared by all trees of a forest."""

    def __init__(self, X, split_mode):
        self.XT = np.ascontiguousarray(X.T)
        if split_mode == "best":
            self.order = np.argsort(self.XT, axis=1, kind="stable").astype(np.int64)
        else:
            self.order = np.empty((0, 0), np.int64)


def _grow(prep, yi, n_classes, weight, config, seed):
    mtry = config.n_candidates(prep.XT.shape[0])
    depth = -1 if config.max_depth is None else config.max_depth
    arrays = build_tree(prep.XT, prep.order, yi, weight.astype(np.float64), n_classes,
                        mtry, depth, config.min_samples_leaf,
                        config.split_mode == "random", np.uint64(seed))
    return Tree(*arrays)


def train_tree(X, y, config=None, seed=0, classes=None):
    """Fit a single CART tree on all rows of ``X``."""
    config = config or TreeConfig()
    X, y = _check_xy(X, y)
    classes, yi = _encode(y, classes)
    tree = _grow(_Prepared(X, config.split_mode), yi, len(classes), np.ones(len(y)), config,
                 derive_seed(seed, "tree"))
    tree.classes = classes
    return tree


@dataclass
class ForestModel:
    trees: list
    classes: np.ndarray
    config: TreeConfig
    bootstrap: bool
    seed: int
    n_features: int
    feature_names: list | None = None

    @property
    def kind(self):
        return "et" if self.config.split_mode == "random" else "rf"

    def predict_proba(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        acc = np.zeros((X.shape[0], len(self.classes)))
        for t in self.trees:
            acc += t.predict_proba(X)
        return acc / len(self.trees)

    def predict(self, X):
        return self.classes[self.predict_proba(X).argmax(axis=1)]

    def feature_importances(self):
        """Mean decrease in impurity, per-tree normalised then averaged."""
        total = np.zeros(self.n_features)
        used = 0
        for t in self.trees:
            imp = t.impurity_decrease(self.n_features)
            s = imp.sum()
            if s > 0:
                total += imp / s
                used += 1
        if used == 0:
            return total
        total /= used
        return total / total.sum()

    def to_dict(self):
        cfg = self.config
        return {
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "config": {
                "max_depth": cfg.max_depth,
                "min_samples_leaf": cfg.min_samples_leaf,
                "max_features": cfg.max_features,
                "split_mode": cfg.split_mode,
            },
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "n_features": self.n_features,
            "feature_names": self.feature_names,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        classes = np.asarray(d["classes"])
        return cls(
            trees=[Tree.from_dict(t, classes) for t in d["trees"]],
            classes=classes,
            config=TreeConfig(**d["config"]),
            bootstrap=d["bootstrap"],
            seed=d["seed"],
            n_features=d["n_features"],
            feature_names=d.get("feature_names"),
        )


def train_forest(X, y, n_trees=300, config=None, seed=0, classes=None,
                 bootstrap=None, threads=1, feature_names=None):
    """Fit a forest of ``n_trees`` trees.

    With ``config.split_mode == "best"`` this is a random forest (bootstrap
    rows by default); with ``"random"`` it is Extra-Trees (full sample by
    default). Tree ``i`` depends only on ``(seed, i)``.
    """
    config = config or TreeConfig()
    if n_trees < 1:
        raise BadConfig("n_trees must be positive")
    X, y = _check_xy(X, y)
    classes, yi = _encode(y, classes)
    if bootstrap is None:
        bootstrap = config.split_mode == "best"
    n = len(yi)
    prep = _Prepared(X, config.split_mode)

    def grow(i):
        if bootstrap:
            rows = np.random.default_rng(derive_seed(seed, "boot", i)).integers(0, n, n)
            weight = np.bincount(rows, minlength=n)
        else:
            weight = np.ones(n)
        t = _grow(prep, yi, len(classes), weight, config, derive_seed(seed, "tree", i))
        t.classes = classes
        return t

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(grow, range(n_trees)))
    else:
        trees = [grow(i) for i in range(n_trees)]
    return ForestModel(trees=trees, classes=classes, config=config, bootstrap=bootstrap,
                       seed=int(seed), n_features=X.shape[1],
                       feature_names=None if feature_names is None else list(feature_names))
