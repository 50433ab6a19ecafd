"""Feature scoring (chi-square, mean decrease in impurity), hybrid selection,
and the overlapped rank-window feature subsets."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig, SingleClass, TargetTooLarge
from .models.forest import TreeConfig, train_forest


def chi_square_scores(values, labels):
    """Chi-square statistic of each column against the class labels.

    Columns are min-max scaled to [0, 1]; a class's observed mass is the sum
    of its scaled values and its expected mass is the column total times the
    class frequency.
    """
    X = np.asarray(values, dtype=np.float64)
    y = np.asarray(labels)
    classes, yi = np.unique(y, return_inverse=True)
    if len(classes) < 2:
        raise SingleClass("chi-square scoring needs at least two classes")
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    scaled = np.where(span > 0, (X - lo) / np.where(span > 0, span, 1.0), 0.0)
    onehot = np.zeros((len(y), len(classes)))
    onehot[np.arange(len(y)), yi] = 1.0
    observed = onehot.T @ scaled                       # (C, p)
    total = observed.sum(axis=0)
    prior = onehot.sum(axis=0) / len(y)
    expected = prior[:, None] * total[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    score = terms.sum(axis=0)
    score[total <= 0] = 0.0
    return score


def mdi_importances(values, labels, n_trees=200, seed=0, config=None, threads=1):
    """Mean-decrease-in-impurity importance from a probe random forest."""
    y = np.asarray(labels)
    if len(np.unique(y)) < 2:
        raise SingleClass("MDI needs at least two classes")
    forest = train_forest(values, y, n_trees=n_trees, config=config or TreeConfig(),
                          seed=seed, threads=threads)
    return forest.feature_importances()


def _rank(scores):
    # descending; stable so ties keep column order
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


@dataclass
class SelectionReport:
    columns: list
    chi2: np.ndarray
    mdi: np.ndarray
    selected: list      # ordered by MDI rank

    def to_csv(self, path):
        chosen = set(self.selected)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "chi2", "mdi", "selected"])
            for name, c, m in zip(self.columns, self.chi2, self.mdi):
                w.writerow([name, repr(float(c)), repr(float(m)), int(name in chosen)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            recs = list(csv.DictReader(fh))
        columns = [r["feature"] for r in recs]
        chi2 = np.array([float(r["chi2"]) for r in recs])
        mdi = np.array([float(r["mdi"]) for r in recs])
        flagged = {r["feature"] for r in recs if r["selected"] == "1"}
        selected = [columns[i] for i in _rank(mdi) if columns[i] in flagged]
        return cls(columns, chi2, mdi, selected)


def select_features(columns, chi2, mdi, target=496):
    """Top half of the target by MDI, the rest filled from the chi-square ranking.

    Returns a :class:`SelectionReport` whose ``selected`` list is ordered by
    MDI rank.
    """
    columns = list(columns)
    chi2 = np.asarray(chi2, dtype=np.float64)
    mdi = np.asarray(mdi, dtype=np.float64)
    p = len(columns)
    if not len(chi2) == len(mdi) == p:
        raise ValueError("score vectors must cover the same features")
    if target > p:
        raise TargetTooLarge(f"cannot select {target} of {p} features")
    if target < 1:
        raise BadConfig("target must be positive")
    by_mdi = _rank(mdi)
    chosen = np.zeros(p, dtype=bool)
    chosen[by_mdi[:math.ceil(target / 2)]] = True
    for j in _rank(chi2):
        if chosen.sum() >= target:
            break
        chosen[j] = True
    selected = [columns[j] for j in by_mdi if chosen[j]]
    return SelectionReport(columns, chi2, mdi, selected)


@dataclass(frozen=True)
class FeatureSubset:
    index: int
    features: tuple


def partition_feature_subsets(selected, k=13, subset_size=200):
    """``k`` overlapping windows of ``subset_size`` consecutive ranks, wrapping around.

    Window ``i`` starts at rank ``i * (len(selected) // k)``.
    """
    n = len(selected)
    if k < 1 or subset_size < 1 or subset_size > n:
        raise BadConfig(f"cannot cut {k} subsets of {subset_size} from {n} features")
    step = n // k
    return [FeatureSubset(i, tuple(selected[(i * step + r) % n] for r in range(subset_size)))
            for i in range(k)]
