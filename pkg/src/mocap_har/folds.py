"""Trial-level fold plans: stratified k-fold, leave-one-subject-out, leave-one-trial-out."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import derive_rng
from .errors import SingleSubject, TooFewTrials


@dataclass
class FoldPlan:
    scheme: str
    folds: list  # [(train_ids, test_ids), ...]

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)

    def check(self, all_ids=None):
        """Raise ``AssertionError`` on any train/test overlap or coverage gap."""
        seen = []
        for train, test in self.folds:
            overlap = set(train) & set(test)
            assert not overlap, f"trial(s) on both sides of a fold: {sorted(overlap)[:3]}"
            seen.extend(test)
        assert len(seen) == len(set(seen)), "a trial appears in two test folds"
        if all_ids is not None:
            assert set(seen) == set(all_ids), "test folds do not cover every trial"
            for train, test in self.folds:
                assert set(train) | set(test) == set(all_ids)


def kfold_splits(trial_ids, labels, k=10, seed=0):
    """Stratified trial-level folds.

    Trials are shuffled within each class, then dealt round-robin with the
    dealing position carried across classes, so per-class and total fold
    sizes both differ by at most one.
    """
    trial_ids = list(trial_ids)
    labels = np.asarray(labels)
    n = len(trial_ids)
    if k < 2 or n < k:
        raise TooFewTrials(f"{k}-fold CV needs at least {k} trials, got {n}")
    rng = derive_rng(seed, "kfold", k)
    order = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        order.extend(members[rng.permutation(len(members))])
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[np.array(order)] = np.arange(n) % k
    ids = np.array(trial_ids, dtype=object)
    folds = [(list(ids[fold_of != f]), list(ids[fold_of == f])) for f in range(k)]
    return FoldPlan(f"kfold({k})", folds)


def loso_splits(trial_ids, subjects):
    """One fold per subject, holding out all of that subject's trials."""
    trial_ids = list(trial_ids)
    subjects = np.asarray(subjects, dtype=object)
    uniq = sorted(set(subjects))
    if len(uniq) < 2:
        raise SingleSubject("leave-one-subject-out needs at least two subjects")
    ids = np.array(trial_ids, dtype=object)
    folds = [(list(ids[subjects != s]), list(ids[subjects == s])) for s in uniq]
    return FoldPlan("loso", folds)


def loto_splits(trial_ids):
    trial_ids = list(trial_ids)
    if len(trial_ids) < 2:
        raise TooFewTrials("leave-one-trial-out needs at least two trials")
    return FoldPlan("loto", [([t for t in trial_ids if t != held], [held]) for held in trial_ids])
