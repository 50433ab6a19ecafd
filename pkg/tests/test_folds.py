import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocap_har.errors import SingleSubject, TooFewTrials
from mocap_har.folds import kfold_splits, loso_splits, loto_splits


def _grid(n_subjects=3, n_classes=10, n_trials=5):
    ids, labels, subjects = [], [], []
    for s in range(n_subjects):
        for c in range(1, n_classes + 1):
            for k in range(n_trials):
                ids.append(f"S{s}_c{c}_t{k}")
                labels.append(c)
                subjects.append(f"S{s}")
    return ids, np.array(labels), subjects


def _assert_partition(plan, ids):
    plan.check(ids)
    tests = [t for _, test in plan for t in test]
    assert sorted(tests) == sorted(ids)
    for train, test in plan:
        assert not set(train) & set(test)
        assert len(train) + len(test) == len(ids)


def test_kfold_sizes_and_stratification():
    ids, labels, _ = _grid()
    plan = kfold_splits(ids, labels, k=10, seed=1)
    assert len(plan) == 10
    _assert_partition(plan, ids)
    lab = dict(zip(ids, labels))
    for _, test in plan:
        assert len(test) == 15
        per_class = np.bincount([lab[t] for t in test], minlength=11)[1:]
        assert per_class.min() >= 1 and per_class.max() <= 2


def test_kfold_is_seeded():
    ids, labels, _ = _grid()
    a = kfold_splits(ids, labels, k=10, seed=3)
    b = kfold_splits(ids, labels, k=10, seed=3)
    c = kfold_splits(ids, labels, k=10, seed=4)
    assert a.folds == b.folds
    assert a.folds != c.folds


def test_kfold_with_k_equal_n_holds_out_single_trials():
    ids, labels, _ = _grid(1, 4, 3)
    plan = kfold_splits(ids, labels, k=len(ids))
    assert sorted(len(test) for _, test in plan) == [1] * len(ids)
    _assert_partition(plan, ids)


def test_kfold_too_few():
    with pytest.raises(TooFewTrials):
        kfold_splits(["a", "b"], [1, 2], k=3)
    with pytest.raises(TooFewTrials):
        kfold_splits(["a", "b"], [1, 2], k=1)


def test_loso_one_fold_per_subject():
    ids, labels, subjects = _grid()
    plan = loso_splits(ids, subjects)
    assert len(plan) == 3
    _assert_partition(plan, ids)
    subj = dict(zip(ids, subjects))
    for _, test in plan:
        assert len(test) == 50
        assert len({subj[t] for t in test}) == 1
    for train, test in plan:
        held = subj[test[0]]
        assert all(subj[t] != held for t in train)


def test_loso_single_subject():
    with pytest.raises(SingleSubject):
        loso_splits(["a", "b"], ["S1", "S1"])


def test_loto():
    ids = ["a", "b", "c"]
    plan = loto_splits(ids)
    assert [test for _, test in plan] == [["a"], ["b"], ["c"]]
    _assert_partition(plan, ids)
    with pytest.raises(TooFewTrials):
        loto_splits(["a"])


def test_check_catches_leakage():
    ids, labels, _ = _grid(1, 3, 4)
    plan = kfold_splits(ids, labels, k=3)
    train, test = plan.folds[0]
    plan.folds[0] = (train + [test[0]], test)
    with pytest.raises(AssertionError):
        plan.check(ids)


def test_check_catches_gaps():
    ids, labels, _ = _grid(1, 3, 4)
    plan = kfold_splits(ids, labels, k=3)
    train, test = plan.folds[0]
    plan.folds[0] = (train, test[1:])
    with pytest.raises(AssertionError):
        plan.check(ids)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 6), st.integers(1, 5), st.integers(2, 12),
       st.integers(0, 10**6))
def test_kfold_never_leaks(n_subjects, n_classes, n_trials, k, seed):
    ids, labels, _ = _grid(n_subjects, n_classes, n_trials)
    if k > len(ids):
        return
    plan = kfold_splits(ids, labels, k=k, seed=seed)
    _assert_partition(plan, ids)
    sizes = [len(test) for _, test in plan]
    assert max(sizes) - min(sizes) <= 1
