"""Five-member feature-subset ensemble with a majority-vote combiner."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .._seeding import derive_seed
from ..errors import BadConfig, PipelineError, TooFewTrials
from ..folds import kfold_splits
from .forest import ForestModel, train_forest

FORMAT_VERSION = "mocap-har-ensemble/1"
N_MEMBERS = 5
MIN_TRIALS = 20
_KIND_ORDER = {"rf": 0, "et": 1}


def majority_vote(labels, probas, classes):
    """Plurality label; ties go to the larger summed probability, then the smaller label.

    ``labels`` holds one predicted label per voter and ``probas`` one
    distribution over ``classes`` per voter.
    """
    classes = np.asarray(classes)
    labels = np.asarray(labels)
    votes = np.array([(labels == c).sum() for c in classes])
    tied = votes == votes.max()
    if tied.sum() == 1:
        return classes[np.argmax(tied)]
    mass = np.asarray(probas, dtype=np.float64).sum(axis=0)
    best = mass[tied].max()
    # exact float ties fall through to the smallest label (classes are ascending)
    pick = tied & (mass == best)
    return classes[np.argmax(pick)]


def vote_trials(trial_ids, labels, probas, classes):
    """Collapse segment predictions to one label per trial.

    Returns ``{trial_id: (label, [segment labels])}`` in first-appearance order.
    """
    out = {}
    trial_ids = np.asarray(trial_ids, dtype=object)
    order = []
    for t in trial_ids:
        if t not in out:
            out[t] = None
            order.append(t)
    for t in order:
        rows = np.flatnonzero(trial_ids == t)
        seg_labels = np.asarray(labels)[rows]
        out[t] = (majority_vote(seg_labels, np.asarray(probas)[rows], classes),
                  [int(x) for x in seg_labels])
    return out


@dataclass
class Member:
    kind: str
    subset_index: int
    features: list
    model: ForestModel

    def predict_proba(self, matrix):
        return self.model.predict_proba(matrix.take(self.features))


@dataclass
class EnsembleModel:
    """Trained members plus everything needed to featurize raw trials."""

    members: list
    classes: np.ndarray
    pipeline: dict = field(default_factory=dict)
    version: str = FORMAT_VERSION

    def __post_init__(self):
        if len(self.members) != N_MEMBERS:
            raise PipelineError(f"ensemble needs exactly {N_MEMBERS} members")

    def member_probas(self, matrix):
        """``(n_members, n_rows, n_classes)`` member distributions."""
        return np.stack([m.predict_proba(matrix) for m in self.members])

    def predict_segments(self, matrix):
        """Per-segment vote: returns ``(labels, mean member probability)``."""
        P = self.member_probas(matrix)
        votes = self.classes[P.argmax(axis=2)]          # (members, rows)
        labels = np.array([majority_vote(votes[:, r], P[:, r], self.classes)
                           for r in range(P.shape[1])])
        return labels, P.mean(axis=0)

    def predict_trials(self, matrix):
        labels, proba = self.predict_segments(matrix)
        return vote_trials(matrix.trial_ids, labels, proba, self.classes)

    def composition(self):
        return {k: sum(m.kind == k for m in self.members) for k in ("rf", "et")}

    def to_dict(self):
        return {
            "version": self.version,
            "classes": self.classes.tolist(),
            "pipeline": self.pipeline,
            "members": [{"kind": m.kind, "subset_index": m.subset_index,
                         "features": list(m.features), "forest": m.model.to_dict()}
                        for m in self.members],
        }

    def dumps(self):
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != FORMAT_VERSION:
            raise PipelineError(f"unsupported model version {d.get('version')!r}")
        members = [Member(m["kind"], m["subset_index"], m["features"],
                          ForestModel.from_dict(m["forest"])) for m in d["members"]]
        return cls(members, np.asarray(d["classes"]), d.get("pipeline", {}), d["version"])

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def _trial_labels(matrix):
    trials = matrix.trials()
    first = {t: i for i, t in reversed(list(enumerate(matrix.trial_ids)))}
    return trials, [int(matrix.labels[first[t]]) for t in trials]


def trial_accuracy(matrix, labels, probas, classes):
    voted = vote_trials(matrix.trial_ids, labels, probas, classes)
    trials, truth = _trial_labels(matrix)
    return float(np.mean([voted[t][0] == y for t, y in zip(trials, truth)]))


def _pick_members(board, composition):
    ranked = sorted(board, key=lambda r: (-r["cv_accuracy"], r["subset"], _KIND_ORDER[r["kind"]]))
    if composition is None:
        return ranked[:N_MEMBERS]
    chosen = []
    for kind, count in composition.items():
        pool = [r for r in ranked if r["kind"] == kind]
        if len(pool) < count:
            raise BadConfig(f"composition needs {count} {kind} candidates, only {len(pool)} exist")
        chosen.extend(pool[:count])
    return sorted(chosen, key=ranked.index)


def train_ensemble(matrix, subsets, kinds=("rf", "et"), seed=0, n_trees=300,
                   score_trees=100, inner_folds=10, tree_configs=None,
                   composition=None, threads=1):
    """Score every (kind, subset) candidate by trial-level k-fold CV and keep the top five.

    Returns ``(EnsembleModel, leaderboard)`` where the leaderboard lists one
    dict per candidate with its CV accuracy and whether it was selected.
    ``tree_configs`` maps ``"rf"``/``"et"`` to a :class:`TreeConfig`.
    """
    from .forest import TreeConfig
    tree_configs = tree_configs or {"rf": TreeConfig(split_mode="best"),
                                    "et": TreeConfig(split_mode="random")}
    if np.any(matrix.labels < 0):
        raise PipelineError("training matrix has unlabelled rows")
    classes = np.unique(matrix.labels)
    if len(classes) < 2:
        raise PipelineError("ensemble training needs at least two classes")
    trials, truth = _trial_labels(matrix)
    if len(trials) < MIN_TRIALS:
        raise TooFewTrials(f"ensemble training needs at least {MIN_TRIALS} labelled trials, "
                           f"got {len(trials)}")
    if len(subsets) * len(kinds) < N_MEMBERS:
        raise BadConfig("fewer candidates than ensemble members")

    plan = kfold_splits(trials, truth, k=min(inner_folds, len(trials)),
                        seed=derive_seed(seed, "inner"))
    fold_rows = [(np.isin(matrix.trial_ids, tr), np.isin(matrix.trial_ids, te))
                 for tr, te in plan]

    board = []
    for sub in subsets:
        X = matrix.take(sub.features)
        for kind in kinds:
            labels = np.empty(len(matrix.labels), dtype=np.int64)
            probas = np.empty((len(matrix.labels), len(classes)))
            for f, (tr, te) in enumerate(fold_rows):
                forest = train_forest(X[tr], matrix.labels[tr], n_trees=score_trees,
                                      config=tree_configs[kind], classes=classes,
                                      seed=derive_seed(seed, "score", kind, sub.index, f),
                                      threads=threads)
                probas[te] = forest.predict_proba(X[te])
                labels[te] = classes[probas[te].argmax(axis=1)]
            acc = trial_accuracy(matrix, labels, probas, classes)
            board.append({"kind": kind, "subset": sub.index, "n_features": len(sub.features),
                          "cv_accuracy": acc, "selected": False})

    chosen = _pick_members(board, composition)
    by_index = {s.index: s for s in subsets}
    members = []
    for row in chosen:
        row["selected"] = True
        sub = by_index[row["subset"]]
        forest = train_forest(matrix.take(sub.features), matrix.labels, n_trees=n_trees,
                              config=tree_configs[row["kind"]], classes=classes,
                              seed=derive_seed(seed, "member", row["kind"], sub.index),
                              threads=threads, feature_names=sub.features)
        members.append(Member(row["kind"], sub.index, list(sub.features), forest))
    return EnsembleModel(members, classes), board
