"""Cross-validation harness, confusion matrices and report files."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._seeding import derive_seed
from .config import PipelineConfig
from .errors import LengthMismatch, PipelineError
from .folds import kfold_splits, loso_splits, loto_splits
from .ingest import N_CLASSES
from .models.ensemble import vote_trials
from .pipeline import fit_pipeline

log = logging.getLogger(__name__)


@dataclass
class ConfusionMatrix:
    """Rows are true labels, columns predicted labels, both ascending."""

    labels: list
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def accuracy(self):
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def __getitem__(self, key):
        t, p = key
        return int(self.counts[self.labels.index(t), self.labels.index(p)])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["true\\pred"] + list(self.labels))
            for lab, row in zip(self.labels, self.counts):
                w.writerow([lab] + [int(v) for v in row])


def confusion_matrix(true, pred, labels=None):
    true = [int(v) for v in true]
    pred = [int(v) for v in pred]
    if len(true) != len(pred):
        raise LengthMismatch(f"{len(true)} true labels vs {len(pred)} predictions")
    if labels is None:
        labels = sorted(set(true) | set(pred)) or list(range(1, N_CLASSES + 1))
    labels = sorted(int(v) for v in labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(true, pred):
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(labels, counts)


def make_plan(matrix, scheme, k=10, seed=0):
    trials = matrix.trials()
    first = {}
    for i, t in enumerate(matrix.trial_ids):
        first.setdefault(t, i)
    labels = [int(matrix.labels[first[t]]) for t in trials]
    subjects = [matrix.subject_ids[first[t]] for t in trials]
    if scheme == "kfold":
        plan = kfold_splits(trials, labels, k=k, seed=seed)
    elif scheme == "loso":
        plan = loso_splits(trials, subjects)
    elif scheme == "loto":
        plan = loto_splits(trials)
    else:
        raise PipelineError(f"unknown scheme {scheme!r}")
    plan.check(trials)
    return plan


@dataclass
class EvaluationReport:
    scheme: str
    folds: list = field(default_factory=list)
    confusion: ConfusionMatrix | None = None
    predictions: dict = field(default_factory=dict)   # trial_id -> (true, predicted)
    leaderboards: list = field(default_factory=list)
    segment_accuracy: float = 0.0

    @property
    def accuracy(self):
        return self.confusion.accuracy()

    def summary(self):
        return {
            "scheme": self.scheme,
            "pooled_accuracy": self.accuracy,
            "pooled_segment_accuracy": self.segment_accuracy,
            "n_trials": self.confusion.total,
            "folds": self.folds,
        }

    def write(self, out_dir, plot=False):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2) + "\n")
        self.confusion.to_csv(out / "confusion.csv")
        with open(out / "leaderboard.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fold", "kind", "subset", "n_features", "cv_accuracy", "selected"])
            for f, board in enumerate(self.leaderboards):
                for r in board:
                    w.writerow([f, r["kind"], r["subset"], r["n_features"],
                                repr(r["cv_accuracy"]), int(r["selected"])])
        if plot:
            plot_confusion(self.confusion, out / "confusion.png")


def plot_confusion(cm, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(cm.counts, cmap="Blues")
    ax.set_xticks(range(len(cm.labels)), cm.labels)
    ax.set_yticks(range(len(cm.labels)), cm.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(len(cm.labels)):
        for j in range(len(cm.labels)):
            if cm.counts[i, j]:
                ax.text(j, i, int(cm.counts[i, j]), ha="center", va="center", fontsize=8)
    fig.colorbar(im)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def evaluate(matrix, config=None, scheme=None, fitter=None, threads=1):
    """Run the fold plan, refitting the whole pipeline on each training side.

    ``fitter(train_matrix, config, seed=..., threads=...)`` must return an
    object with ``classes`` and ``predict_segments(matrix) -> (labels, proba)``.
    Accuracy is counted per trial after segment voting.
    """
    config = config or PipelineConfig()
    scheme = scheme or config.scheme
    fitter = fitter or fit_pipeline
    if np.any(matrix.labels < 0):
        raise PipelineError("evaluation needs labelled trials")
    plan = make_plan(matrix, scheme, k=config.folds, seed=derive_seed(config.seed, "outer"))
    report = EvaluationReport(plan.scheme)
    first = {}
    for i, t in enumerate(matrix.trial_ids):
        first.setdefault(t, i)
    seg_hits = 0
    for f, (train_ids, test_ids) in enumerate(plan):
        train = matrix.rows_for_trials(train_ids)
        test = matrix.rows_for_trials(test_ids)
        fitted = fitter(train, config, seed=derive_seed(config.seed, "fold", f), threads=threads)
        labels, proba = fitted.predict_segments(test)
        voted = vote_trials(test.trial_ids, labels, proba, fitted.classes)
        hits = 0
        for t in test_ids:
            truth = int(matrix.labels[first[t]])
            pred = int(voted[t][0])
            report.predictions[t] = (truth, pred)
            hits += truth == pred
        seg_hits += int(np.sum(labels == test.labels))
        entry = {"fold": f, "n_train_trials": len(train_ids), "n_test_trials": len(test_ids),
                 "accuracy": hits / len(test_ids),
                 "segment_accuracy": float(np.mean(labels == test.labels))}
        board = getattr(fitted, "leaderboard", None)
        if board is not None:
            report.leaderboards.append(board)
            entry["members"] = [[r["kind"], r["subset"]] for r in board if r["selected"]]
        selection = getattr(fitted, "selection", None)
        if selection is not None:
            log.debug("fold %d selected %d features", f, len(selection.selected))
        report.folds.append(entry)
        log.info("fold %d/%d accuracy %.3f", f + 1, len(plan), entry["accuracy"])
    true = [report.predictions[t][0] for t in matrix.trials()]
    pred = [report.predictions[t][1] for t in matrix.trials()]
    report.confusion = confusion_matrix(true, pred, labels=sorted(set(matrix.labels.tolist())))
    report.segment_accuracy = seg_hits / matrix.shape[0]
    return report


def evaluate_manifest(manifest_path, config=None, scheme=None, threads=1):
    """Load, featurize and evaluate a labelled manifest."""
    from .features import featurize_trials
    from .ingest import load_manifest, load_trials

    config = config or PipelineConfig()
    manifest = load_manifest(manifest_path)
    if not manifest.labeled:
        raise PipelineError("evaluation needs a fully labelled manifest")
    trials = load_trials(manifest, config.schema(), config.sample_rate_hz,
                         config.max_missing_fraction)
    matrix = featurize_trials(trials, config.segment_spec(), config.catalog())
    return evaluate(matrix, config, scheme, threads=threads)
