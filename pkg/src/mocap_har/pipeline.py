"""End-to-end fitting and prediction: features -> selection -> subsets -> ensemble."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._seeding import derive_seed
from .config import PipelineConfig
from .errors import PipelineError, SingleClass, UnlabeledData
from .features import build_feature_matrix, featurize_trials
from .ingest import interpolate_gaps
from .models.ensemble import EnsembleModel, train_ensemble, vote_trials
from .models.naive_bayes import GaussianNB
from .selection import (chi_square_scores, mdi_importances, partition_feature_subsets,
                        select_features)
from .streams import StreamCatalog
from .windowing import SegmentSpec, segment_trial

log = logging.getLogger(__name__)


@dataclass
class FitResult:
    model: object
    selection: object
    subsets: list
    leaderboard: list

    def predict_segments(self, matrix):
        return self.model.predict_segments(matrix)

    @property
    def classes(self):
        return self.model.classes


def _check_training(matrix):
    if np.any(matrix.labels < 0):
        raise UnlabeledData("training data contains unlabelled trials")
    if len(np.unique(matrix.labels)) < 2:
        raise SingleClass("training data has a single class")


def select(matrix, config, seed, threads=1):
    """Chi-square and MDI scoring followed by hybrid selection."""
    _check_training(matrix)
    if matrix.shape[0] < 10:
        raise PipelineError("feature selection needs at least 10 segments")
    chi2 = chi_square_scores(matrix.values, matrix.labels)
    mdi = mdi_importances(matrix.values, matrix.labels, n_trees=config.probe_trees,
                          seed=derive_seed(seed, "probe"), config=config.tree_config("best"),
                          threads=threads)
    return select_features(matrix.columns, chi2, mdi, target=config.n_selected)


def fit_pipeline(matrix, config=None, seed=None, threads=1):
    """Fit the full ensemble pipeline on a labelled segment feature matrix."""
    config = config or PipelineConfig()
    seed = config.seed if seed is None else seed
    report = select(matrix, config, seed, threads)
    subsets = partition_feature_subsets(report.selected, config.n_subsets, config.subset_size)
    model, board = train_ensemble(
        matrix, subsets, kinds=config.kinds(), seed=derive_seed(seed, "ensemble"),
        n_trees=config.n_trees, score_trees=config.score_trees,
        inner_folds=config.inner_folds,
        tree_configs={"rf": config.tree_config("best"), "et": config.tree_config("random")},
        composition=config.pinned_composition(), threads=threads)
    model.pipeline = {
        "window_s": config.window_s,
        "overlap_fraction": config.overlap_fraction,
        "sample_rate_hz": config.sample_rate_hz,
        "max_missing_fraction": config.max_missing_fraction,
        "markers": list(config.schema().names),
        "catalog": config.catalog().to_dict(),
        "seed": int(seed),
    }
    log.info("ensemble members: %s", [(m.kind, m.subset_index) for m in model.members])
    return FitResult(model, report, subsets, board)


@dataclass
class NaiveBayesPipeline:
    """Selected features fed to Gaussian naive Bayes; the table baseline."""

    model: GaussianNB
    features: list
    selection: object

    @property
    def classes(self):
        return self.model.classes

    def predict_segments(self, matrix):
        proba = self.model.predict_proba(matrix.take(self.features))
        return self.model.classes[proba.argmax(axis=1)], proba


def fit_nb_pipeline(matrix, config=None, seed=None, threads=1):
    config = config or PipelineConfig()
    seed = config.seed if seed is None else seed
    report = select(matrix, config, seed, threads)
    nb = GaussianNB().fit(matrix.take(report.selected), matrix.labels)
    return NaiveBayesPipeline(nb, list(report.selected), report)


def model_featurizer(model):
    p = model.pipeline
    return (SegmentSpec(p["window_s"], p["overlap_fraction"]),
            StreamCatalog.from_dict(p["catalog"]))


def featurize_for_model(model, trials):
    spec, catalog = model_featurizer(model)
    for t in trials:
        missing = set(model.pipeline["markers"]) - set(t.markers)
        if missing:
            raise PipelineError(f"{t.trial_id}: trial lacks markers {sorted(missing)}")
    return featurize_trials(trials, spec, catalog)


def predict_trial(model, trial):
    """Label one raw trial: segment, featurize, vote per segment, then vote over segments.

    Returns ``(label, segment_labels)``.
    """
    trial = interpolate_gaps(trial, model.pipeline.get("max_missing_fraction", 0.2))
    spec, catalog = model_featurizer(model)
    matrix = build_feature_matrix(segment_trial(trial, spec), catalog)
    labels, proba = model.predict_segments(matrix)
    label, seg = vote_trials(matrix.trial_ids, labels, proba, model.classes)[trial.trial_id]
    return int(label), seg


def predict_trials(model, trials):
    """``[(trial_id, label, segment_labels)]`` for every trial, in input order."""
    matrix = featurize_for_model(model, trials)
    labels, proba = model.predict_segments(matrix)
    voted = vote_trials(matrix.trial_ids, labels, proba, model.classes)
    return [(t.trial_id, int(voted[t.trial_id][0]), voted[t.trial_id][1]) for t in trials]


__all__ = ["FitResult", "fit_pipeline", "fit_nb_pipeline", "predict_trial", "predict_trials",
           "select", "featurize_for_model", "EnsembleModel"]
