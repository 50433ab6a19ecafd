"""End-to-end walkthrough on a small synthetic dataset.

Run with ``python3 demos/end_to_end.py``. It generates trials, featurizes
them, fits the ensemble once, looks at the candidate leaderboard, and then
compares k-fold and leave-one-subject-out accuracy against the naive Bayes
baseline. Forest sizes are reduced so that the script finishes in well under a
minute; drop ``QUICK`` to use the defaults.
"""
import time

import numpy as np

from mocap_har.config import PipelineConfig
from mocap_har.evaluation import evaluate
from mocap_har.features import featurize_trials
from mocap_har.pipeline import fit_nb_pipeline, fit_pipeline, predict_trial
from mocap_har.synthgen import SynthSpec, generate_trial, iter_trials

QUICK = PipelineConfig(n_trees=60, score_trees=25, probe_trees=60, inner_folds=5)

# --- data ---------------------------------------------------------------
# 3 subjects x 6 classes x 4 trials of 40 s -> 72 trials, one 30 s window each
spec = SynthSpec(n_subjects=3, n_classes=6, trials_per_class=4, duration_s=40.0, seed=3)
trials = list(iter_trials(spec))
print(f"{len(trials)} trials, frames per trial {trials[0].frames.shape}")

t0 = time.perf_counter()
matrix = featurize_trials(trials)
print(f"feature matrix {matrix.shape} in {time.perf_counter() - t0:.1f}s")
print("first columns:", matrix.columns[:4], "...", matrix.columns[-2:])

# --- one fit --------------------------------------------------------------
fit = fit_pipeline(matrix, QUICK, seed=0)
print(f"\nselected {len(fit.selection.selected)} features; top five by MDI rank:")
for name in fit.selection.selected[:5]:
    print("   ", name)

print("\ncandidate leaderboard (best 8 of 26):")
board = sorted(fit.leaderboard, key=lambda r: -r["cv_accuracy"])
for r in board[:8]:
    flag = "*" if r["selected"] else " "
    print(f"  {flag} {r['kind']} subset {r['subset']:2d}  inner-CV {r['cv_accuracy']:.3f}")
print("composition:", fit.model.composition())

# --- label a fresh trial ---------------------------------------------------
fresh = generate_trial(SynthSpec(n_subjects=3, n_classes=6, trials_per_class=9,
                                 duration_s=40.0, seed=3), 1, 2, 8)
label, segments = predict_trial(fit.model, fresh)
print(f"\nunseen trial of class {fresh.label}: predicted {label}, window votes {segments}")

# --- cross-validation -------------------------------------------------------
rows = []
for scheme in ("kfold", "loso"):
    for name, fitter in (("ensemble", fit_pipeline), ("naive Bayes", fit_nb_pipeline)):
        t = time.perf_counter()
        rep = evaluate(matrix, QUICK, scheme, fitter=fitter)
        rows.append((scheme, name, rep.accuracy, time.perf_counter() - t))
print()
for scheme, name, acc, secs in rows:
    print(f"{scheme:6s} {name:12s} trial accuracy {acc:.3f}   ({secs:.0f}s)")

rep = evaluate(matrix, QUICK, "loso")
print("\nLOSO confusion (rows true, columns predicted):")
print(np.array2string(rep.confusion.counts))
