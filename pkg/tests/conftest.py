import numpy as np
import pytest

from mocap_har.config import PipelineConfig
from mocap_har.features import featurize_trials
from mocap_har.ingest import DEFAULT_MARKERS, Trial
from mocap_har.synthgen import SynthSpec, iter_trials

# 3 subjects x 5 classes x 2 trials of 20 s: one segment per trial, 30 trials
SMALL_SPEC = SynthSpec(n_subjects=3, n_classes=5, trials_per_class=2, duration_s=20.0, seed=7)

# forest sizes cut down so that whole-pipeline tests stay quick
FAST_CONFIG = PipelineConfig(n_trees=15, score_trees=8, probe_trees=25, inner_folds=4)


@pytest.fixture(scope="session")
def small_trials():
    return list(iter_trials(SMALL_SPEC))


@pytest.fixture(scope="session")
def small_matrix(small_trials):
    return featurize_trials(small_trials)


@pytest.fixture
def fast_config():
    return FAST_CONFIG


def make_trial(frames, trial_id="t", subject="S01", label=1, markers=DEFAULT_MARKERS, fs=100.0):
    return Trial(trial_id, subject, label, np.asarray(frames, dtype=np.float64), tuple(markers), fs)


@pytest.fixture
def random_trial():
    rng = np.random.default_rng(3)
    frames = 1000 + 50 * rng.standard_normal((400, len(DEFAULT_MARKERS), 3)).cumsum(axis=0) / 20
    return make_trial(frames)
