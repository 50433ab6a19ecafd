"""Fixed-length overlapped segmentation of trials."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SegmentSpec:
    window_s: float = 30.0
    overlap_fraction: float = 0.5

    def __post_init__(self):
        if not self.window_s > 0:
            raise ValueError("window_s must be positive")
        if not 0 <= self.overlap_fraction < 1:
            raise ValueError("overlap_fraction must be in [0, 1)")

    def frames(self, fs):
        """Window length W and stride S in frames."""
        W = max(1, int(round(self.window_s * fs)))
        S = max(1, int(round(W * (1.0 - self.overlap_fraction))))
        return W, S


@dataclass(frozen=True)
class Segment:
    trial_id: str
    subject_id: str
    label: int | None
    start_frame: int
    frames: np.ndarray  # view into the parent trial, (W, M, 3)
    markers: tuple
    sample_rate_hz: float

    @property
    def length_frames(self):
        return self.frames.shape[0]


def segment_starts(T, W, S):
    if T < W:
        return [0]
    return list(range(0, T - W + 1, S))


def segment_trial(trial, spec=None):
    """Cut ``trial`` into windows; a trial shorter than one window is kept whole."""
    spec = spec or SegmentSpec()
    W, S = spec.frames(trial.sample_rate_hz)
    T = trial.n_frames
    length = min(W, T)
    return [Segment(trial.trial_id, trial.subject_id, trial.label, start,
                    trial.frames[start:start + length], trial.markers, trial.sample_rate_hz)
            for start in segment_starts(T, W, S)]
