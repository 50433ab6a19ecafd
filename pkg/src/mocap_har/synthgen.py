"""Deterministic synthetic MoCap datasets with the challenge layout.

Each class owns a base pose and, per marker axis, a sum of sinusoids with
class-specific frequencies, amplitudes and phases. A subject plays every
class at its own tempo (a time-scale factor in ``1 +/- spread``). On top of
that every single trial is performed a little differently: its phases are
shifted, its amplitudes rescaled and its tempo nudged, by an amount set by
``trial_variability`` (0 switches this off). Finally each sample gets white
Gaussian noise. All random draws come from seeds derived
from ``(seed, unit indices)``, so output never depends on generation order.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._seeding import derive_rng
from .ingest import (DEFAULT_MARKERS, N_CLASSES, Manifest, ManifestRow, Trial,
                     write_manifest, write_trial_csv)

# rough upper-body layout in mm, used as the shared anchor for every class pose
_SKELETON = {
    "FrontHead": (80.0, 0.0, 1650.0),
    "TopHead": (0.0, 0.0, 1720.0),
    "RearHead": (-90.0, 0.0, 1640.0),
    "RShoulder": (0.0, -190.0, 1420.0),
    "RElbow": (20.0, -230.0, 1140.0),
    "RWrist": (180.0, -200.0, 950.0),
    "LShoulder": (0.0, 190.0, 1420.0),
    "LElbow": (20.0, 230.0, 1140.0),
    "LWrist": (180.0, 200.0, 950.0),
    "VSacral": (-100.0, 0.0, 1000.0),
    "ROffset": (-60.0, -120.0, 1300.0),
    "Sternum": (90.0, 0.0, 1300.0),
    "Clavicle": (40.0, 0.0, 1450.0),
}

N_COMPONENTS = 3


@dataclass(frozen=True)
class SynthSpec:
    n_subjects: int = 3
    n_classes: int = 10
    trials_per_class: int = 5
    duration_s: float = 60.0
    sample_rate_hz: float = 100.0
    subject_time_scale_spread: float = 0.15
    noise_std_mm: float = 2.0
    seed: int = 42
    missing_fraction: float = 0.0
    trial_variability: float = 1.0
    markers: tuple = DEFAULT_MARKERS

    def __post_init__(self):
        if self.n_subjects < 2:
            raise ValueError("n_subjects must be >= 2")
        if not 1 <= self.n_classes <= N_CLASSES:
            raise ValueError(f"n_classes must be in 1..{N_CLASSES}")
        if self.trials_per_class < 1:
            raise ValueError("trials_per_class must be >= 1")
        if self.duration_s <= 0 or self.sample_rate_hz <= 0:
            raise ValueError("duration and sample rate must be positive")
        if self.subject_time_scale_spread < 0 or self.noise_std_mm < 0:
            raise ValueError("spread and noise must be non-negative")
        if self.trial_variability < 0:
            raise ValueError("trial_variability must be non-negative")
        if not 0 <= self.missing_fraction < 1:
            raise ValueError("missing_fraction must be in [0, 1)")

    @property
    def n_frames(self):
        return int(round(self.duration_s * self.sample_rate_hz))


def _class_motion(spec, class_index):
    """Base pose and sinusoid parameters of one class, shape (M, 3[, K])."""
    rng = derive_rng(spec.seed, "class", class_index)
    M = len(spec.markers)
    anchor = np.array([_SKELETON.get(m, (0.0, 0.0, 1300.0)) for m in spec.markers])
    pose = anchor + rng.normal(0.0, 40.0, size=(M, 3))
    freq = rng.uniform(0.1, 1.5, size=(M, 3, N_COMPONENTS))
    amp = rng.uniform(5.0, 60.0, size=(M, 3, N_COMPONENTS))
    phase = rng.uniform(0.0, 2 * np.pi, size=(M, 3, N_COMPONENTS))
    return pose, freq, amp, phase


def subject_time_scale(spec, subject_index):
    rng = derive_rng(spec.seed, "subject", subject_index)
    s = spec.subject_time_scale_spread
    return 1.0 + rng.uniform(-s, s) if s > 0 else 1.0


# per unit of trial_variability: posture offset std (mm), phase shift
# half-width (rad), log-amplitude std, relative tempo half-width
_STYLE_POSE = 40.0
_STYLE_PHASE = 2.0
_STYLE_LOG_AMP = 0.8
_STYLE_TEMPO = 0.2


def trial_style(spec, subject_index, class_index, trial_index, shape):
    """Per-trial posture offset ``(M, 3)``, phase offsets and amplitude factors
    (both ``shape``) and tempo factor."""
    v = spec.trial_variability
    if v == 0:
        return np.zeros(shape[:2]), np.zeros(shape), np.ones(shape), 1.0
    rng = derive_rng(spec.seed, "style", subject_index, class_index, trial_index)
    dpose = rng.normal(0.0, _STYLE_POSE * v, size=shape[:2])
    dphase = rng.uniform(-_STYLE_PHASE * v, _STYLE_PHASE * v, size=shape)
    gain = np.exp(rng.normal(0.0, _STYLE_LOG_AMP * v, size=shape))
    tempo = 1.0 + rng.uniform(-_STYLE_TEMPO * v, _STYLE_TEMPO * v)
    return dpose, dphase, gain, tempo


def trial_id_for(subject_index, class_index, trial_index):
    return f"S{subject_index + 1:02d}_A{class_index + 1:02d}_T{trial_index + 1:02d}"


def generate_trial(spec, subject_index, class_index, trial_index):
    """Synthesize one labelled trial; a pure function of ``spec`` and the indices."""
    if not (0 <= subject_index < spec.n_subjects and 0 <= class_index < spec.n_classes
            and 0 <= trial_index < spec.trials_per_class):
        raise ValueError("trial indices outside the SynthSpec ranges")
    pose, freq, amp, phase = _class_motion(spec, class_index)
    dpose, dphase, gain, tempo = trial_style(spec, subject_index, class_index, trial_index,
                                      amp.shape)
    scale = subject_time_scale(spec, subject_index) * tempo
    t = np.arange(spec.n_frames) / spec.sample_rate_hz
    warped = t * scale
    # (T, M, 3, K) summed over components
    waves = (amp * gain) * np.sin(2 * np.pi * freq * warped[:, None, None, None]
                                  + (phase + dphase))
    frames = (pose + dpose) + waves.sum(axis=-1)
    rng = derive_rng(spec.seed, "trial", subject_index, class_index, trial_index)
    if spec.noise_std_mm > 0:
        frames = frames + rng.normal(0.0, spec.noise_std_mm, size=frames.shape)
    if spec.missing_fraction > 0:
        gaps = derive_rng(spec.seed, "gaps", subject_index, class_index, trial_index)
        hole = gaps.random(frames.shape[:2]) < spec.missing_fraction
        frames = frames.copy()
        frames[hole] = np.nan
    return Trial(
        trial_id=trial_id_for(subject_index, class_index, trial_index),
        subject_id=f"S{subject_index + 1:02d}",
        label=class_index + 1,
        frames=frames,
        markers=tuple(spec.markers),
        sample_rate_hz=float(spec.sample_rate_hz),
    )


def iter_trials(spec):
    for s in range(spec.n_subjects):
        for c in range(spec.n_classes):
            for k in range(spec.trials_per_class):
                yield generate_trial(spec, s, c, k)


def generate_dataset(spec, out_dir, precision=3):
    """Write every trial CSV plus ``manifest.csv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for trial in iter_trials(spec):
        name = f"{trial.trial_id}.csv"
        write_trial_csv(trial, out_dir / name, precision=precision)
        rows.append(ManifestRow(out_dir / name, trial.subject_id, trial.label, name))
    manifest = Manifest(rows)
    write_manifest(manifest, out_dir / "manifest.csv")
    return manifest
