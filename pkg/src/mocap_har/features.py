"""Per-stream statistical and spectral features, and the segment feature matrix."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import TooShort
from .streams import StreamCatalog, stream_array
from .windowing import SegmentSpec, segment_trial

TIME_FEATURES = ("mean", "median", "min", "max", "std", "skew", "kurt")
SPECTRAL_FEATURES = ("spec_energy", "spec_median", "spec_skew", "spec_kurt")
FEATURES_PER_STREAM = len(TIME_FEATURES) + len(SPECTRAL_FEATURES)

# relative std below which a stream counts as constant
_FLAT_RTOL = 1e-12


def _as_rows(x):
    a = np.asarray(x, dtype=np.float64)
    return a[None, :] if a.ndim == 1 else a


def time_features(x):
    """Row-wise mean, median, min, max, population std, skewness, excess kurtosis.

    ``x`` is ``(L,)`` or ``(n_streams, L)``; returns ``(n_streams, 7)``.
    Constant rows get skewness and kurtosis 0.
    """
    x = _as_rows(x)
    if x.shape[1] < 2:
        raise TooShort("time features need at least 2 samples")
    mean = x.mean(axis=1)
    d = x - mean[:, None]
    d2 = d * d
    m2 = d2.mean(axis=1)
    m3 = np.einsum("ij,ij->i", d2, d) / x.shape[1]
    m4 = np.einsum("ij,ij->i", d2, d2) / x.shape[1]
    lo, hi = x.min(axis=1), x.max(axis=1)
    std = np.sqrt(m2)
    flat = std <= _FLAT_RTOL * np.maximum(np.abs(lo), np.abs(hi))
    safe = np.where(flat, 1.0, m2)
    skew = np.where(flat, 0.0, m3 / (safe * np.sqrt(safe)))
    kurt = np.where(flat, 0.0, m4 / (safe * safe) - 3.0)
    std = np.where(flat, 0.0, std)
    return np.column_stack([mean, np.median(x, axis=1), lo, hi, std, skew, kurt])


def power_spectrum(x, fs):
    """One-sided power of the mean-removed rows, scaled so that ``sum(P) = sum(x - mean)**2``."""
    x = _as_rows(x)
    n = x.shape[1]
    X = np.fft.rfft(x - x.mean(axis=1, keepdims=True), axis=1)
    P = (X.real ** 2 + X.imag ** 2) / n
    if n % 2 == 0:
        P[:, 1:-1] *= 2.0
    else:
        P[:, 1:] *= 2.0
    return np.fft.rfftfreq(n, d=1.0 / fs), P


def spectral_features(x, fs):
    """Row-wise spectral energy, median frequency, spectral skewness and kurtosis.

    Energy is ``sum(P) / n`` and so equals the time-domain variance. The
    median is the lowest frequency where cumulative power reaches half the
    total. Skewness and (excess) kurtosis describe the frequency distribution
    weighted by normalised power. Rows with no power after mean removal get
    all zeros.
    """
    x = _as_rows(x)
    n = x.shape[1]
    if n < 4:
        raise TooShort("spectral features need at least 4 samples")
    freqs, P = power_spectrum(x, fs)
    total = P.sum(axis=1)
    flat = np.sqrt(total / n) <= _FLAT_RTOL * np.abs(x).max(axis=1)
    safe_total = np.where(flat, 1.0, total)
    w = P / safe_total[:, None]
    energy = total / n

    cum = np.cumsum(P, axis=1)
    k = np.argmax(cum >= 0.5 * total[:, None], axis=1)
    median = freqs[k]

    mu = w @ freqs
    d = freqs[None, :] - mu[:, None]
    wd2 = w * d * d
    var = wd2.sum(axis=1)
    peaked = var <= (_FLAT_RTOL * max(freqs[-1], 1.0)) ** 2
    sv = np.where(peaked, 1.0, var)
    skew = np.where(peaked, 0.0, np.einsum("ij,ij->i", wd2, d) / (sv * np.sqrt(sv)))
    kurt = np.where(peaked, 0.0, np.einsum("ij,ij->i", wd2, d * d) / (sv * sv) - 3.0)

    out = np.column_stack([energy, median, skew, kurt])
    out[flat] = 0.0
    return out


def extract_time_features(samples):
    return dict(zip(TIME_FEATURES, time_features(samples)[0]))


def extract_spectral_features(samples, fs):
    return dict(zip(SPECTRAL_FEATURES, spectral_features(samples, fs)[0]))


def segment_features(segment, catalog=None):
    """Feature vector and stream names for one segment, stream-major order."""
    names, _, data = stream_array(segment, catalog)
    feats = np.hstack([time_features(data), spectral_features(data, segment.sample_rate_hz)])
    return names, feats.ravel()


def feature_names(stream_names):
    return [f"{s}.{f}" for s in stream_names for f in TIME_FEATURES + SPECTRAL_FEATURES]


@dataclass
class FeatureMatrix:
    """Segments as rows, named features as columns, plus per-row metadata.

    ``labels`` uses -1 for unlabelled rows.
    """

    columns: list
    values: np.ndarray
    trial_ids: np.ndarray
    subject_ids: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1, len(self.columns))
        self.trial_ids = np.asarray(self.trial_ids, dtype=object)
        self.subject_ids = np.asarray(self.subject_ids, dtype=object)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.values.shape[0]
        if not len(self.trial_ids) == len(self.subject_ids) == len(self.labels) == n:
            raise ValueError("metadata length must match the number of rows")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("column names must be unique")

    @property
    def shape(self):
        return self.values.shape

    def rows(self, mask):
        return FeatureMatrix(list(self.columns), self.values[mask], self.trial_ids[mask],
                             self.subject_ids[mask], self.labels[mask])

    def rows_for_trials(self, trial_ids):
        return self.rows(np.isin(self.trial_ids, list(trial_ids)))

    def column_indices(self, names):
        pos = {c: i for i, c in enumerate(self.columns)}
        try:
            return np.array([pos[n] for n in names], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"feature {exc.args[0]!r} not in matrix") from None

    def take(self, names):
        return self.values[:, self.column_indices(names)]

    def trials(self):
        """Trial ids in first-appearance order."""
        _, first = np.unique(self.trial_ids, return_index=True)
        return list(self.trial_ids[np.sort(first)])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["__trial", "__subject", "__label"] + list(self.columns))
            for i in range(self.values.shape[0]):
                lab = "" if self.labels[i] < 0 else int(self.labels[i])
                w.writerow([self.trial_ids[i], self.subject_ids[i], lab]
                           + [repr(float(v)) for v in self.values[i]])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:3] != ["__trial", "__subject", "__label"]:
                raise ValueError(f"{path}: not a feature matrix file")
            recs = list(reader)
        return cls(header[3:],
                   np.array([[float(v) for v in r[3:]] for r in recs]).reshape(len(recs), -1),
                   [r[0] for r in recs], [r[1] for r in recs],
                   [int(r[2]) if r[2] else -1 for r in recs])


def build_feature_matrix(segments, catalog=None):
    """Stack the features of ``segments`` into a :class:`FeatureMatrix`."""
    catalog = catalog or StreamCatalog()
    if not segments:
        raise ValueError("no segments to featurize")
    rows, names = [], None
    for seg in segments:
        stream_names, vec = segment_features(seg, catalog)
        if names is None:
            names = stream_names
        elif stream_names != names:
            raise ValueError("segments disagree on stream layout")
        rows.append(vec)
    values = np.vstack(rows)
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite feature values; were gaps repaired?")
    return FeatureMatrix(
        feature_names(names), values,
        [s.trial_id for s in segments], [s.subject_id for s in segments],
        [-1 if s.label is None else s.label for s in segments])


def featurize_trials(trials, segment_spec=None, catalog=None):
    """Segment every trial and build one matrix with a row per segment."""
    segment_spec = segment_spec or SegmentSpec()
    segments = [seg for t in trials for seg in segment_trial(t, segment_spec)]
    return build_feature_matrix(segments, catalog)
