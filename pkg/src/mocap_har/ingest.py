"""Reading marker CSV files and dataset manifests, and repairing gaps."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (AllMissing, BadLabel, DuplicatePath, EmptyFile, MissingColumn,
                     MissingFile, RaggedRow, TooManyMissing)

N_CLASSES = 10
UNLABELED = None

REQUIRED_MARKERS = ("FrontHead", "VSacral", "LShoulder", "RShoulder",
                    "LElbow", "RElbow", "LWrist", "RWrist")
DEFAULT_MARKERS = ("FrontHead", "TopHead", "RearHead", "RShoulder", "RElbow", "RWrist",
                   "LShoulder", "LElbow", "LWrist", "VSacral", "ROffset", "Sternum", "Clavicle")


@dataclass(frozen=True)
class MarkerSchema:
    names: tuple = DEFAULT_MARKERS
    required: tuple = REQUIRED_MARKERS

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "required", tuple(self.required))
        if len(set(self.names)) != len(self.names):
            raise ValueError("marker names must be unique")
        missing = set(self.required) - set(self.names)
        if missing:
            raise ValueError(f"schema lacks required markers: {sorted(missing)}")

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            return -1

    def columns(self):
        return [f"{m}.{ax}" for m in self.names for ax in "XYZ"]


@dataclass(frozen=True)
class Trial:
    """One recording.

    ``frames`` has shape ``(T, n_markers, 3)`` and may hold NaN for missing
    samples until :func:`interpolate_gaps` has been applied.
    """

    trial_id: str
    subject_id: str
    label: int | None
    frames: np.ndarray
    markers: tuple = DEFAULT_MARKERS
    sample_rate_hz: float = 100.0

    @property
    def n_frames(self):
        return self.frames.shape[0]

    def marker(self, name):
        return self.frames[:, self.markers.index(name), :]


@dataclass(frozen=True)
class ManifestRow:
    path: Path
    subject: str
    label: int | None
    entry: str = ""  # path as written in the manifest, used as trial id


@dataclass
class Manifest:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def labeled(self):
        return all(r.label is not None for r in self.rows)


def _parse_label(text, where):
    text = text.strip()
    if text == "":
        return UNLABELED
    try:
        value = int(text)
    except ValueError:
        raise BadLabel(f"{where}: label {text!r} is not an integer") from None
    if not 1 <= value <= N_CLASSES:
        raise BadLabel(f"{where}: label {value} outside 1..{N_CLASSES}")
    return value


def load_manifest(path):
    """Parse a ``path,subject,label`` manifest; relative paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    base = path.parent
    rows, seen = [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["path", "subject", "label"]:
            raise EmptyFile(f"{path}: expected header 'path,subject,label'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 3:
                raise RaggedRow(f"{path}:{lineno}: expected 3 fields, got {len(rec)}")
            entry, subject, label = (c.strip() for c in rec)
            if entry in seen:
                raise DuplicatePath(f"{path}:{lineno}: duplicate path {entry!r}")
            seen.add(entry)
            p = Path(entry)
            rows.append(ManifestRow(p if p.is_absolute() else base / p, subject,
                                    _parse_label(label, f"{path}:{lineno}"), entry))
    if not rows:
        raise EmptyFile(f"{path}: manifest has no rows")
    return Manifest(rows)


def write_manifest(manifest, path):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "subject", "label"])
        for r in manifest:
            entry = r.entry or os.path.relpath(r.path, path.parent)
            w.writerow([entry, r.subject, "" if r.label is None else r.label])


def parse_trial_csv(path, schema=None, meta=None, sample_rate_hz=100.0):
    """Read one trial file into a :class:`Trial` (missing cells become NaN)."""
    schema = schema or MarkerSchema()
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"trial file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: empty file")
        header = [h.strip() for h in header]
        col = {name: i for i, name in enumerate(header)}
        wanted = schema.columns()
        absent = [c for c in wanted if c not in col]
        if absent:
            raise MissingColumn(f"{path}: missing columns {absent[:5]}{'...' if len(absent) > 5 else ''}")
        take = [col[c] for c in wanted]
        width = len(header)
        values = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != width:
                raise RaggedRow(f"{path}:{lineno}: expected {width} fields, got {len(rec)}")
            values.append([rec[i] for i in take])
    if not values:
        raise EmptyFile(f"{path}: header only, no samples")
    try:
        arr = np.array([[float(v) if v.strip() else np.nan for v in row] for row in values])
    except ValueError as exc:
        raise RaggedRow(f"{path}: non-numeric cell ({exc})") from None
    frames = arr.reshape(len(values), len(schema.names), 3)
    if meta is not None:
        trial_id = meta.entry or str(meta.path)
        subject, label = meta.subject, meta.label
    else:
        trial_id, subject, label = path.stem, "", UNLABELED
    return Trial(trial_id, subject, label, frames, schema.names, float(sample_rate_hz))


def write_trial_csv(trial, path, precision=3, time_column=True):
    """Write a trial in the marker CSV layout. NaN cells are written empty."""
    cols = [f"{m}.{ax}" for m in trial.markers for ax in "XYZ"]
    flat = trial.frames.reshape(trial.n_frames, -1)
    fmt = f"%.{precision}f"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join((["time"] if time_column else []) + cols) + "\n")
        for t in range(trial.n_frames):
            cells = ["" if np.isnan(v) else fmt % v for v in flat[t]]
            if time_column:
                cells.insert(0, "%.4f" % (t / trial.sample_rate_hz))
            fh.write(",".join(cells) + "\n")


def fill_missing_1d(values):
    """Linear interpolation over interior NaN runs, constant extension at the ends."""
    v = np.asarray(values, dtype=np.float64)
    ok = np.isfinite(v)
    if ok.all():
        return v.copy()
    if not ok.any():
        raise AllMissing("stream has no valid sample")
    t = np.arange(len(v))
    # np.interp holds the end values constant outside the valid range
    return np.interp(t, t[ok], v[ok])


def interpolate_gaps(trial, max_missing_fraction=0.2):
    """Return a copy of ``trial`` with every missing coordinate sample repaired."""
    frames = trial.frames
    T = frames.shape[0]
    if T < 2:
        raise EmptyFile(f"{trial.trial_id}: need at least 2 frames, got {T}")
    flat = frames.reshape(T, -1)
    missing = ~np.isfinite(flat)
    if not missing.any():
        return trial
    frac = missing.mean(axis=0)
    for j in np.flatnonzero(missing.all(axis=0)):
        m, ax = divmod(j, 3)
        raise AllMissing(f"{trial.trial_id}: {trial.markers[m]}.{'XYZ'[ax]} has no valid sample")
    bad = np.flatnonzero(frac > max_missing_fraction)
    if len(bad):
        m, ax = divmod(bad[0], 3)
        raise TooManyMissing(
            f"{trial.trial_id}: {trial.markers[m]}.{'XYZ'[ax]} is {frac[bad[0]]:.1%} missing "
            f"(cap {max_missing_fraction:.0%})")
    out = flat.copy()
    for j in np.flatnonzero(missing.any(axis=0)):
        out[:, j] = fill_missing_1d(flat[:, j])
    return replace(trial, frames=out.reshape(frames.shape))


def load_trials(manifest, schema=None, sample_rate_hz=100.0, max_missing_fraction=0.2):
    """Parse and repair every trial listed in ``manifest``."""
    return [interpolate_gaps(parse_trial_csv(r.path, schema, r, sample_rate_hz),
                             max_missing_fraction)
            for r in manifest]
