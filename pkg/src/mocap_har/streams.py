"""Derived scalar streams: positions and their derivatives, inter-marker
distances, joint angles, bone elevation angles and angular speeds."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TooShort, UnknownMarker

KINDS = ("position", "velocity", "acceleration", "jerk", "distance", "joint_angle",
         "joint_angle_speed", "planar_angle", "planar_angle_speed")
_ORDER_SUFFIX = ("", ".vel", ".acc", ".jerk")
_PLANE_NORMAL = {"XY": 2, "YZ": 0, "ZX": 1}

DEFAULT_DISTANCES = (
    ("LWrist", "LShoulder"), ("RWrist", "RShoulder"),
    ("VSacral", "LElbow"), ("VSacral", "RElbow"),
    ("FrontHead", "LElbow"), ("FrontHead", "RElbow"),
    ("LWrist", "RWrist"), ("VSacral", "FrontHead"),
    ("LWrist", "VSacral"), ("RWrist", "VSacral"),
)
# (a, vertex, c)
DEFAULT_JOINT_ANGLES = (
    ("LShoulder", "LElbow", "LWrist"), ("RShoulder", "RElbow", "RWrist"),
    ("LElbow", "LShoulder", "VSacral"), ("RElbow", "RShoulder", "VSacral"),
    ("LWrist", "FrontHead", "VSacral"), ("RWrist", "FrontHead", "VSacral"),
    ("FrontHead", "VSacral", "LShoulder"), ("FrontHead", "VSacral", "RShoulder"),
)
DEFAULT_BONES = (
    ("LShoulder", "LElbow"), ("RShoulder", "RElbow"),
    ("LElbow", "LWrist"), ("RElbow", "RWrist"),
    ("VSacral", "FrontHead"), ("LShoulder", "RShoulder"),
)


@dataclass(frozen=True)
class Stream:
    name: str
    kind: str
    samples: np.ndarray


@dataclass(frozen=True)
class StreamCatalog:
    """Which streams to synthesize. The default yields 218 streams for 13 markers."""

    distances: tuple = DEFAULT_DISTANCES
    joint_angles: tuple = DEFAULT_JOINT_ANGLES
    bones: tuple = DEFAULT_BONES
    planes: tuple = ("XY", "YZ", "ZX")
    position_orders: int = 4
    angle_orders: int = 2

    def __post_init__(self):
        for name in ("distances", "joint_angles", "bones", "planes"):
            value = getattr(self, name)
            value = tuple(tuple(v) if not isinstance(v, str) else v for v in value)
            object.__setattr__(self, name, value)
        if not 1 <= self.position_orders <= 4:
            raise ValueError("position_orders must be in 1..4")
        if not 1 <= self.angle_orders <= 2:
            raise ValueError("angle_orders must be in 1..2")
        for p in self.planes:
            if p not in _PLANE_NORMAL:
                raise ValueError(f"unknown plane {p!r}")
        for a, b, c in self.joint_angles:
            if len({a, b, c}) != 3:
                raise ValueError(f"joint angle markers must be distinct: {(a, b, c)}")

    def stream_names(self, markers):
        """``(name, kind)`` pairs in emission order."""
        out = []
        for order in range(self.position_orders):
            for m in markers:
                for ax in "xyz":
                    out.append((f"{m}.{ax}{_ORDER_SUFFIX[order]}", KINDS[order]))
        for a, b in self.distances:
            out.append((f"dist.{a}-{b}", "distance"))
        for a, b, c in self.joint_angles:
            out.append((f"jang.{a}-{b}-{c}", "joint_angle"))
            if self.angle_orders > 1:
                out.append((f"jang.{a}-{b}-{c}.spd", "joint_angle_speed"))
        for a, b in self.bones:
            for plane in self.planes:
                out.append((f"pang.{a}-{b}.{plane}", "planar_angle"))
                if self.angle_orders > 1:
                    out.append((f"pang.{a}-{b}.{plane}.spd", "planar_angle_speed"))
        return out

    def count(self, n_markers):
        return (n_markers * 3 * self.position_orders + len(self.distances)
                + self.angle_orders * (len(self.joint_angles) + len(self.bones) * len(self.planes)))

    def to_dict(self):
        return {
            "distances": [list(d) for d in self.distances],
            "joint_angles": [list(j) for j in self.joint_angles],
            "bones": [list(b) for b in self.bones],
            "planes": list(self.planes),
            "position_orders": self.position_orders,
            "angle_orders": self.angle_orders,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def differentiate(samples, fs):
    """Forward difference scaled by ``fs``; the last value is repeated to keep length.

    Works along axis 0, so a ``(T, ...)`` array differentiates every column.
    """
    s = np.asarray(samples, dtype=np.float64)
    if s.shape[0] < 2:
        raise TooShort("differentiation needs at least 2 samples")
    d = np.empty_like(s)
    d[:-1] = (s[1:] - s[:-1]) * fs
    d[-1] = d[-2]
    return d


def _marker(frames, markers, name):
    try:
        return frames[:, markers.index(name), :]
    except ValueError:
        raise UnknownMarker(f"marker {name!r} not in schema") from None


def _hold_last(values, bad):
    # degenerate frames repeat the previous angle (0 before any valid frame)
    if not bad.any():
        return values
    idx = np.where(~bad, np.arange(len(values)), -1)
    np.maximum.accumulate(idx, out=idx)
    out = np.where(idx >= 0, values[np.maximum(idx, 0)], 0.0)
    return out


def distance(a, b):
    """Per-frame Euclidean distance between two ``(T, 3)`` marker tracks."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def joint_angle(a, b, c):
    """Angle at vertex ``b`` between ``a - b`` and ``c - b``, radians in [0, pi].

    Computed as ``atan2(|v1 x v2|, v1 . v2)``, which equals the arccos of the
    normalised dot product but stays accurate near 0 and pi.
    """
    v1 = np.asarray(a, dtype=np.float64) - b
    v2 = np.asarray(c, dtype=np.float64) - b
    cross = np.linalg.norm(np.cross(v1, v2), axis=1)
    dot = np.einsum("ij,ij->i", v1, v2)
    bad = (np.einsum("ij,ij->i", v1, v1) == 0) | (np.einsum("ij,ij->i", v2, v2) == 0)
    return _hold_last(np.arctan2(cross, dot), bad)


def planar_angle(a, b, plane):
    """Elevation of bone ``a -> b`` out of a coordinate plane, radians in [0, pi/2]."""
    v = np.asarray(b, dtype=np.float64) - a
    n = _PLANE_NORMAL[plane]
    normal = np.abs(v[:, n])
    in_plane = np.sqrt(np.sum(np.delete(v, n, axis=1) ** 2, axis=1))
    bad = (normal == 0) & (in_plane == 0)
    return _hold_last(np.arctan2(normal, in_plane), bad)


def distance_stream(a, b, segment):
    f, m = segment.frames, segment.markers
    return Stream(f"dist.{a}-{b}", "distance", distance(_marker(f, m, a), _marker(f, m, b)))


def joint_angle_stream(a, b, c, segment):
    if len({a, b, c}) != 3:
        raise ValueError("joint angle markers must be distinct")
    f, m = segment.frames, segment.markers
    theta = joint_angle(_marker(f, m, a), _marker(f, m, b), _marker(f, m, c))
    return Stream(f"jang.{a}-{b}-{c}", "joint_angle", theta)


def planar_angle_stream(bone, plane, segment):
    a, b = bone
    f, m = segment.frames, segment.markers
    return Stream(f"pang.{a}-{b}.{plane}", "planar_angle",
                  planar_angle(_marker(f, m, a), _marker(f, m, b), plane))


def stream_array(segment, catalog=None, fs=None):
    """All catalog streams of one segment as ``(names, kinds, (n_streams, L) array)``."""
    catalog = catalog or StreamCatalog()
    fs = segment.sample_rate_hz if fs is None else fs
    frames = np.asarray(segment.frames, dtype=np.float64)
    markers = tuple(segment.markers)
    T = frames.shape[0]
    if T < 2:
        raise TooShort("segment needs at least 2 frames")
    rows = []
    pos = frames.reshape(T, -1)
    for _ in range(catalog.position_orders):
        rows.append(pos.T)
        pos = differentiate(pos, fs)
    for a, b in catalog.distances:
        rows.append(distance(_marker(frames, markers, a), _marker(frames, markers, b))[None])
    for a, b, c in catalog.joint_angles:
        th = joint_angle(_marker(frames, markers, a), _marker(frames, markers, b),
                         _marker(frames, markers, c))
        rows.append(th[None])
        if catalog.angle_orders > 1:
            rows.append(differentiate(th, fs)[None])
    for a, b in catalog.bones:
        pa, pb = _marker(frames, markers, a), _marker(frames, markers, b)
        for plane in catalog.planes:
            th = planar_angle(pa, pb, plane)
            rows.append(th[None])
            if catalog.angle_orders > 1:
                rows.append(differentiate(th, fs)[None])
    named = catalog.stream_names(markers)
    data = np.vstack(rows)
    assert data.shape[0] == len(named)
    return [n for n, _ in named], [k for _, k in named], data


def synthesize_streams(segment, catalog=None, fs=None):
    """Full stream catalog of a segment as a list of :class:`Stream`."""
    names, kinds, data = stream_array(segment, catalog, fs)
    return [Stream(n, k, data[i]) for i, (n, k) in enumerate(zip(names, kinds))]


def dump_streams_csv(segment, path, catalog=None):
    """Debug helper: one column per stream."""
    names, _, data = stream_array(segment, catalog)
    np.savetxt(path, data.T, delimiter=",", header=",".join(names), comments="", fmt="%.9g")
