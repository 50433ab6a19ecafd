"""Flat ``key = value`` pipeline configuration."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import BadConfig
from .ingest import DEFAULT_MARKERS, MarkerSchema
from .models.forest import TreeConfig
from .streams import StreamCatalog
from .windowing import SegmentSpec

SCHEMES = ("kfold", "loso", "loto")
KINDS = ("rf", "et")


@dataclass(frozen=True)
class PipelineConfig:
    # segmentation
    window_s: float = 30.0
    overlap_fraction: float = 0.5
    sample_rate_hz: float = 100.0
    max_missing_fraction: float = 0.2
    markers: str = ",".join(DEFAULT_MARKERS)
    stream_catalog: str = ""          # JSON catalog path; empty = built-in
    # selection
    n_selected: int = 496
    probe_trees: int = 200
    n_subsets: int = 13
    subset_size: int = 200
    # ensemble
    n_trees: int = 300
    score_trees: int = 100
    inner_folds: int = 10
    candidate_kinds: str = "rf,et"
    composition: str = ""             # e.g. "4rf+1et"; empty = free top five
    max_depth: int = 0                # 0 = unlimited
    min_samples_leaf: int = 1
    max_features: str = "sqrt"
    # evaluation
    scheme: str = "kfold"
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        try:
            self.segment_spec()
            self.schema()
            self.tree_config("best")
        except ValueError as exc:
            raise BadConfig(str(exc)) from None
        if self.scheme not in SCHEMES:
            raise BadConfig(f"scheme must be one of {SCHEMES}")
        for name in ("n_selected", "probe_trees", "n_subsets", "subset_size", "n_trees",
                     "score_trees", "inner_folds", "folds"):
            if getattr(self, name) < 1:
                raise BadConfig(f"{name} must be positive")
        if self.inner_folds < 2 or self.folds < 2:
            raise BadConfig("fold counts must be at least 2")
        if not self.kinds() or any(k not in KINDS for k in self.kinds()):
            raise BadConfig(f"candidate_kinds must be drawn from {KINDS}")
        if self.max_missing_fraction < 0 or self.max_missing_fraction > 1:
            raise BadConfig("max_missing_fraction must be in [0, 1]")
        self.pinned_composition()

    def kinds(self):
        return tuple(k.strip() for k in self.candidate_kinds.split(",") if k.strip())

    def pinned_composition(self):
        """``{"rf": 4, "et": 1}`` style dict, or None when unpinned."""
        if not self.composition.strip():
            return None
        out = {}
        for part in self.composition.lower().split("+"):
            part = part.strip()
            digits = part.rstrip("abcdefghijklmnopqrstuvwxyz")
            kind = part[len(digits):]
            if kind not in KINDS or not digits.isdigit():
                raise BadConfig(f"bad composition term {part!r}")
            out[kind] = out.get(kind, 0) + int(digits)
        if sum(out.values()) != 5:
            raise BadConfig("composition must name exactly five members")
        return out

    def segment_spec(self):
        return SegmentSpec(self.window_s, self.overlap_fraction)

    def schema(self):
        return MarkerSchema(tuple(m.strip() for m in self.markers.split(",") if m.strip()))

    def catalog(self):
        if self.stream_catalog:
            return StreamCatalog.load(self.stream_catalog)
        return StreamCatalog()

    def tree_config(self, split_mode):
        mf = self.max_features
        if mf not in ("sqrt", "all"):
            try:
                mf = float(mf) if "." in mf else int(mf)
            except ValueError:
                raise BadConfig(f"bad max_features {mf!r}") from None
        return TreeConfig(max_depth=self.max_depth or None,
                          min_samples_leaf=self.min_samples_leaf,
                          max_features=mf, split_mode=split_mode)

    def to_dict(self):
        return dataclasses.asdict(self)

    def dumps(self):
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())


def parse_config(text, base=None):
    """Build a :class:`PipelineConfig` from ``key = value`` lines (``#`` starts a comment)."""
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise BadConfig(f"line {lineno}: unknown key {key!r}")
        kind = fields[key].type
        try:
            if kind == "int":
                values[key] = int(value)
            elif kind == "float":
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise BadConfig(f"line {lineno}: {key} expects {kind}, got {value!r}") from None
    if base is not None and values.get("stream_catalog"):
        p = Path(values["stream_catalog"])
        if not p.is_absolute():
            values["stream_catalog"] = str(Path(base) / p)
    return PipelineConfig(**values)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base=path.parent)
