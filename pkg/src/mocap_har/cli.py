"""Command-line front end: ``synth``, ``train``, ``evaluate`` and ``predict``.

Exit codes: 0 success, 2 bad flags or configuration, 3 unreadable/unwritable
files, 4 data or pipeline errors. Output files are written to a temporary
name and renamed into place, so a failed run never leaves a half-written
model or prediction file behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .errors import BadConfig, EmptyFile, MissingFile, MocapError, PipelineError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PIPELINE = 4

log = logging.getLogger("mocap_har")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a sibling temp file and ``os.replace``."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = PipelineConfig(**{**cfg.to_dict(), "seed": args.seed})
    return cfg


def _leaderboard_csv(board):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "subset", "n_features", "cv_accuracy", "selected"])
    for r in board:
        w.writerow([r["kind"], r["subset"], r["n_features"], repr(r["cv_accuracy"]),
                    int(r["selected"])])
    return buf.getvalue()


def cmd_synth(args):
    from .synthgen import SynthSpec, generate_dataset

    try:
        spec = SynthSpec(n_subjects=args.subjects, n_classes=args.classes,
                         trials_per_class=args.trials, duration_s=args.duration,
                         subject_time_scale_spread=args.spread, noise_std_mm=args.noise,
                         seed=args.seed, missing_fraction=args.missing,
                         trial_variability=args.variability)
    except ValueError as exc:
        print(f"synth: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = generate_dataset(spec, args.out)
    print(f"wrote {len(manifest)} trial files + manifest.csv to {args.out}")
    return EXIT_OK


def _load_matrix(manifest_path, cfg, need_labels):
    from .features import featurize_trials
    from .ingest import load_manifest, load_trials

    manifest = load_manifest(manifest_path)
    if need_labels and not manifest.labeled:
        n = sum(r.label is None for r in manifest)
        raise PipelineError(f"{manifest_path}: {n} unlabelled row(s); training needs labels")
    trials = load_trials(manifest, cfg.schema(), cfg.sample_rate_hz, cfg.max_missing_fraction)
    return featurize_trials(trials, cfg.segment_spec(), cfg.catalog())


def cmd_train(args):
    from .pipeline import fit_pipeline

    cfg = _config(args)
    matrix = _load_matrix(args.manifest, cfg, need_labels=True)
    log.info("feature matrix %d x %d", *matrix.shape)
    fit = fit_pipeline(matrix, cfg, threads=args.threads)
    out = Path(args.model_out)
    board_path = out.with_name(out.stem + ".leaderboard.csv")
    atomic_write_text(out, fit.model.dumps())
    atomic_write_text(board_path, _leaderboard_csv(fit.leaderboard))
    comp = fit.model.composition()
    print(f"model written to {out} ({comp.get('rf', 0)} rf + {comp.get('et', 0)} et); "
          f"leaderboard {board_path}")
    return EXIT_OK


def cmd_evaluate(args):
    from .evaluation import evaluate
    from .pipeline import fit_nb_pipeline, fit_pipeline

    cfg = _config(args)
    scheme = args.scheme or cfg.scheme
    matrix = _load_matrix(args.manifest, cfg, need_labels=True)
    fitter = fit_nb_pipeline if args.baseline == "nb" else fit_pipeline
    report = evaluate(matrix, cfg, scheme, fitter=fitter, threads=args.threads)
    report.write(args.report, plot=args.plot)
    print(f"{scheme} pooled trial accuracy {report.accuracy:.4f} "
          f"({report.confusion.total} trials); report in {args.report}")
    return EXIT_OK


def cmd_predict(args):
    from .ingest import load_manifest, load_trials
    from .models.ensemble import EnsembleModel
    from .pipeline import predict_trials

    try:
        model = EnsembleModel.loads(Path(args.model).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingFile(f"model not found: {args.model}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise EmptyFile(f"{args.model}: not a model file ({exc})") from None
    from .ingest import MarkerSchema

    p = model.pipeline
    manifest = load_manifest(args.manifest)
    trials = load_trials(manifest, MarkerSchema(tuple(p["markers"])), p["sample_rate_hz"],
                         p.get("max_missing_fraction", 0.2))
    rows = predict_trials(model, trials)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial_id", "predicted_label", "segment_labels"])
    for tid, label, seg in rows:
        w.writerow([tid, label, " ".join(str(int(s)) for s in seg)])
    atomic_write_text(args.out, buf.getvalue())
    print(f"wrote {len(rows)} predictions to {args.out}")
    return EXIT_OK


def build_parser():
    ap = _Parser(prog="mocap-har", description="MoCap activity recognition pipeline")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="log progress to stderr (-vv for debug)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--subjects", type=int, default=3)
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--noise", type=_nonneg_float, default=2.0, help="noise std in mm")
    s.add_argument("--spread", type=_nonneg_float, default=0.15,
                   help="subject tempo spread (factor in 1 +/- spread)")
    s.add_argument("--duration", type=float, default=60.0, help="trial length in seconds")
    s.add_argument("--variability", type=_nonneg_float, default=1.0,
                   help="per-trial performance variability (0 = none)")
    s.add_argument("--missing", type=float, default=0.0,
                   help="fraction of marker samples blanked out")
    s.set_defaults(func=cmd_synth)

    def common(p):
        p.add_argument("--manifest", required=True)
        p.add_argument("--config", help="key = value pipeline configuration file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="worker threads; results do not depend on it")

    t = sub.add_parser("train", help="fit the ensemble on a labelled manifest")
    common(t)
    t.add_argument("--model-out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="cross-validate on a labelled manifest")
    common(e)
    e.add_argument("--scheme", choices=("kfold", "loso", "loto"))
    e.add_argument("--report", required=True, help="output directory")
    e.add_argument("--baseline", choices=("ensemble", "nb"), default="ensemble",
                   help="evaluate the ensemble or the Gaussian naive Bayes baseline")
    e.add_argument("--plot", action="store_true", help="also write confusion.png")
    e.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="label the trials of a manifest with a saved model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_predict)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except BadConfig as exc:
        print(f"{args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingFile, EmptyFile, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except MocapError as exc:
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
