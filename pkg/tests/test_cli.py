import csv
import subprocess
import sys

import pytest

from mocap_har.cli import EXIT_IO, EXIT_OK, EXIT_PIPELINE, EXIT_USAGE, main

FAST = "n_trees = 15\nscore_trees = 8\nprobe_trees = 25\ninner_folds = 4\n"


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out", str(d / "data"), "--subjects", "3", "--classes", "5",
                 "--trials", "2", "--duration", "20", "--seed", "7"]) == EXIT_OK
    (d / "fast.cfg").write_text(FAST)
    return d


def _train(d, out, threads=1, seed=None):
    argv = ["train", "--manifest", str(d / "data" / "manifest.csv"),
            "--config", str(d / "fast.cfg"), "--model-out", str(out), "--threads", str(threads)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    return main(argv)


def _unlabelled(d):
    rows = (d / "data" / "manifest.csv").read_text().splitlines()
    out = ["path,subject,label"] + [",".join(r.split(",")[:2]) + "," for r in rows[1:7]]
    p = d / "data" / "unlabelled.csv"
    p.write_text("\n".join(out) + "\n")
    return p


def test_synth_writes_manifest(workdir):
    rows = list(csv.reader(open(workdir / "data" / "manifest.csv")))
    assert rows[0] == ["path", "subject", "label"] and len(rows) == 31
    assert len(list((workdir / "data").glob("S*.csv"))) == 30


def test_synth_rerun_is_byte_identical(workdir, tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--subjects", "3", "--classes", "5",
                 "--trials", "2", "--duration", "20", "--seed", "7"]) == EXIT_OK
    for f in (workdir / "data").glob("S*.csv"):
        assert (tmp_path / f.name).read_bytes() == f.read_bytes()
    assert (tmp_path / "manifest.csv").read_bytes() == (workdir / "data" / "manifest.csv").read_bytes()


def test_synth_bad_class_count(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--classes", "11"]) == EXIT_USAGE


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--threads", "0", "--manifest", "m", "--model-out", "x"])
    assert exc.value.code == EXIT_USAGE


def test_bad_config_exits_2(workdir, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_trees = lots\n")
    assert main(["train", "--manifest", str(workdir / "data" / "manifest.csv"),
                 "--config", str(cfg), "--model-out", str(tmp_path / "m.json")]) == EXIT_USAGE


@pytest.fixture(scope="module")
def model_path(workdir):
    out = workdir / "model.json"
    assert _train(workdir, out) == EXIT_OK
    return out


def test_train_outputs(model_path):
    assert model_path.stat().st_size > 0
    board = list(csv.DictReader(open(model_path.with_name("model.leaderboard.csv"))))
    assert len(board) == 26
    assert sum(int(r["selected"]) for r in board) == 5
    assert not list(model_path.parent.glob(".*tmp*"))


def test_train_unlabelled_exits_4(workdir, tmp_path):
    assert main(["train", "--manifest", str(_unlabelled(workdir)),
                 "--model-out", str(tmp_path / "m.json")]) == EXIT_PIPELINE
    assert not (tmp_path / "m.json").exists()


def test_missing_manifest_exits_3(tmp_path):
    assert main(["train", "--manifest", str(tmp_path / "nope.csv"),
                 "--model-out", str(tmp_path / "m.json")]) == EXIT_IO


def test_predict(workdir, model_path, tmp_path):
    out = tmp_path / "pred.csv"
    assert main(["predict", "--manifest", str(_unlabelled(workdir)), "--model", str(model_path),
                 "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 6
    for r in rows:
        assert 1 <= int(r["predicted_label"]) <= 5
        assert len(r["segment_labels"].split()) == 1


def test_predict_missing_model_exits_3(workdir, tmp_path):
    assert main(["predict", "--manifest", str(workdir / "data" / "manifest.csv"),
                 "--model", str(tmp_path / "none.json"), "--out", str(tmp_path / "p.csv")]) == EXIT_IO


def test_predict_garbage_model_exits_3(workdir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["predict", "--manifest", str(workdir / "data" / "manifest.csv"),
                 "--model", str(bad), "--out", str(tmp_path / "p.csv")]) == EXIT_IO


def test_predict_schema_mismatch_exits_4(workdir, model_path, tmp_path):
    src = workdir / "data" / "manifest.csv"
    first = src.read_text().splitlines()[1].split(",")[0]
    header, *body = (workdir / "data" / first).read_text().splitlines()
    cols = header.split(",")
    keep = [i for i, c in enumerate(cols) if not c.startswith("FrontHead")]
    trial = tmp_path / "cut.csv"
    trial.write_text("\n".join(",".join(line.split(",")[i] for i in keep)
                               for line in [header] + body) + "\n")
    man = tmp_path / "m.csv"
    man.write_text(f"path,subject,label\n{trial},S01,\n")
    assert main(["predict", "--manifest", str(man), "--model", str(model_path),
                 "--out", str(tmp_path / "p.csv")]) == EXIT_PIPELINE
    assert not (tmp_path / "p.csv").exists()


def test_evaluate_writes_report(workdir, tmp_path):
    rep = tmp_path / "nested" / "report"
    assert main(["evaluate", "--manifest", str(workdir / "data" / "manifest.csv"),
                 "--config", str(workdir / "fast.cfg"), "--scheme", "loso",
                 "--report", str(rep)]) == EXIT_OK
    assert {p.name for p in rep.iterdir()} >= {"summary.json", "confusion.csv", "leaderboard.csv"}


def test_evaluate_loso_single_subject_exits_4(workdir, tmp_path):
    rows = (workdir / "data" / "manifest.csv").read_text().splitlines()
    one = [rows[0]] + [r for r in rows[1:] if ",S01," in r]
    man = workdir / "data" / "one_subject.csv"
    man.write_text("\n".join(one) + "\n")
    assert main(["evaluate", "--manifest", str(man), "--config", str(workdir / "fast.cfg"),
                 "--scheme", "loso", "--report", str(tmp_path / "r")]) == EXIT_PIPELINE


def test_train_predict_deterministic_across_threads(workdir, model_path, tmp_path):
    other = tmp_path / "model3.json"
    assert _train(workdir, other, threads=3) == EXIT_OK
    assert other.read_bytes() == model_path.read_bytes()
    preds = []
    for threads, model in ((1, model_path), (2, other)):
        out = tmp_path / f"p{threads}.csv"
        assert main(["predict", "--manifest", str(workdir / "data" / "manifest.csv"),
                     "--model", str(model), "--out", str(out), "--threads", str(threads)]) == 0
        preds.append(out.read_bytes())
    assert preds[0] == preds[1]


def test_seed_changes_model(workdir, model_path, tmp_path):
    other = tmp_path / "m.json"
    assert _train(workdir, other, seed=123) == EXIT_OK
    assert other.read_bytes() != model_path.read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mocap_har", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "synth" in res.stdout
