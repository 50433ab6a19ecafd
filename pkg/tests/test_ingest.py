import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocap_har.errors import (AllMissing, BadLabel, DuplicatePath, EmptyFile, MissingColumn,
                              MissingFile, RaggedRow, TooManyMissing)
from mocap_har.ingest import (DEFAULT_MARKERS, REQUIRED_MARKERS, MarkerSchema, fill_missing_1d,
                              interpolate_gaps, load_manifest, load_trials, parse_trial_csv,
                              write_trial_csv)

from conftest import make_trial


def _write_manifest(path, rows):
    path.write_text("path,subject,label\n" + "".join(f"{p},{s},{l}\n" for p, s, l in rows))
    return path


def test_manifest_three_rows(tmp_path):
    m = load_manifest(_write_manifest(tmp_path / "m.csv",
                                      [("a.csv", "S1", 1), ("b.csv", "S1", 2), ("c.csv", "S2", "")]))
    assert len(m) == 3
    assert m.rows[0].path == tmp_path / "a.csv"
    assert m.rows[2].label is None
    assert not m.labeled


def test_manifest_bad_label(tmp_path):
    with pytest.raises(BadLabel):
        load_manifest(_write_manifest(tmp_path / "m.csv", [("a.csv", "S1", 11)]))
    with pytest.raises(BadLabel):
        load_manifest(_write_manifest(tmp_path / "m.csv", [("a.csv", "S1", "x")]))


def test_manifest_duplicate_path(tmp_path):
    with pytest.raises(DuplicatePath):
        load_manifest(_write_manifest(tmp_path / "m.csv", [("a.csv", "S1", 1), ("a.csv", "S2", 2)]))


def test_manifest_missing_and_headerless(tmp_path):
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "nope.csv")
    (tmp_path / "h.csv").write_text("file,who,y\na.csv,S1,1\n")
    with pytest.raises(EmptyFile):
        load_manifest(tmp_path / "h.csv")


def test_schema_rules():
    assert len(MarkerSchema().names) == 13
    assert set(REQUIRED_MARKERS) <= set(DEFAULT_MARKERS)
    with pytest.raises(ValueError):
        MarkerSchema(("LWrist", "LWrist"))
    with pytest.raises(ValueError):
        MarkerSchema(("LWrist", "RWrist"))


def test_parse_two_frames(tmp_path):
    frames = np.arange(2 * 13 * 3, dtype=float).reshape(2, 13, 3)
    write_trial_csv(make_trial(frames), tmp_path / "t.csv")
    t = parse_trial_csv(tmp_path / "t.csv")
    assert t.n_frames == 2
    np.testing.assert_array_equal(t.frames, frames)


def test_parse_missing_column(tmp_path):
    frames = np.zeros((3, 13, 3))
    write_trial_csv(make_trial(frames), tmp_path / "t.csv")
    text = (tmp_path / "t.csv").read_text().replace("LWrist.Z", "LWrist.Q")
    (tmp_path / "t.csv").write_text(text)
    with pytest.raises(MissingColumn):
        parse_trial_csv(tmp_path / "t.csv")


def test_parse_header_only_and_ragged(tmp_path):
    cols = [f"{m}.{a}" for m in DEFAULT_MARKERS for a in "XYZ"]
    (tmp_path / "h.csv").write_text(",".join(cols) + "\n")
    with pytest.raises(EmptyFile):
        parse_trial_csv(tmp_path / "h.csv")
    (tmp_path / "r.csv").write_text(",".join(cols) + "\n" + ",".join(["1"] * 38) + "\n")
    with pytest.raises(RaggedRow):
        parse_trial_csv(tmp_path / "r.csv")


def test_empty_cells_are_nan(tmp_path):
    frames = np.ones((4, 13, 3))
    frames[1, 0, 2] = np.nan
    write_trial_csv(make_trial(frames), tmp_path / "t.csv")
    t = parse_trial_csv(tmp_path / "t.csv")
    assert np.isnan(t.frames[1, 0, 2])
    assert np.isfinite(t.frames).sum() == frames.size - 1


@pytest.mark.parametrize("values, expected", [
    ([1.0, np.nan, 3.0], [1.0, 2.0, 3.0]),
    ([np.nan, 5.0, 5.0], [5.0, 5.0, 5.0]),
    ([4.0, 4.0, 4.0], [4.0, 4.0, 4.0]),
    ([2.0, np.nan, np.nan, 8.0, np.nan], [2.0, 4.0, 6.0, 8.0, 8.0]),
])
def test_fill_missing(values, expected):
    np.testing.assert_allclose(fill_missing_1d(values), expected, rtol=0, atol=0)


def test_fill_all_missing():
    with pytest.raises(AllMissing):
        fill_missing_1d([np.nan, np.nan])


def test_interpolate_cap():
    frames = np.ones((10, 13, 3))
    frames[:3, 4, 1] = np.nan   # 30 % of one coordinate
    with pytest.raises(TooManyMissing):
        interpolate_gaps(make_trial(frames), max_missing_fraction=0.2)
    fixed = interpolate_gaps(make_trial(frames), max_missing_fraction=0.5)
    assert np.all(np.isfinite(fixed.frames))


def test_interpolate_all_missing_coordinate():
    frames = np.ones((10, 13, 3))
    frames[:, 2, 0] = np.nan
    with pytest.raises(AllMissing):
        interpolate_gaps(make_trial(frames), max_missing_fraction=1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 0.19))
def test_interpolate_idempotent_and_finite(seed, frac):
    rng = np.random.default_rng(seed)
    frames = rng.normal(size=(30, 13, 3))
    frames[rng.random(frames.shape) < frac] = np.nan
    # keep one valid sample per coordinate
    frames[0] = np.where(np.isnan(frames[0]), 0.0, frames[0])
    try:
        once = interpolate_gaps(make_trial(frames))
    except TooManyMissing:
        return
    assert np.all(np.isfinite(once.frames))
    twice = interpolate_gaps(once)
    np.testing.assert_array_equal(once.frames, twice.frames)


def test_round_trip_fixed_precision(tmp_path, random_trial):
    trial = make_trial(np.round(random_trial.frames, 3))
    write_trial_csv(trial, tmp_path / "a.csv", precision=3)
    back = parse_trial_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(back.frames, trial.frames)
    write_trial_csv(back, tmp_path / "b.csv", precision=3)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_load_trials_uses_manifest_metadata(tmp_path):
    write_trial_csv(make_trial(np.zeros((5, 13, 3))), tmp_path / "x.csv")
    m = load_manifest(_write_manifest(tmp_path / "m.csv", [("x.csv", "S9", 4)]))
    (t,) = load_trials(m)
    assert (t.trial_id, t.subject_id, t.label) == ("x.csv", "S9", 4)
