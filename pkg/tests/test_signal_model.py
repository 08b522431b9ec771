import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ketamine_eeg.errors import (
    ChannelMismatch,
    InvalidSamplingRate,
    NonFiniteSample,
    RecordingFormatError,
)
from ketamine_eeg.signal_model import (
    CHANNEL_PAIRS,
    FOREHEAD_CHANNELS,
    Group,
    Recording,
    Session,
    load_recording,
    pair_channels,
    save_recording,
    validate_recording,
)

from conftest import sine_recording


def write_csv(path, channels, data, fs=512.0):
    lines = [",".join(("time_s",) + tuple(channels))]
    for i, row in enumerate(np.asarray(data).T):
        lines.append(",".join([repr(i / fs)] + [repr(float(v)) for v in row]))
    path.write_text("\n".join(lines) + "\n")


def write_sidecar(path, **meta):
    base = {"subject_id": "S01", "session": "baseline", "fs_hz": 512.0}
    base.update(meta)
    path.write_text(json.dumps(base))


def test_forehead_channels_and_pairs():
    assert set(FOREHEAD_CHANNELS) == {"Fp1", "Fp2", "AF7", "AF8"}
    assert CHANNEL_PAIRS == {"MidPrefrontal": ("Fp1", "Fp2"), "MidLateral": ("AF7", "AF8")}
    assert {g.value for g in Group} == {"A", "B", "C"}


def test_full_length_recording_is_600_seconds(tmp_path):
    rng = np.random.default_rng(0)
    rec = Recording("S01", Session.BASELINE, 512.0, FOREHEAD_CHANNELS,
                    np.round(rng.standard_normal((4, 307200)), 3))
    save_recording(rec, tmp_path / "r.csv", tmp_path / "r.json")
    back = load_recording(tmp_path / "r.csv", tmp_path / "r.json")
    assert back.n_samples == 307200
    assert back.duration_seconds == 600.0


def test_nan_cell_reports_row_and_channel(tmp_path):
    data = np.ones((4, 10))
    data[2, 6] = np.nan
    write_csv(tmp_path / "r.csv", FOREHEAD_CHANNELS, data)
    write_sidecar(tmp_path / "r.json")
    with pytest.raises(NonFiniteSample) as exc:
        load_recording(tmp_path / "r.csv", tmp_path / "r.json")
    assert exc.value.row == 6
    assert exc.value.channel == FOREHEAD_CHANNELS[2]


@pytest.mark.parametrize("fs", [0, -1, "fast", None])
def test_bad_sampling_rate(tmp_path, fs):
    write_csv(tmp_path / "r.csv", FOREHEAD_CHANNELS, np.ones((4, 10)))
    write_sidecar(tmp_path / "r.json", fs_hz=fs)
    with pytest.raises(InvalidSamplingRate):
        load_recording(tmp_path / "r.csv", tmp_path / "r.json")


def test_recording_invariants():
    with pytest.raises(InvalidSamplingRate):
        Recording("S", Session.BASELINE, 0.0, ("Fp1",), np.ones((1, 4)))
    with pytest.raises(ChannelMismatch):
        Recording("S", Session.BASELINE, 512.0, ("Fp1", "Fp2"), np.ones((1, 4)))
    with pytest.raises(RecordingFormatError):
        Recording("S", Session.BASELINE, 512.0, ("Fp1",), np.ones((1, 0)))
    with pytest.raises(NonFiniteSample):
        Recording("S", Session.BASELINE, 512.0, ("Fp1",), np.array([[1.0, np.inf]]))
    rec = Recording("S", "post240", 256.0, ("Fp1",), np.ones((1, 640)))
    assert rec.session is Session.POST240
    assert rec.duration_seconds == 2.5
    with pytest.raises(ValueError):
        rec.samples[0, 0] = 3.0


def test_ragged_row_is_a_format_error(tmp_path):
    (tmp_path / "r.csv").write_text("time_s,Fp1,Fp2\n0,1,2\n0.1,1\n")
    write_sidecar(tmp_path / "r.json")
    with pytest.raises(RecordingFormatError, match="row 1"):
        load_recording(tmp_path / "r.csv", tmp_path / "r.json")


def test_sidecar_channel_list_must_match(tmp_path):
    write_csv(tmp_path / "r.csv", ("Fp1", "Fp2"), np.ones((2, 5)))
    write_sidecar(tmp_path / "r.json", channels=["Fp2", "Fp1"])
    with pytest.raises(ChannelMismatch):
        load_recording(tmp_path / "r.csv", tmp_path / "r.json")


def test_validation_findings():
    ok = sine_recording(seconds=600.0, fs=16.0)
    assert validate_recording(ok, min_seconds=540) == []
    short = sine_recording(seconds=60.0, fs=16.0)
    assert [f.kind for f in validate_recording(short, min_seconds=540)] == ["TooShort"]
    data = np.array(ok.samples)
    data[1] = 0.0
    flat = ok.with_samples(data)
    found = validate_recording(flat, min_seconds=540)
    assert [(f.kind, f.channel) for f in found] == [("FlatChannel", "Fp1")]
    loud = ok.with_samples(ok.samples * 1000)
    assert {f.kind for f in validate_recording(loud)} == {"AmplitudeOutOfRange"}


def test_pairing_with_other_channels():
    assert pair_channels(("Fp1", "Fp2", "Cz")) == {"MidPrefrontal": ("Fp1", "Fp2")}
    assert pair_channels(("C3", "C4"), {"Central": ("C3", "C4")}) == {"Central": ("C3", "C4")}


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, width=64), min_size=8, max_size=40))
def test_save_load_round_trip_is_bit_exact(tmp_path_factory, values):
    tmp = tmp_path_factory.mktemp("rt")
    data = np.array(values).reshape(1, -1).repeat(2, axis=0)
    data[1] *= -0.1
    rec = Recording("S9", Session.POST240, 500.0, ("AF7", "Fp1"), data)
    save_recording(rec, tmp / "r.csv", tmp / "r.json")
    back = load_recording(tmp / "r.csv", tmp / "r.json")
    assert back.channels == rec.channels
    assert np.array_equal(back.samples, rec.samples)
    assert back.fs_hz == 500.0 and back.session is Session.POST240


def test_channel_order_follows_header(tmp_path):
    rng = np.random.default_rng(3)
    data = rng.standard_normal((4, 50))
    write_csv(tmp_path / "a.csv", FOREHEAD_CHANNELS, data)
    perm = [2, 0, 3, 1]
    write_csv(tmp_path / "b.csv", [FOREHEAD_CHANNELS[i] for i in perm], data[perm])
    write_sidecar(tmp_path / "m.json")
    a = load_recording(tmp_path / "a.csv", tmp_path / "m.json")
    b = load_recording(tmp_path / "b.csv", tmp_path / "m.json")
    assert b.channels == tuple(FOREHEAD_CHANNELS[i] for i in perm)
    for ch in FOREHEAD_CHANNELS:
        assert np.array_equal(a.channel(ch), b.channel(ch))
