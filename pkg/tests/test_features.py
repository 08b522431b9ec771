import numpy as np
import pytest
from hypothesis import given, strategies as st

from ketamine_eeg.errors import BandOutOfRange, MissingChannel, ZeroTotalPower
from ketamine_eeg.features import (
    BANDS,
    BANDS_BY_NAME,
    DELTA,
    FEATURE_SETS,
    LOW_ALPHA,
    THETA,
    TOTAL_RANGE,
    BandPowers,
    alpha_asymmetry,
    band_power,
    build_feature_vector,
    cordance,
    cordance_across_channels,
    feature_row,
    relative_power,
)
from ketamine_eeg.preprocess import design_bandpass_fir, filter_zero_phase
from ketamine_eeg.signal_model import FOREHEAD_CHANNELS
from ketamine_eeg.spectrum import welch_psd

from conftest import flat_psd, psd_from


def bp_from(absolute, channel="Fp1", total=None):
    total = sum(absolute.values()) if total is None else total
    return BandPowers(channel, dict(absolute), {k: 10 * np.log10(v) if v > 0 else -120.0
                                                 for k, v in absolute.items()},
                      {k: v / total for k, v in absolute.items()}, total)


def four(values, channel="Fp1"):
    return bp_from(dict(zip([b.name for b in BANDS], values)), channel)


def test_band_edges():
    assert [(b.name, b.lo_hz, b.hi_hz) for b in BANDS] == [
        ("delta", 1.0, 3.5), ("theta", 4.0, 7.5), ("lowalpha", 8.0, 10.0),
        ("highalpha", 10.5, 12.0)]
    for a, b in zip(BANDS, BANDS[1:]):
        assert a.hi_hz < b.lo_hz
    assert (TOTAL_RANGE.lo_hz, TOTAL_RANGE.hi_hz) == (1.0, 12.0)


def test_band_power_counts_bins():
    assert band_power(flat_psd(1.0), THETA) == 8.0
    assert band_power(flat_psd(0.0), THETA) == 0.0


def test_band_power_spike():
    psd = flat_psd(0.0)
    power = psd.power.copy()
    power[np.argmin(np.abs(psd.freqs_hz - 9.0))] = 3.25
    spike = psd_from(psd.freqs_hz, power)
    assert band_power(spike, LOW_ALPHA) == 3.25
    assert band_power(spike, THETA) == 0.0


def test_band_out_of_range():
    with pytest.raises(BandOutOfRange):
        band_power(flat_psd(1.0, fmax=10.0), BANDS_BY_NAME["highalpha"])


def test_flat_relative_theta():
    bp = relative_power(flat_psd(1.0))
    assert bp.total_power == 23.0
    assert bp.relative["theta"] == pytest.approx(8 / 23, abs=1e-15)


def test_single_delta_bin():
    psd = flat_psd(0.0)
    power = psd.power.copy()
    power[np.flatnonzero(psd.freqs_hz == 2.0)] = 5.0
    bp = relative_power(psd_from(psd.freqs_hz, power))
    assert bp.relative == {"delta": 1.0, "theta": 0.0, "lowalpha": 0.0, "highalpha": 0.0}


def test_zero_total_power():
    with pytest.raises(ZeroTotalPower):
        relative_power(flat_psd(0.0))


def test_band_partition_audit():
    f = flat_psd(1.0).freqs_hz
    in_total = (f >= 1.0) & (f <= 12.0)
    assert in_total.sum() == 23
    covered = np.zeros(f.size, dtype=int)
    for b in BANDS:
        covered += (f >= b.lo_hz) & (f <= b.hi_hz)
    assert covered.max() == 1
    # inclusive edges on 0.5 Hz bins: 6 + 8 + 5 + 4 bins, every bin in [1, 12] used once
    assert [int(((f >= b.lo_hz) & (f <= b.hi_hz)).sum()) for b in BANDS] == [6, 8, 5, 4]
    assert covered[in_total].sum() == 23
    assert sum(relative_power(flat_psd(1.0)).relative.values()) == pytest.approx(1.0)
    # on a finer grid the gaps between bands hold bins that belong to no band
    fine = flat_psd(1.0, df=0.25)
    assert sum(relative_power(fine).relative.values()) == pytest.approx(42 / 45)


@pytest.mark.parametrize("pl,pr,expected", [(2.0, 2.0, 0.0), (3.0, 1.0, 0.5), (0.0, 4.0, 1.0)])
def test_asymmetry_cases(pl, pr, expected):
    left = bp_from({"lowalpha": pl, "highalpha": 1.0}, "Fp1", total=10.0)
    right = bp_from({"lowalpha": pr, "highalpha": 1.0}, "Fp2", total=10.0)
    assert alpha_asymmetry(left, right).value == pytest.approx(expected, abs=1e-12)
    assert alpha_asymmetry(left, right, use="absolute").value == expected


def test_asymmetry_relative_versus_absolute():
    left = bp_from({"lowalpha": 2.0, "highalpha": 1.0}, "Fp1", total=4.0)
    right = bp_from({"lowalpha": 2.0, "highalpha": 1.0}, "Fp2", total=8.0)
    assert alpha_asymmetry(left, right, use="absolute").value == 0.0
    assert alpha_asymmetry(left, right).value == pytest.approx(1 / 3)


def test_cordance_oracle():
    values = [cv.value for cv in cordance(four([4, 2, 1, 1]))]
    np.testing.assert_allclose(values, [1.0, 0.0, -0.5, -0.5], atol=1e-9)


def test_cordance_equal_bands():
    assert [cv.value for cv in cordance(four([3, 3, 3, 3]))] == [1.0] * 4


def test_cordance_across_channels_normalises_per_band():
    per = {"Fp1": four([4, 2, 1, 1], "Fp1"), "Fp2": four([2, 2, 2, 2], "Fp2")}
    cvs = {(cv.channel, cv.band): cv for cv in cordance_across_channels(per)}
    assert cvs[("Fp1", "delta")].norm_abs == 1.0
    assert cvs[("Fp2", "delta")].norm_abs == 0.5
    assert cvs[("Fp2", "theta")].norm_abs == 1.0


positive = st.floats(1e-3, 1e3, allow_nan=False)


@given(st.lists(positive, min_size=4, max_size=4), st.floats(1.0, 10.0))
def test_cordance_properties(values, extra):
    bp = bp_from(dict(zip([b.name for b in BANDS], values)), total=sum(values) * extra)
    cvs = cordance(bp)
    assert max(cv.norm_abs for cv in cvs) == 1.0
    assert max(cv.norm_rel for cv in cvs) == 1.0
    for cv in cvs:
        assert -1.0 < cv.value <= 1.0
        assert cv.value == pytest.approx((cv.norm_abs - 0.5) + (cv.norm_rel - 0.5), abs=1e-12)
    top = int(np.argmax(values))
    assert cvs[top].value == 1.0


@given(positive, positive, positive, positive)
def test_asymmetry_symmetric(a, b, c, d):
    left = bp_from({"lowalpha": a, "highalpha": c}, "Fp1")
    right = bp_from({"lowalpha": b, "highalpha": d}, "Fp2")
    v = alpha_asymmetry(left, right, use="absolute").value
    assert v == alpha_asymmetry(right, left, use="absolute").value
    assert 0.0 <= v <= 1.0
    assert (v == 0.0) == (a == b)


@given(st.lists(st.floats(0, 1e4), min_size=41, max_size=41))
def test_relative_power_consistency(power):
    power = np.asarray(power)
    psd = psd_from(np.arange(41) * 0.5, power)
    if band_power(psd, TOTAL_RANGE) <= 0:
        return
    bp = relative_power(psd)
    for b in bp.absolute:
        assert bp.relative[b] * bp.total_power == pytest.approx(bp.absolute[b], rel=1e-9, abs=1e-300)
        assert 0.0 <= bp.relative[b] <= 1.0
    assert sum(bp.relative.values()) <= 1.0 + 1e-12


def per_channel_from_signal(x, fs=512.0):
    kernel = design_bandpass_fir(1, 12, fs)
    out = {}
    for i, ch in enumerate(FOREHEAD_CHANNELS):
        out[ch] = relative_power(welch_psd(filter_zero_phase(x[i], kernel), fs, channel=ch))
    return out


@given(st.floats(1e-3, 1e3), st.integers(0, 50))
def test_amplitude_invariance(a, seed):
    x = np.random.default_rng(seed).standard_normal((4, 3000))
    r1 = feature_row(per_channel_from_signal(x))
    r2 = feature_row(per_channel_from_signal(a * x))
    for name, v in r1.items():
        if name.startswith("absdb_"):
            assert r2[name] == pytest.approx(v + 20 * np.log10(a), abs=1e-9)
        else:
            assert r2[name] == pytest.approx(v, rel=1e-9, abs=1e-12)


def forehead_channels(values_by_channel=None):
    values_by_channel = values_by_channel or {}
    return {ch: four(values_by_channel.get(ch, [4, 3, 2, 1]), ch) for ch in FOREHEAD_CHANNELS}


def test_default_vector_order():
    per = forehead_channels({"AF7": [1, 2, 3, 4], "Fp1": [1, 3, 3, 4]})
    fv = build_feature_vector(per, subject_id="A01")
    assert len(fv.values) == 8
    assert fv.names == ("rel_theta_AF7", "rel_theta_Fp1", "rel_theta_Fp2", "rel_theta_AF8",
                        "rel_lowalpha_AF7", "rel_lowalpha_Fp1", "rel_lowalpha_Fp2",
                        "rel_lowalpha_AF8")
    assert fv.values[0] == pytest.approx(0.2)
    assert fv.values[1] == pytest.approx(3 / 11)


def test_other_feature_sets():
    per = forehead_channels()
    assert len(build_feature_vector(per, "cordance").values) == 4
    assert len(build_feature_vector(per, "asymmetry").values) == 4
    names = build_feature_vector(per, ["cord_theta_AF8", "asym_lowalpha_Fp1-Fp2"]).names
    assert names == ("cord_theta_AF8", "asym_lowalpha_Fp1-Fp2")
    assert len(set(FEATURE_SETS["theta+lowalpha"])) == 8


def test_missing_channel():
    per = forehead_channels()
    del per["AF8"]
    with pytest.raises(MissingChannel):
        build_feature_vector(per)


def test_log_ratio_is_diagnostic_only():
    bp = relative_power(flat_psd(4.0))
    assert bp.log_ratio("theta") == pytest.approx(10 * np.log10(32) / (10 * np.log10(92)))
    assert bp.relative["theta"] == pytest.approx(8 / 23)
    assert DELTA.name in bp.absolute_db
