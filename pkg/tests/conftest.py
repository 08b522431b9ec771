import numpy as np
import pytest
from hypothesis import settings

from ketamine_eeg.config import StudyConfig
from ketamine_eeg.signal_model import FOREHEAD_CHANNELS, Recording, Session
from ketamine_eeg.spectrum import PowerSpectrum

settings.register_profile("pkg", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("pkg")


def flat_psd(value=1.0, df=0.5, fmax=20.0, channel="Fp1"):
    freqs = np.arange(0.0, fmax + df / 2, df)
    return PowerSpectrum(channel, freqs, np.full(freqs.size, float(value)))


def psd_from(freqs, power, channel="Fp1"):
    return PowerSpectrum(channel, np.asarray(freqs, float), np.asarray(power, float))


def sine_recording(freq=8.0, fs=512.0, seconds=4.0, amp=1.0, subject="S01",
                   session=Session.BASELINE, channels=FOREHEAD_CHANNELS):
    t = np.arange(int(fs * seconds)) / fs
    data = np.vstack([amp * np.sin(2 * np.pi * freq * t + i) for i in range(len(channels))])
    return Recording(subject, session, fs, tuple(channels), data)


def small_config(out_dir, **sim):
    """A quick StudyConfig: 4 subjects per arm, 12-s recordings, 2 CV repeats."""
    simulate = {"n_per_group": {"A": 4, "B": 4, "C": 4},
                "responder_fraction": {"A": 0.5, "B": 0.5, "C": 0.25},
                "eeg": {"duration_s": 12.0}}
    simulate.update(sim)
    return StudyConfig.load(None, {
        "out_dir": str(out_dir), "min_seconds": 10.0, "simulate": simulate,
        "predict": {**StudyConfig.load()["predict"], "repeats": 2, "kinds": ["NMSC", "SvmRbf"],
                    "feature_sets": ["theta", "theta+lowalpha"]},
    })


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
