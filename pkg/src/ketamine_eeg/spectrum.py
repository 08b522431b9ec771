"""Welch power spectra.

Power is reported per frequency bin (amplitude squared per bin, one-sided),
so summing every bin of a spectrum recovers the mean square of the signal.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.signal import get_window

from .errors import InvalidWelchParams, ScaleError, SignalTooShort

DEFAULT_RESOLUTION_HZ = 0.5


class Scale(str, enum.Enum):
    LINEAR = "linear"
    DECIBEL = "dB"


_WINDOWS = {"hamming": "hamming", "hann": "hann", "rectangular": "boxcar"}


@dataclass(frozen=True)
class WelchParams:
    window_len: int = 256
    overlap: int = 128
    nfft: int | None = None  # None -> fs / resolution_hz
    window_fn: str = "hamming"
    resolution_hz: float = DEFAULT_RESOLUTION_HZ
    n_segments: int | None = None  # filled in on the result

    def resolve_nfft(self, fs_hz: float) -> int:
        if self.nfft is not None:
            return int(self.nfft)
        return max(self.window_len, int(round(fs_hz / self.resolution_hz)))

    def validate(self, fs_hz: float) -> int:
        nfft = self.resolve_nfft(fs_hz)
        if not (0 <= self.overlap < self.window_len):
            raise InvalidWelchParams(
                f"need 0 <= overlap < window_len, got {self.overlap}/{self.window_len}")
        if nfft < self.window_len:
            raise InvalidWelchParams(f"nfft {nfft} < window_len {self.window_len}")
        if self.window_fn.lower() not in _WINDOWS:
            raise InvalidWelchParams(f"unknown window {self.window_fn!r}")
        return nfft

    def describe(self) -> str:
        return (f"window_len={self.window_len} overlap={self.overlap} nfft={self.nfft} "
                f"window={self.window_fn} segments={self.n_segments} normalization=power-per-bin")


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    channel: str
    freqs_hz: np.ndarray
    power: np.ndarray
    scale: Scale = Scale.LINEAR
    params: WelchParams | None = None

    @property
    def df(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])

    def scaled(self, factor: float) -> "PowerSpectrum":
        return replace(self, power=self.power * factor)


def n_segments(n: int, window_len: int, overlap: int) -> int:
    return (n - window_len) // (window_len - overlap) + 1


def welch_psd(signal, fs_hz: float, params: WelchParams | None = None,
              channel: str = "") -> PowerSpectrum:
    """Averaged, windowed periodogram of ``signal``.

    Each segment is mean-detrended, windowed and zero-padded to ``nfft``.
    Segment periodograms are normalised by ``nfft * sum(w**2)`` and
    averaged; interior bins are doubled to fold in negative frequencies.
    """
    params = params or WelchParams()
    nfft = params.validate(fs_hz)
    x = np.asarray(signal, dtype=float)
    L, step = params.window_len, params.window_len - params.overlap
    if x.size < L:
        raise SignalTooShort(f"signal length {x.size} < window_len {L}")

    nseg = n_segments(x.size, L, params.overlap)
    segs = np.lib.stride_tricks.sliding_window_view(x, L)[::step][:nseg]
    segs = segs - segs.mean(axis=1, keepdims=True)
    win = get_window(_WINDOWS[params.window_fn.lower()], L)

    spec = np.fft.rfft(segs * win, n=nfft, axis=1)
    pxx = (spec.real ** 2 + spec.imag ** 2).mean(axis=0) / (nfft * np.sum(win ** 2))
    if nfft % 2:
        pxx[1:] *= 2
    else:
        pxx[1:-1] *= 2

    freqs = np.arange(pxx.size) * (fs_hz / nfft)
    used = replace(params, nfft=nfft, n_segments=nseg)
    return PowerSpectrum(channel, freqs, pxx, Scale.LINEAR, used)


def to_db(psd: PowerSpectrum, floor: float = 1e-12) -> PowerSpectrum:
    if psd.scale is Scale.DECIBEL:
        raise ScaleError("spectrum is already in dB")
    return replace(psd, power=10.0 * np.log10(np.maximum(psd.power, floor)), scale=Scale.DECIBEL)


def write_psd_csv(psd: PowerSpectrum, path) -> None:
    p = psd.params
    lines = [f"# channel={psd.channel} scale={psd.scale.value} " + (p.describe() if p else ""),
             "freq_hz,power"]
    lines += [f"{f!r},{v!r}" for f, v in zip(psd.freqs_hz.tolist(), psd.power.tolist())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_psd_csv(path) -> PowerSpectrum:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    comment = text[0].lstrip("# ")
    info = dict(tok.split("=", 1) for tok in comment.split() if "=" in tok)
    data = np.loadtxt(text[2:], delimiter=",", ndmin=2)
    return PowerSpectrum(info.get("channel", ""), data[:, 0], data[:, 1],
                         Scale(info.get("scale", "linear")))
