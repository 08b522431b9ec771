"""Zero-phase FIR bandpass filtering."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import InvalidBand, OddOrder, SignalTooShort
from .signal_model import Recording

DEFAULT_BAND = (1.0, 12.0)
DEFAULT_ORDER = 1024


@dataclass(frozen=True, eq=False)
class FilterKernel:
    taps: np.ndarray
    low_hz: float
    high_hz: float
    fs_hz: float
    order: int

    def response(self, freqs_hz) -> np.ndarray:
        """Complex single-pass frequency response at ``freqs_hz``."""
        freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
        n = np.arange(self.taps.size)
        return np.exp(-2j * np.pi * np.outer(freqs / self.fs_hz, n)) @ self.taps


def design_bandpass_fir(low_hz: float, high_hz: float, fs_hz: float,
                        order: int = DEFAULT_ORDER) -> FilterKernel:
    """Hamming-windowed sinc bandpass with ``order + 1`` symmetric taps.

    Band edges are the -6 dB points of the single-pass response. Taps are
    scaled for unit gain at the band centre.
    """
    if order % 2:
        raise OddOrder(f"order must be even, got {order}")
    if order < 4:
        raise InvalidBand(f"order must be >= 4, got {order}")
    if not (0 < low_hz < high_hz < fs_hz / 2):
        raise InvalidBand(f"need 0 < low < high < fs/2, got ({low_hz}, {high_hz}, fs={fs_hz})")

    n = np.arange(order + 1) - order / 2
    lo, hi = low_hz / fs_hz, high_hz / fs_hz
    ideal = 2 * hi * np.sinc(2 * hi * n) - 2 * lo * np.sinc(2 * lo * n)
    taps = ideal * np.hamming(order + 1)
    taps = 0.5 * (taps + taps[::-1])  # exact symmetry after rounding

    centre = 0.5 * (low_hz + high_hz)
    gain = np.abs(np.sum(taps * np.exp(-2j * np.pi * centre / fs_hz * np.arange(order + 1))))
    taps = taps / gain
    taps.setflags(write=False)
    return FilterKernel(taps, float(low_hz), float(high_hz), float(fs_hz), int(order))


def filter_zero_phase(signal, kernel: FilterKernel) -> np.ndarray:
    """Forward-backward FIR filtering with reflected edges.

    The signal is extended by ``len(taps)`` reflected samples at each end,
    filtered causally, reversed, filtered again and reversed back, so the
    net magnitude response is ``|H|**2`` with no phase shift.
    """
    x = np.asarray(signal, dtype=float)
    ntaps = kernel.taps.size
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if x.size <= ntaps:
        raise SignalTooShort(f"signal length {x.size} must exceed kernel length {ntaps}")

    padded = np.pad(x, ntaps, mode="reflect")
    m = padded.size
    fwd = fftconvolve(padded, kernel.taps)[:m]
    back = fftconvolve(fwd[::-1], kernel.taps)[:m][::-1]
    return back[ntaps:ntaps + x.size]


def filter_recording(rec: Recording, kernel: FilterKernel) -> Recording:
    filtered = np.vstack([filter_zero_phase(ch, kernel) for ch in rec.samples])
    return rec.with_samples(filtered)
