"""Band powers, relative power, alpha asymmetry and cordance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BandOutOfRange,
    DegenerateAsymmetry,
    MissingChannel,
    ScaleError,
    ZeroMaxPower,
    ZeroTotalPower,
)
from .signal_model import CHANNEL_PAIRS, FOREHEAD_CHANNELS
from .spectrum import PowerSpectrum, Scale


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    lo_hz: float
    hi_hz: float


DELTA = FrequencyBand("delta", 1.0, 3.5)
THETA = FrequencyBand("theta", 4.0, 7.5)
LOW_ALPHA = FrequencyBand("lowalpha", 8.0, 10.0)
HIGH_ALPHA = FrequencyBand("highalpha", 10.5, 12.0)
BANDS = (DELTA, THETA, LOW_ALPHA, HIGH_ALPHA)
BANDS_BY_NAME = {b.name: b for b in BANDS}
TOTAL_RANGE = FrequencyBand("total", 1.0, 12.0)

# pair label -> (left, right)
PAIR_LABELS = {name: f"{l}-{r}" for name, (l, r) in CHANNEL_PAIRS.items()}


def _band_mask(freqs: np.ndarray, band: FrequencyBand) -> np.ndarray:
    tol = 1e-9 * max(1.0, band.hi_hz)
    return (freqs >= band.lo_hz - tol) & (freqs <= band.hi_hz + tol)


def band_power(psd: PowerSpectrum, band: FrequencyBand) -> float:
    """Sum of the bins whose centre lies in ``[band.lo_hz, band.hi_hz]``."""
    if psd.scale is not Scale.LINEAR:
        raise ScaleError("band_power needs a linear-scale spectrum")
    f = psd.freqs_hz
    if band.lo_hz < f[0] - 1e-9 or band.hi_hz > f[-1] + 1e-9:
        raise BandOutOfRange(f"{band.name} [{band.lo_hz}, {band.hi_hz}] outside "
                             f"[{f[0]}, {f[-1]}] Hz")
    return float(np.sum(psd.power[_band_mask(f, band)]))


@dataclass(frozen=True)
class BandPowers:
    channel: str
    absolute: dict
    absolute_db: dict
    relative: dict
    total_power: float

    def log_ratio(self, band: str) -> float:
        """Band dB over total dB. Diagnostic only; not a relative power."""
        return self.absolute_db[band] / (10.0 * np.log10(max(self.total_power, 1e-12)))


def relative_power(psd: PowerSpectrum, bands: Sequence[FrequencyBand] = BANDS,
                   floor: float = 1e-12) -> BandPowers:
    """Absolute and relative band powers of one channel.

    The denominator is the power summed over every bin in 1-12 Hz,
    including bins that fall between the named bands.
    """
    total = band_power(psd, TOTAL_RANGE)
    if total <= 0:
        raise ZeroTotalPower(f"channel {psd.channel}: no power in 1-12 Hz")
    absolute = {b.name: band_power(psd, b) for b in bands}
    return BandPowers(
        channel=psd.channel,
        absolute=absolute,
        absolute_db={k: 10.0 * np.log10(max(v, floor)) for k, v in absolute.items()},
        relative={k: v / total for k, v in absolute.items()},
        total_power=total,
    )


@dataclass(frozen=True)
class AsymmetryScore:
    pair: str
    band: str
    value: float
    left_power: float
    right_power: float


def alpha_asymmetry(left: BandPowers, right: BandPowers, band: str = "lowalpha",
                    use: str = "relative", pair: str = "") -> AsymmetryScore:
    """|(P_L - P_R) / (P_L + P_R)| on relative (default) or absolute power."""
    if band not in ("lowalpha", "highalpha"):
        raise ValueError(f"asymmetry is defined for alpha bands, got {band!r}")
    src = {"relative": "relative", "absolute": "absolute"}[use]
    pl, pr = getattr(left, src)[band], getattr(right, src)[band]
    if pl + pr == 0:
        raise DegenerateAsymmetry(f"{left.channel}/{right.channel} {band}: zero power")
    value = abs((pl - pr) / (pl + pr))
    return AsymmetryScore(pair or f"{left.channel}-{right.channel}", band, value, pl, pr)


@dataclass(frozen=True)
class CordanceValue:
    channel: str
    band: str
    norm_abs: float
    norm_rel: float
    value: float


def cordance(bp: BandPowers) -> list[CordanceValue]:
    """Cordance of every band in one channel.

    Absolute and relative powers are each divided by their maximum across
    the channel's bands, and cordance is the sum of both normalised values
    minus one.
    """
    max_abs = max(bp.absolute.values())
    max_rel = max(bp.relative.values())
    if max_abs <= 0 or max_rel <= 0:
        raise ZeroMaxPower(f"channel {bp.channel}: zero band power")
    out = []
    for band in bp.absolute:
        na = bp.absolute[band] / max_abs
        nr = bp.relative[band] / max_rel
        out.append(CordanceValue(bp.channel, band, na, nr, (na - 0.5) + (nr - 0.5)))
    return out


def cordance_across_channels(per_channel: Mapping[str, BandPowers]) -> list[CordanceValue]:
    """Variant normalising each band by its maximum over channels."""
    bands = list(next(iter(per_channel.values())).absolute)
    out = []
    for band in bands:
        max_abs = max(bp.absolute[band] for bp in per_channel.values())
        max_rel = max(bp.relative[band] for bp in per_channel.values())
        if max_abs <= 0 or max_rel <= 0:
            raise ZeroMaxPower(f"band {band}: zero power on every channel")
        for ch, bp in per_channel.items():
            na, nr = bp.absolute[band] / max_abs, bp.relative[band] / max_rel
            out.append(CordanceValue(ch, band, na, nr, (na - 0.5) + (nr - 0.5)))
    return out


# -- feature vectors ------------------------------------------------------------

def rel_name(band: str, ch: str) -> str:
    return f"rel_{band}_{ch}"


def absdb_name(band: str, ch: str) -> str:
    return f"absdb_{band}_{ch}"


def asym_name(band: str, pair: str) -> str:
    return f"asym_{band}_{PAIR_LABELS[pair]}"


def cord_name(band: str, ch: str) -> str:
    return f"cord_{band}_{ch}"


FEATURE_SETS = {
    "theta": [rel_name("theta", c) for c in FOREHEAD_CHANNELS],
    "lowalpha": [rel_name("lowalpha", c) for c in FOREHEAD_CHANNELS],
    "theta+lowalpha": ([rel_name("theta", c) for c in FOREHEAD_CHANNELS]
                       + [rel_name("lowalpha", c) for c in FOREHEAD_CHANNELS]),
    "asymmetry": [asym_name(b, p) for p in CHANNEL_PAIRS for b in ("lowalpha", "highalpha")],
    "cordance": [cord_name("theta", c) for c in FOREHEAD_CHANNELS],
}
DEFAULT_FEATURE_SET = "theta+lowalpha"


@dataclass(frozen=True)
class FeatureVector:
    subject_id: str
    session: str
    names: tuple
    values: tuple

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def feature_row(per_channel: Mapping[str, BandPowers], asymmetry_use: str = "relative",
                cordance_mode: str = "band") -> dict:
    """Every scalar feature for one recording, keyed by feature name."""
    missing = [c for c in FOREHEAD_CHANNELS if c not in per_channel]
    if missing:
        raise MissingChannel(f"missing channel(s): {', '.join(missing)}")
    row = {}
    for ch in FOREHEAD_CHANNELS:
        for band in per_channel[ch].absolute:
            row[absdb_name(band, ch)] = per_channel[ch].absolute_db[band]
    for ch in FOREHEAD_CHANNELS:
        for band in per_channel[ch].relative:
            row[rel_name(band, ch)] = per_channel[ch].relative[band]
    for pair, (left, right) in CHANNEL_PAIRS.items():
        for band in ("lowalpha", "highalpha"):
            score = alpha_asymmetry(per_channel[left], per_channel[right], band,
                                    use=asymmetry_use, pair=pair)
            row[asym_name(band, pair)] = score.value
    if cordance_mode == "band":
        cvs = [cv for ch in FOREHEAD_CHANNELS for cv in cordance(per_channel[ch])]
    elif cordance_mode == "channel":
        cvs = cordance_across_channels({c: per_channel[c] for c in FOREHEAD_CHANNELS})
    else:
        raise ValueError(f"unknown cordance mode {cordance_mode!r}")
    by_key = {(cv.channel, cv.band): cv.value for cv in cvs}
    for ch in FOREHEAD_CHANNELS:
        for band in per_channel[ch].absolute:
            row[cord_name(band, ch)] = by_key[(ch, band)]
    return row


def build_feature_vector(per_channel: Mapping[str, BandPowers],
                         spec: str | Sequence[str] = DEFAULT_FEATURE_SET,
                         subject_id: str = "", session: str = "baseline",
                         **row_kwargs) -> FeatureVector:
    """Select an ordered feature vector from a recording's band powers.

    ``spec`` is either a named set from ``FEATURE_SETS`` or an explicit list
    of feature names.
    """
    names = FEATURE_SETS[spec] if isinstance(spec, str) else list(spec)
    row = feature_row(per_channel, **row_kwargs)
    return FeatureVector(subject_id, session, tuple(names), tuple(row[n] for n in names))
