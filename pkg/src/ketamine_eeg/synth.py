"""Seeded synthetic EEG recordings and trial cohorts with known ground truth."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .clinical import (
    RESPONSE_THRESHOLD,
    TIMEPOINTS,
    HdrsSeries,
    Label,
    SubjectRecord,
    label_responder,
    write_cohort_csv,
)
from .errors import EmptyCohort, InfeasibleHdrsModel, InvalidSpec
from .features import BANDS
from .signal_model import FOREHEAD_CHANNELS, Group, Recording, Session, SessionMeta, save_recording

RIGHT_CHANNELS = ("Fp2", "AF8")
BAND_CENTRES = {b.name: 0.5 * (b.lo_hz + b.hi_hz) for b in BANDS}


def _default_amps():
    return {"delta": 4.0, "theta": 5.0, "lowalpha": 10.0, "highalpha": 3.0}


@dataclass(frozen=True)
class SynthSpec:
    fs_hz: float = 512.0
    duration_s: float = 600.0
    noise_exponent: float = 1.0
    noise_uv: float = 10.0  # RMS of the coloured background
    band_amps: dict = field(default_factory=_default_amps)  # sinusoid amplitude, uV
    asymmetry_bias: float = 1.0  # right/left low-alpha amplitude ratio
    oscillation: str = "sinusoid"  # sinusoid | narrowband
    quantum_uv: float | None = None  # round samples to this resolution
    seed: int = 0

    def validate(self):
        if not (self.fs_hz > 0 and self.duration_s > 0):
            raise InvalidSpec("fs_hz and duration_s must be positive")
        if int(round(self.fs_hz * self.duration_s)) < 2:
            raise InvalidSpec("recording would have fewer than two samples")
        if self.noise_uv < 0 or self.asymmetry_bias < 0:
            raise InvalidSpec("noise_uv and asymmetry_bias must be >= 0")
        if any(v < 0 for v in self.band_amps.values()):
            raise InvalidSpec("band amplitudes must be >= 0")
        unknown = set(self.band_amps) - set(BAND_CENTRES)
        if unknown:
            raise InvalidSpec(f"unknown band(s) {sorted(unknown)}")
        if self.oscillation not in ("sinusoid", "narrowband"):
            raise InvalidSpec(f"unknown oscillation mode {self.oscillation!r}")


def colored_noise(n: int, fs_hz: float, exponent: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-RMS noise with power spectrum proportional to ``1 / f**exponent``."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / fs_hz)
    shape = np.zeros_like(f)
    shape[1:] = f[1:] ** (-exponent / 2.0)
    x = np.fft.irfft(spec * shape, n=n)
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def _narrowband(n, fs_hz, band, rng) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / fs_hz)
    spec[(f < band.lo_hz) | (f > band.hi_hz)] = 0
    x = np.fft.irfft(spec, n=n)
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def gen_eeg(spec: SynthSpec, subject_id: str = "synthetic", session=Session.BASELINE,
            group: Group | None = None) -> Recording:
    """Four-channel recording: 1/f background plus one oscillation per band.

    Sinusoids sit at band centres with random phase; the right-hand
    channels' low-alpha amplitude is multiplied by ``asymmetry_bias``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.fs_hz * spec.duration_s))
    t = np.arange(n) / spec.fs_hz
    data = np.empty((len(FOREHEAD_CHANNELS), n))
    bands = {b.name: b for b in BANDS}
    for ci, ch in enumerate(FOREHEAD_CHANNELS):
        x = spec.noise_uv * colored_noise(n, spec.fs_hz, spec.noise_exponent, rng)
        for name in sorted(spec.band_amps):
            amp = spec.band_amps[name]
            if name == "lowalpha" and ch in RIGHT_CHANNELS:
                amp *= spec.asymmetry_bias
            phase = rng.uniform(0, 2 * np.pi)
            if spec.oscillation == "sinusoid":
                x += amp * np.sin(2 * np.pi * BAND_CENTRES[name] * t + phase)
            else:
                x += amp / np.sqrt(2) * _narrowband(n, spec.fs_hz, bands[name], rng)
        if spec.quantum_uv:
            x = np.round(x / spec.quantum_uv) * spec.quantum_uv
        data[ci] = x
    meta = SessionMeta(group) if group is not None else None
    return Recording(subject_id, Session(session), spec.fs_hz, FOREHEAD_CHANNELS, data, "A2", meta)


# -- cohorts ----------------------------------------------------------------------

# fraction of the 240-min improvement present at each timepoint
_TRAJECTORY = {"0min": 0.0, "40min": 0.45, "80min": 0.75, "120min": 0.9, "240min": 1.0,
               "Day2": 0.9, "Day3": 0.8, "Day4": 0.7, "Day5": 0.65, "Day6": 0.6,
               "Day7": 0.55, "Day14": 0.4}


@dataclass(frozen=True)
class HdrsModel:
    baseline_mean: float = 23.5
    baseline_sd: float = 4.3
    responder_reduction: tuple = (0.527, 0.073)
    nonresponder_reduction: tuple = (0.184, 0.116)

    def check(self):
        rm, rs = self.responder_reduction
        nm, ns = self.nonresponder_reduction
        if self.baseline_mean <= 0 or self.baseline_sd < 0 or rs < 0 or ns < 0:
            raise InfeasibleHdrsModel("baseline mean must be > 0 and SDs >= 0")
        if rm > 1 or rm + 3 * rs < RESPONSE_THRESHOLD:
            raise InfeasibleHdrsModel(f"responder reductions {rm}+/-{rs} cannot reach "
                                      f"{RESPONSE_THRESHOLD:.0%}")
        if nm - 3 * ns >= RESPONSE_THRESHOLD:
            raise InfeasibleHdrsModel(f"non-responder reductions {nm}+/-{ns} cannot stay "
                                      f"below {RESPONSE_THRESHOLD:.0%}")


def _default_fractions():
    return {"A": 11 / 18, "B": 5 / 19, "C": 2 / 18}


def _default_sizes():
    return {"A": 18, "B": 19, "C": 18}


@dataclass(frozen=True)
class CohortSpec:
    n_per_group: dict = field(default_factory=_default_sizes)
    responder_fraction: dict = field(default_factory=_default_fractions)
    theta_deficit: float = 0.5  # responders' theta amplitude multiplier
    post_alpha_gain: float = 1.5  # responders' post-treatment low-alpha multiplier
    subject_jitter: float = 0.15  # lognormal SD of per-subject amplitudes
    hdrs_model: HdrsModel = field(default_factory=HdrsModel)
    eeg: SynthSpec = field(default_factory=SynthSpec)
    seed: int = 0

    def validate(self):
        for g, f in self.responder_fraction.items():
            if not (0 <= f <= 1):
                raise InvalidSpec(f"responder fraction for {g} must lie in [0, 1]")
        for g, n in self.n_per_group.items():
            if n < 0:
                raise InvalidSpec(f"group {g} size must be >= 0")
            Group(g)
        if self.theta_deficit <= 0 or self.post_alpha_gain <= 0 or self.subject_jitter < 0:
            raise InvalidSpec("effect multipliers must be > 0 and jitter >= 0")
        if sum(self.n_per_group.values()) == 0:
            raise EmptyCohort("every arm has zero subjects")
        self.hdrs_model.check()
        self.eeg.validate()

    @classmethod
    def from_dict(cls, d: dict) -> "CohortSpec":
        d = dict(d)
        if "hdrs_model" in d:
            hm = dict(d["hdrs_model"])
            for k in ("responder_reduction", "nonresponder_reduction"):
                if k in hm:
                    hm[k] = tuple(hm[k])
            d["hdrs_model"] = HdrsModel(**hm)
        if "eeg" in d:
            e = dict(d["eeg"])
            if "band_amps" in e:
                e["band_amps"] = {**_default_amps(), **e["band_amps"]}
            d["eeg"] = SynthSpec(**e)
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hdrs_model"]["responder_reduction"] = list(self.hdrs_model.responder_reduction)
        d["hdrs_model"]["nonresponder_reduction"] = list(self.hdrs_model.nonresponder_reduction)
        return d


def _draw_hdrs(model: HdrsModel, responder: bool, rng: np.random.Generator) -> HdrsSeries:
    base = int(np.clip(round(rng.normal(model.baseline_mean, model.baseline_sd)), 10, 52))
    if responder:
        m, s = model.responder_reduction
        r = float(np.clip(rng.normal(m, s), RESPONSE_THRESHOLD, 0.95))
        at240 = math.floor(base * (1 - r) + 1e-9)
    else:
        m, s = model.nonresponder_reduction
        r = float(np.clip(rng.normal(m, s), -0.2, RESPONSE_THRESHOLD - 0.01))
        at240 = min(52, math.ceil(base * (1 - r) - 1e-9))
        # stay strictly above the responder cut after rounding
        while (base - at240) / base >= RESPONSE_THRESHOLD:
            at240 += 1
    drop = base - at240
    scores = {}
    for tp in TIMEPOINTS:
        if tp == "0min":
            scores[tp] = base
        elif tp == "240min":
            scores[tp] = at240
        else:
            v = base - drop * _TRAJECTORY[tp] + rng.integers(-1, 2)
            scores[tp] = int(np.clip(round(v), 0, 52))
    return HdrsSeries(scores)


def _responder_flags(n: int, fraction: float, rng) -> np.ndarray:
    k = int(round(fraction * n))
    flags = np.zeros(n, dtype=bool)
    flags[rng.permutation(n)[:k]] = True
    return flags


def gen_cohort(spec: CohortSpec):
    """Baseline/post recording pairs and labelled subject records.

    Responders carry the theta deficit in both sessions and the low-alpha
    gain in the post-treatment session. Every generated HDRS series is
    checked to reproduce its assigned label.
    """
    spec.validate()
    pairs, records = [], []
    for gi, grp in enumerate(sorted(spec.n_per_group)):
        n = spec.n_per_group[grp]
        if n == 0:
            continue
        grp_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, gi, 0]))
        flags = _responder_flags(n, spec.responder_fraction.get(grp, 0.0), grp_rng)
        for si in range(n):
            sid = f"{grp}{si + 1:02d}"
            ss = np.random.SeedSequence([spec.seed, gi, 1, si])
            hdrs_ss, amp_ss, base_ss, post_ss = ss.spawn(4)
            rng = np.random.default_rng(amp_ss)
            responder = bool(flags[si])

            hdrs = _draw_hdrs(spec.hdrs_model, responder, np.random.default_rng(hdrs_ss))
            label = Label.RESPONDER if responder else Label.NON_RESPONDER
            if label_responder(hdrs) is not label:
                raise InfeasibleHdrsModel(f"{sid}: generated HDRS contradicts assigned label")
            records.append(SubjectRecord(sid, Group(grp), hdrs, label))

            jit = spec.subject_jitter
            amps = {k: v * float(rng.lognormal(0.0, jit)) for k, v in sorted(spec.eeg.band_amps.items())}
            noise = spec.eeg.noise_uv * float(rng.lognormal(0.0, jit))
            bias = spec.eeg.asymmetry_bias * float(rng.lognormal(0.0, jit / 2))
            if responder and "theta" in amps:
                amps["theta"] *= spec.theta_deficit
            post_amps = dict(amps)
            if responder and "lowalpha" in post_amps:
                post_amps["lowalpha"] *= spec.post_alpha_gain

            seed_of = lambda s: int(s.generate_state(1)[0])  # noqa: E731
            base_spec = replace(spec.eeg, band_amps=amps, noise_uv=noise, asymmetry_bias=bias,
                                seed=seed_of(base_ss))
            post_spec = replace(base_spec, band_amps=post_amps, seed=seed_of(post_ss))
            pairs.append((gen_eeg(base_spec, sid, Session.BASELINE, Group(grp)),
                          gen_eeg(post_spec, sid, Session.POST240, Group(grp))))
    return pairs, records


def write_dataset(pairs, records, out_dir) -> Path:
    """Write recordings, sidecars, cohort CSV and manifest; returns the manifest path."""
    out = Path(out_dir)
    rec_dir = out / "recordings"
    rec_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for base, post in pairs:
        for rec in (base, post):
            stem = f"{rec.subject_id}_{rec.session.value}"
            save_recording(rec, rec_dir / f"{stem}.csv", rec_dir / f"{stem}.json")
            entries.append({"recording_csv": f"recordings/{stem}.csv",
                            "sidecar_json": f"recordings/{stem}.json"})
    write_cohort_csv(records, out / "cohort.csv")
    manifest = {"recordings": entries, "cohort_csv": "cohort.csv"}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
