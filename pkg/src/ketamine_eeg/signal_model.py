"""Recording types plus CSV/JSON ingestion and quality checks.

A recording lives on disk as two files: a CSV with header
``time_s,<ch1>,<ch2>,...`` (one row per sample, microvolts) and a JSON
sidecar carrying subject, session, sampling rate, reference and trial arm.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ChannelMismatch,
    InvalidSamplingRate,
    NonFiniteSample,
    RecordingFormatError,
)

FOREHEAD_CHANNELS = ("AF7", "Fp1", "Fp2", "AF8")

# (left, right) homologous pairs used for asymmetry
CHANNEL_PAIRS = {
    "MidPrefrontal": ("Fp1", "Fp2"),
    "MidLateral": ("AF7", "AF8"),
}


class Session(str, enum.Enum):
    BASELINE = "baseline"
    POST240 = "post240"


class Group(str, enum.Enum):
    A_KET05 = "A"
    B_KET02 = "B"
    C_SALINE = "C"


@dataclass(frozen=True)
class SessionMeta:
    group: Group
    recorded_at: str = ""
    notes: str = ""


@dataclass(frozen=True, eq=False)
class Recording:
    """One multi-channel EEG session.

    ``samples`` has shape ``(n_channels, n_samples)`` and is stored
    read-only so a recording can be shared freely.
    """

    subject_id: str
    session: Session
    fs_hz: float
    channels: tuple[str, ...]
    samples: np.ndarray
    reference: str = "A2"
    meta: SessionMeta | None = None

    def __post_init__(self):
        data = np.array(self.samples, dtype=float, copy=True)
        if data.ndim != 2:
            raise RecordingFormatError("samples must be 2-D (channels x samples)")
        if data.shape[0] != len(self.channels):
            raise ChannelMismatch(
                f"{data.shape[0]} sample rows for {len(self.channels)} channels"
            )
        if data.shape[1] < 1:
            raise RecordingFormatError("recording has no samples")
        if len(set(self.channels)) != len(self.channels):
            raise RecordingFormatError("duplicate channel labels")
        if not (math.isfinite(self.fs_hz) and self.fs_hz > 0):
            raise InvalidSamplingRate(f"fs_hz must be > 0, got {self.fs_hz}")
        bad = ~np.isfinite(data)
        if bad.any():
            ch, row = np.argwhere(bad)[0]
            raise NonFiniteSample(int(row), self.channels[ch])
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "session", Session(self.session))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_seconds(self) -> float:
        return self.n_samples / self.fs_hz

    def channel(self, name: str) -> np.ndarray:
        return self.samples[self.channels.index(name)]

    def with_samples(self, samples: np.ndarray) -> "Recording":
        return Recording(self.subject_id, self.session, self.fs_hz, self.channels,
                         samples, self.reference, self.meta)


# -- ingestion ----------------------------------------------------------------

def read_sidecar(meta_path) -> dict:
    try:
        meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RecordingFormatError(f"{meta_path}: invalid JSON ({exc})") from exc
    for key in ("subject_id", "session", "fs_hz"):
        if key not in meta:
            if key == "fs_hz":
                raise InvalidSamplingRate(f"{meta_path}: fs_hz missing")
            raise RecordingFormatError(f"{meta_path}: missing key {key!r}")
    fs = meta["fs_hz"]
    if isinstance(fs, bool) or not isinstance(fs, (int, float)) or not fs > 0:
        raise InvalidSamplingRate(f"{meta_path}: fs_hz must be a positive number, got {fs!r}")
    return meta


def load_recording(path, meta_path) -> Recording:
    """Load a recording CSV plus its JSON sidecar.

    The ``time_s`` column is read but ignored; sample index / fs is the
    time base. Channel order follows the CSV header.
    """
    meta = read_sidecar(meta_path)
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split(",")
        body = fh.read()
    if len(header) < 2 or header[0] != "time_s" or any(not h for h in header):
        raise RecordingFormatError(f"{path}: bad header {header!r}")
    channels = tuple(header[1:])
    if "channels" in meta and list(meta["channels"]) != list(channels):
        raise ChannelMismatch(f"{path}: sidecar lists {meta['channels']}, CSV has {list(channels)}")
    if "n_channels" in meta and int(meta["n_channels"]) != len(channels):
        raise ChannelMismatch(f"{path}: sidecar expects {meta['n_channels']} channels")

    lines = body.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise RecordingFormatError(f"{path}: no sample rows")
    width = len(header)
    try:
        data = np.loadtxt(lines, delimiter=",", dtype=float, ndmin=2)
    except ValueError:
        # find the offending row for a useful message
        for i, line in enumerate(lines):
            cells = line.split(",")
            if len(cells) != width:
                raise RecordingFormatError(
                    f"{path}: row {i} has {len(cells)} fields, expected {width}"
                ) from None
            try:
                [float(c) for c in cells]
            except ValueError:
                raise RecordingFormatError(f"{path}: unparsable value in row {i}") from None
        raise
    if data.shape[1] != width:
        raise RecordingFormatError(f"{path}: expected {width} columns, got {data.shape[1]}")

    values = data[:, 1:]
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFiniteSample(int(row), channels[col])

    group = meta.get("group")
    sm = SessionMeta(Group(group), meta.get("recorded_at", ""), meta.get("notes", "")) if group else None
    return Recording(
        subject_id=str(meta["subject_id"]),
        session=Session(meta["session"]),
        fs_hz=float(meta["fs_hz"]),
        channels=channels,
        samples=values.T,
        reference=meta.get("reference", "A2"),
        meta=sm,
    )


def save_recording(rec: Recording, path, meta_path=None) -> None:
    """Write ``rec`` as CSV (shortest round-trip float repr) plus sidecar."""
    times = np.arange(rec.n_samples) / rec.fs_hz
    table = np.column_stack([times, rec.samples.T]).tolist()
    lines = [",".join(("time_s",) + rec.channels)]
    lines.extend(",".join(map(repr, row)) for row in table)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    if meta_path is not None:
        meta = {
            "subject_id": rec.subject_id,
            "session": rec.session.value,
            "fs_hz": rec.fs_hz,
            "reference": rec.reference,
        }
        if rec.meta is not None:
            meta["group"] = rec.meta.group.value
        Path(meta_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8", newline="\n")


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    kind: str  # TooShort | FlatChannel | AmplitudeOutOfRange
    channel: str | None = None
    detail: str = ""


def validate_recording(rec: Recording, min_seconds: float = 0.0,
                       max_abs_uv: float = 500.0) -> list[Finding]:
    findings = []
    if rec.duration_seconds < min_seconds:
        findings.append(Finding("TooShort", None,
                                f"{rec.duration_seconds:.3f} s < {min_seconds} s"))
    for name, x in zip(rec.channels, rec.samples):
        if np.var(x) == 0:
            findings.append(Finding("FlatChannel", name, "zero variance"))
        peak = float(np.max(np.abs(x)))
        if peak > max_abs_uv:
            findings.append(Finding("AmplitudeOutOfRange", name,
                                    f"|x| peaks at {peak:.1f} uV > {max_abs_uv}"))
    return findings


def pair_channels(channels: Sequence[str], pairing: dict | None = None) -> dict:
    """Return the asymmetry pairs available among ``channels``."""
    pairing = CHANNEL_PAIRS if pairing is None else pairing
    return {k: v for k, v in pairing.items() if v[0] in channels and v[1] in channels}
