"""HDRS-17 trajectories, responder labels and cohort summaries."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyCohort, InvalidScore, MissingTimepoint, RecordingFormatError, ZeroBaseline
from .signal_model import Group

# timepoint label -> cohort CSV column
TIMEPOINTS = {
    "0min": "t0", "40min": "t40", "80min": "t80", "120min": "t120", "240min": "t240",
    "Day2": "d2", "Day3": "d3", "Day4": "d4", "Day5": "d5", "Day6": "d6",
    "Day7": "d7", "Day14": "d14",
}
COLUMN_TO_TIMEPOINT = {v: k for k, v in TIMEPOINTS.items()}
HDRS_MAX = 52
RESPONSE_THRESHOLD = 0.45


class Label(str, enum.Enum):
    RESPONDER = "responder"
    NON_RESPONDER = "nonresponder"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class HdrsSeries:
    scores: Mapping[str, float]

    def __post_init__(self):
        for tp, s in self.scores.items():
            if tp not in TIMEPOINTS:
                raise MissingTimepoint(f"unknown timepoint {tp!r}")
            if not (0 <= s <= HDRS_MAX):
                raise InvalidScore(f"{tp}: score {s} outside [0, {HDRS_MAX}]")
        if "0min" not in self.scores:
            raise MissingTimepoint("baseline (0min) score required")

    @property
    def baseline(self) -> float:
        return self.scores["0min"]


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    group: Group
    hdrs: HdrsSeries
    label: Label = Label.UNLABELED


def percent_reduction(hdrs: HdrsSeries, at: str = "240min") -> float:
    """Fractional improvement ``(baseline - score_at) / baseline``."""
    if at not in hdrs.scores:
        raise MissingTimepoint(f"no score at {at}")
    base = hdrs.scores["0min"]
    if base == 0:
        raise ZeroBaseline("baseline HDRS score is zero")
    return (base - hdrs.scores[at]) / base


def label_responder(hdrs: HdrsSeries, threshold: float = RESPONSE_THRESHOLD,
                    at: str = "240min") -> Label:
    # rounding guard so that e.g. 20 -> 11 is exactly 45 %
    r = round(percent_reduction(hdrs, at), 12)
    return Label.RESPONDER if r >= threshold else Label.NON_RESPONDER


def labeled(record: SubjectRecord, threshold: float = RESPONSE_THRESHOLD,
            at: str = "240min") -> SubjectRecord:
    if at not in record.hdrs.scores:
        return SubjectRecord(record.subject_id, record.group, record.hdrs, Label.UNLABELED)
    return SubjectRecord(record.subject_id, record.group, record.hdrs,
                         label_responder(record.hdrs, threshold, at))


@dataclass
class GroupSummary:
    group: str
    n: int
    responders: int
    baseline_mean: float
    baseline_sd: float
    at_mean: float
    at_sd: float
    reduction_mean: float
    reduction_sd: float
    single_subject: bool = False
    missing_at: int = 0


def _mean_sd(values) -> tuple[float, float]:
    a = np.asarray(sorted(values), dtype=float)
    if a.size == 0:
        return math.nan, math.nan
    sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return float(np.mean(a)), sd


def cohort_summary(records: Iterable[SubjectRecord], at: str = "240min",
                   threshold: float = RESPONSE_THRESHOLD) -> dict[str, GroupSummary]:
    """Per-arm counts and mean +/- SD (n - 1) of HDRS scores and reductions."""
    records = sorted(records, key=lambda r: r.subject_id)
    if not records:
        raise EmptyCohort("no subject records")
    out = {}
    for grp in sorted({r.group.value for r in records}):
        rows = [r for r in records if r.group.value == grp]
        with_at = [r for r in rows if at in r.hdrs.scores]
        bm, bsd = _mean_sd(r.hdrs.baseline for r in rows)
        am, asd = _mean_sd(r.hdrs.scores[at] for r in with_at)
        rm, rsd = _mean_sd(percent_reduction(r.hdrs, at) for r in with_at)
        n_resp = sum(label_responder(r.hdrs, threshold, at) is Label.RESPONDER for r in with_at)
        out[grp] = GroupSummary(grp, len(rows), n_resp, bm, bsd, am, asd, rm, rsd,
                                single_subject=len(rows) == 1,
                                missing_at=len(rows) - len(with_at))
    return out


# -- cohort CSV -----------------------------------------------------------------

COHORT_COLUMNS = ["subject_id", "group"] + list(TIMEPOINTS.values())


def _fmt_score(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_cohort_csv(records: Iterable[SubjectRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COHORT_COLUMNS)
        for r in sorted(records, key=lambda r: r.subject_id):
            w.writerow([r.subject_id, r.group.value]
                       + [_fmt_score(r.hdrs.scores[tp]) if tp in r.hdrs.scores else ""
                          for tp in TIMEPOINTS])


def read_cohort_csv(path, threshold: float = RESPONSE_THRESHOLD,
                    at: str = "240min") -> list[SubjectRecord]:
    """Parse a cohort CSV and label each subject (Unlabeled if ``at`` is blank)."""
    records = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("subject_id", "group", "t0") if c not in (reader.fieldnames or [])]
        if missing:
            raise RecordingFormatError(f"{path}: cohort CSV lacks column(s) {missing}")
        for row in reader:
            scores = {}
            for col, tp in COLUMN_TO_TIMEPOINT.items():
                cell = (row.get(col) or "").strip()
                if cell:
                    scores[tp] = float(cell)
            rec = SubjectRecord(row["subject_id"], Group(row["group"]), HdrsSeries(scores))
            records.append(labeled(rec, threshold, at))
    return records
