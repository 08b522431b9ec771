"""End-to-end study commands: simulate, features, stats, predict, report.

Each command reads the resolved :class:`StudyConfig`, writes its outputs
under ``out_dir`` together with ``effective_config.json`` and returns an
exit status (0 ok, 1 partial failure).
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import plotting, tables
from .clinical import TIMEPOINTS, Label, cohort_summary, read_cohort_csv
from .config import StudyConfig
from .errors import ConfigError, EEGError
from .features import (
    BANDS,
    FEATURE_SETS,
    asym_name,
    cord_name,
    feature_row,
    rel_name,
    relative_power,
)
from .ml import Dataset, fit, loso_cv, three_fold_cv
from .preprocess import design_bandpass_fir, filter_recording
from .signal_model import CHANNEL_PAIRS, FOREHEAD_CHANNELS, load_recording, validate_recording
from .spectrum import WelchParams, welch_psd, write_psd_csv
from .stats import Comparison, group_compare
from .synth import CohortSpec, gen_cohort, write_dataset

log = logging.getLogger(__name__)

ID_COLUMNS = ["subject_id", "session", "group", "label"]


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n",
                          encoding="utf-8", newline="\n")


def _clean(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


# -- simulate ---------------------------------------------------------------------

def cohort_spec_from_config(cfg: StudyConfig) -> CohortSpec:
    sim = dict(cfg["simulate"])
    sim.setdefault("seed", cfg["seed"])
    return CohortSpec.from_dict(sim)


def cmd_simulate(cfg: StudyConfig) -> int:
    spec = cohort_spec_from_config(cfg)
    pairs, records = gen_cohort(spec)
    data_dir = cfg.manifest_path.parent
    write_dataset(pairs, records, data_dir)
    _dump(spec.to_dict(), data_dir / "cohort_spec.json")
    cfg.write_effective()
    log.info("simulated %d subjects into %s", len(records), data_dir)
    return 0


# -- features ---------------------------------------------------------------------

def _welch_params(cfg) -> WelchParams:
    w = cfg["welch"]
    return WelchParams(window_len=int(w["window_len"]), overlap=int(w["overlap"]),
                       nfft=w["nfft"], window_fn=w["window_fn"],
                       resolution_hz=float(w["resolution_hz"]))


def extract_band_powers(rec, cfg: StudyConfig, psd_dir: Path | None = None) -> dict:
    lo, hi = cfg["filter"]["band"]
    kernel = design_bandpass_fir(lo, hi, rec.fs_hz, int(cfg["filter"]["order"]))
    filtered = filter_recording(rec, kernel)
    params = _welch_params(cfg)
    out = {}
    for ch, x in zip(filtered.channels, filtered.samples):
        psd = welch_psd(x, rec.fs_hz, params, channel=ch)
        if psd_dir is not None:
            write_psd_csv(psd, psd_dir / f"{rec.subject_id}_{rec.session.value}_{ch}.csv")
        out[ch] = relative_power(psd)
    return out


def cmd_features(cfg: StudyConfig) -> int:
    manifest_path = cfg.manifest_path
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"manifest not found: {manifest_path}") from exc
    root = manifest_path.parent
    cohort_csv = manifest.get("cohort_csv")
    if not cohort_csv:
        raise ConfigError("manifest has no cohort_csv entry")
    clin = cfg["clinical"]
    records = {r.subject_id: r for r in read_cohort_csv(root / cohort_csv, clin["threshold"],
                                                        clin["timepoint"])}
    out_dir = cfg.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    psd_dir = None
    if cfg["features"]["write_psd"]:
        psd_dir = out_dir / "psd"
        psd_dir.mkdir(exist_ok=True)

    rows, errors, qc = [], [], []
    for entry in manifest.get("recordings", []):
        csv_path = root / entry["recording_csv"]
        try:
            rec = load_recording(csv_path, root / entry["sidecar_json"])
            for f in validate_recording(rec, cfg["min_seconds"]):
                qc.append({"subject_id": rec.subject_id, "session": rec.session.value,
                           "finding": f.kind, "channel": f.channel, "detail": f.detail})
            bps = extract_band_powers(rec, cfg, psd_dir)
            feats = feature_row(bps, cfg["features"]["asymmetry_use"],
                                cfg["features"]["cordance_mode"])
            subj = records.get(rec.subject_id)
            if subj is None:
                raise EEGError(f"subject {rec.subject_id} missing from cohort CSV")
            row = {"subject_id": rec.subject_id, "session": rec.session.value,
                   "group": subj.group.value, "label": subj.label.value}
            row.update(feats)
            rows.append(row)
        except (EEGError, OSError, ValueError, KeyError) as exc:
            log.error("%s: %s", entry.get("recording_csv"), exc)
            errors.append({"recording_csv": entry.get("recording_csv"),
                           "error": f"{type(exc).__name__}: {exc}"})

    rows.sort(key=lambda r: (r["subject_id"], r["session"]))
    write_feature_table(rows, cfg.features_path)
    _dump({"errors": errors, "findings": qc}, out_dir / "features_qc.json")
    cfg.write_effective()
    return 1 if errors else 0


def feature_table(pairs, records, cfg: StudyConfig) -> pd.DataFrame:
    """In-memory equivalent of ``cmd_features`` for generated recordings."""
    by_id = {r.subject_id: r for r in records}
    rows = []
    for pair in pairs:
        for rec in pair:
            subj = by_id[rec.subject_id]
            row = {"subject_id": rec.subject_id, "session": rec.session.value,
                   "group": subj.group.value, "label": subj.label.value}
            row.update(feature_row(extract_band_powers(rec, cfg),
                                   cfg["features"]["asymmetry_use"],
                                   cfg["features"]["cordance_mode"]))
            rows.append(row)
    rows.sort(key=lambda r: (r["subject_id"], r["session"]))
    return pd.DataFrame(rows)


def write_feature_table(rows, path):
    if rows:
        names = [k for k in rows[0] if k not in ID_COLUMNS]
    else:
        names = []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ID_COLUMNS + names)
        for r in rows:
            w.writerow([r[c] for c in ID_COLUMNS] + [repr(float(r[n])) for n in names])


def read_feature_table(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype={"subject_id": str, "session": str, "group": str,
                                        "label": str}, float_precision="round_trip")
    except FileNotFoundError as exc:
        raise ConfigError(f"feature table not found: {path}") from exc


# -- stats ------------------------------------------------------------------------

BASELINE_FAMILIES = (("A", ("A",)), ("B", ("B",)), ("A+B", ("A", "B")))
PAIRED_FAMILIES = (
    ("responders A+B", ("A", "B"), Label.RESPONDER.value),
    ("non-responders A+B", ("A", "B"), Label.NON_RESPONDER.value),
    ("NS C", ("C",), None),
)


def baseline_features():
    return [rel_name(b.name, ch) for ch in FOREHEAD_CHANNELS for b in BANDS]


def paired_features():
    return (baseline_features()
            + [asym_name(b, p) for p in CHANNEL_PAIRS for b in ("lowalpha", "highalpha")]
            + [cord_name("theta", ch) for ch in FOREHEAD_CHANNELS])


def run_stats(df: pd.DataFrame, alpha=0.05, secondary=0.025) -> dict:
    """Baseline rank-sum and paired baseline-vs-post signed-rank comparison results."""
    if "label" not in df.columns or df["label"].isna().all():
        raise ConfigError("feature table carries no responder labels")
    base = df[df["session"] == "baseline"]
    t2 = []
    for fam, groups in BASELINE_FAMILIES:
        sub = base[base["group"].isin(groups)]
        comps = [Comparison(f, ("responder", "nonresponder"), "ranksum", fam)
                 for f in baseline_features()]
        res, _ = group_compare(sub, "label", comps, alpha=alpha, secondary=secondary,
                               allowed_groups={"responder", "nonresponder"})
        t2.extend(res)
    t3 = []
    for fam, groups, label in PAIRED_FAMILIES:
        sub = df[df["group"].isin(groups)]
        if label is not None:
            sub = sub[sub["label"] == label]
        comps = [Comparison(f, ("baseline", "post240"), "signedrank", fam)
                 for f in paired_features()]
        res, _ = group_compare(sub, "session", comps, alpha=alpha, secondary=secondary,
                               allowed_groups={"baseline", "post240"})
        t3.extend(res)
    return {"alpha": alpha, "secondary": secondary,
            "baseline": [r.to_json() for r in t2], "paired": [r.to_json() for r in t3]}


def cmd_stats(cfg: StudyConfig) -> int:
    df = read_feature_table(cfg.features_path)
    st = cfg["stats"]
    report = run_stats(df, st["alpha"], st["secondary"])
    out = cfg.out_dir
    _dump(report, out / "stats.json")
    text = (tables.render_comparisons(report["baseline"], "Baseline comparison: responders vs "
                                      "non-responders (Wilcoxon rank-sum)", report)
            + "\n"
            + tables.render_comparisons(report["paired"], "Session comparison: baseline vs 240-min "
                                        "post-treatment (Wilcoxon signed-rank)", report))
    (out / "stats.txt").write_text(text, encoding="utf-8", newline="\n")
    cfg.write_effective()
    return 0


# -- predict ----------------------------------------------------------------------

def baseline_dataset(df: pd.DataFrame, groups, feature_names) -> Dataset:
    sub = df[(df["session"] == "baseline") & df["group"].isin(groups)
             & df["label"].isin(["responder", "nonresponder"])].sort_values("subject_id")
    y = (sub["label"] == "responder").astype(int).to_numpy()
    return Dataset(sub[list(feature_names)].to_numpy(float), y, tuple(sub["subject_id"]),
                   tuple(feature_names))


def run_predict(df: pd.DataFrame, pcfg: dict, seed: int) -> tuple[dict, dict]:
    """Classifier x feature-set grids; returns (summary, per-fold details)."""
    panels = {"mixed " + "+".join(pcfg["mixed_groups"]) + " (3-fold)":
              ("3fold", tuple(pcfg["mixed_groups"]))}
    for g in pcfg["loso_groups"]:
        panels[f"{g} (LOSO)"] = ("loso", (g,))
    grid, details, errors = {}, {}, []
    best = None
    for panel, (scheme, groups) in panels.items():
        grid[panel] = {}
        for fs in pcfg["feature_sets"]:
            names = FEATURE_SETS[fs]
            data = baseline_dataset(df, groups, names)
            grid[panel][fs] = {}
            for kind in pcfg["kinds"]:
                hp = pcfg["hyperparams"].get(kind)
                try:
                    if scheme == "3fold":
                        rep = three_fold_cv(data, kind, seed, int(pcfg["repeats"]), hp)
                    else:
                        rep = loso_cv(data, kind, seed, hp)
                except EEGError as exc:
                    errors.append({"panel": panel, "feature_set": fs, "kind": kind,
                                   "error": f"{type(exc).__name__}: {exc}"})
                    grid[panel][fs][kind] = None
                    continue
                grid[panel][fs][kind] = rep.mean_sd
                details[f"{panel}|{fs}|{kind}"] = rep.to_dict()
                acc = rep.mean_sd["accuracy"]["mean"]
                if scheme == "3fold" and acc is not None and (best is None or acc > best[0]):
                    best = (acc, panel, fs, kind, groups)
    summary = {"seed": seed, "repeats": int(pcfg["repeats"]), "grid": grid, "errors": errors}
    if best is not None:
        acc, panel, fs, kind, groups = best
        summary["best"] = {"panel": panel, "feature_set": fs, "kind": kind,
                           "metrics": grid[panel][fs][kind], "groups": list(groups)}
    return summary, details


def cmd_predict(cfg: StudyConfig) -> int:
    df = read_feature_table(cfg.features_path)
    pcfg = cfg["predict"]
    summary, details = run_predict(df, pcfg, int(cfg["seed"]))
    out = cfg.out_dir
    _dump(summary, out / "predict.json")
    _dump(details, out / "predict_folds.json")
    (out / "predict.txt").write_text(tables.render_prediction_grid(summary), encoding="utf-8",
                                     newline="\n")
    bars = {panel: {fs: {k: ((v["accuracy"]["mean"], v["accuracy"]["sd"]) if v else (None, None))
                         for k, v in cells.items()}
                    for fs, cells in fsets.items()}
            for panel, fsets in summary["grid"].items()}
    plotting.plot_prediction_grid(bars, out / "predict_grid.svg")
    if "best" in summary:
        b = summary["best"]
        data = baseline_dataset(df, b["groups"], FEATURE_SETS[b["feature_set"]])
        model = fit(b["kind"], data, pcfg["hyperparams"].get(b["kind"]), seed=int(cfg["seed"]))
        (out / "best_model.json").write_text(model.to_json() + "\n", encoding="utf-8")
    cfg.write_effective()
    return 1 if summary["errors"] else 0


# -- report -----------------------------------------------------------------------

def cmd_report(cfg: StudyConfig) -> int:
    out = cfg.out_dir
    rep_dir = out / "report"
    rep_dir.mkdir(parents=True, exist_ok=True)
    manifest = json.loads(cfg.manifest_path.read_text(encoding="utf-8"))
    clin = cfg["clinical"]
    records = read_cohort_csv(cfg.manifest_path.parent / manifest["cohort_csv"],
                              clin["threshold"], clin["timepoint"])
    summary = cohort_summary(records, clin["timepoint"], clin["threshold"])
    _dump({g: {k: _clean(v) for k, v in s.__dict__.items()} for g, s in summary.items()},
          rep_dir / "cohort_summary.json")
    parts = [tables.render_cohort_summary(summary, clin["timepoint"])]

    # HDRS trajectories per responder status (ketamine arms) and saline
    tps = list(TIMEPOINTS)
    cats = {"responder": [r for r in records if r.group.value != "C" and r.label is Label.RESPONDER],
            "nonresponder": [r for r in records if r.group.value != "C"
                             and r.label is Label.NON_RESPONDER],
            "NS": [r for r in records if r.group.value == "C"]}
    curves = {}
    for name, recs in cats.items():
        if not recs:
            continue
        ms, ss = [], []
        for tp in tps:
            v = np.array([r.hdrs.scores[tp] for r in recs if tp in r.hdrs.scores], float)
            ms.append(v.mean() if v.size else np.nan)
            ss.append(v.std(ddof=1) if v.size > 1 else 0.0)
        curves[name] = (ms, ss)
    plotting.plot_hdrs_trajectories(curves, tps, rep_dir / "hdrs_trajectories.svg")

    psd_dir = out / "psd"
    if psd_dir.is_dir():
        from .spectrum import read_psd_csv
        for grp in ("A", "B"):
            spectra, freqs = {"responder": [], "nonresponder": []}, None
            for r in records:
                if r.group.value != grp or r.label.value not in spectra:
                    continue
                chans = []
                for ch in FOREHEAD_CHANNELS:
                    p = psd_dir / f"{r.subject_id}_baseline_{ch}.csv"
                    if not p.exists():
                        break
                    psd = read_psd_csv(p)
                    keep = (psd.freqs_hz >= 1) & (psd.freqs_hz <= 12)
                    freqs = psd.freqs_hz[keep]
                    chans.append(psd.power[keep] / psd.power[keep].sum())
                if len(chans) == len(FOREHEAD_CHANNELS):
                    spectra[r.label.value].append(np.mean(chans, axis=0))
            if freqs is not None:
                plotting.plot_mean_spectra(freqs, spectra, rep_dir / f"baseline_spectra_{grp}.svg",
                                           title=f"group {grp}: baseline relative spectra")
    for name in ("stats.txt", "predict.txt"):
        p = out / name
        if p.exists():
            parts.append(p.read_text(encoding="utf-8"))
    (rep_dir / "report.txt").write_text("\n".join(parts), encoding="utf-8", newline="\n")
    cfg.write_effective()
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "features": cmd_features,
    "stats": cmd_stats,
    "predict": cmd_predict,
    "report": cmd_report,
}
