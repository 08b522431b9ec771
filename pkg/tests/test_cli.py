import hashlib
import json
import shutil

import numpy as np
import pytest

from ketamine_eeg.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, build_parser, main
from ketamine_eeg.config import DEFAULTS, StudyConfig
from ketamine_eeg.errors import ConfigError, EmptyCohort
from ketamine_eeg.ml import KINDS
from ketamine_eeg.pipeline import (
    cmd_features,
    cmd_simulate,
    cohort_spec_from_config,
    feature_table,
    read_feature_table,
    run_predict,
    run_stats,
)
from ketamine_eeg.synth import CohortSpec, SynthSpec, gen_cohort

from conftest import small_config

CFG = StudyConfig.load()


def tree_digest(root):
    out = {}
    for f in sorted(root.rglob("*")):
        if f.is_file():
            out[str(f.relative_to(root))] = hashlib.sha256(f.read_bytes()).hexdigest()
    return out


# -- config -------------------------------------------------------------------------

def test_defaults_and_file_merge(tmp_path):
    cfg = StudyConfig.load()
    assert cfg["filter"] == {"band": [1.0, 12.0], "order": 1024}
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"filter": {"order": 512}, "stats": {"alpha": 0.01}}))
    cfg = StudyConfig.load(path)
    assert cfg["filter"] == {"band": [1.0, 12.0], "order": 512}
    assert cfg["stats"] == {"alpha": 0.01, "secondary": 0.025}
    assert DEFAULTS["filter"]["order"] == 1024


@pytest.mark.parametrize("doc", [{"filtr": {}}, {"filter": {"ordr": 4}}, {"filter": {"order": 11}},
                                 {"filter": {"band": [12, 1]}}, {"predict": {"kinds": ["DRBMC"]}},
                                 {"features": {"asymmetry_use": "dB"}}, [1, 2]])
def test_bad_config_rejected(tmp_path, doc):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        StudyConfig.load(path)


def test_missing_or_broken_config_file(tmp_path):
    with pytest.raises(ConfigError):
        StudyConfig.load(tmp_path / "nope.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        StudyConfig.load(tmp_path / "bad.json")


def test_effective_config_reproduces_run(tmp_path):
    cfg = small_config(tmp_path / "a")
    path = cfg.write_effective()
    echoed = json.loads(path.read_text())
    assert echoed["manifest"] == str(tmp_path / "a" / "data" / "manifest.json")
    again = StudyConfig.load(path)
    assert again.effective() == cfg.effective()


def test_every_flag_maps_to_a_config_key(tmp_path):
    args = build_parser().parse_args(["features", "--out", str(tmp_path), "--seed", "3",
                                      "--band", "2:10", "--filter-order", "256",
                                      "--min-seconds", "5"])
    from ketamine_eeg.cli import load_config
    cfg = load_config(args)
    assert (cfg["seed"], cfg["filter"]["band"], cfg["filter"]["order"], cfg["min_seconds"]) == \
        (3, [2.0, 10.0], 256, 5.0)
    assert cfg.out_dir == tmp_path


# -- exit codes ---------------------------------------------------------------------

def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["features", "--band", "x"]) == EXIT_USAGE
    assert main(["features", "--out", str(tmp_path)]) == EXIT_USAGE  # no manifest yet
    (tmp_path / "c.json").write_text('{"unknown": 1}')
    assert main(["stats", "--config", str(tmp_path / "c.json")]) == EXIT_USAGE
    assert "config error" in capsys.readouterr().err


def test_help_exits_0():
    assert main(["--help"]) == EXIT_OK


def test_empty_cohort_is_reported(tmp_path):
    cfg = small_config(tmp_path, n_per_group={"A": 0, "B": 0, "C": 0})
    with pytest.raises(EmptyCohort):
        cmd_simulate(cfg)
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"simulate": {"n_per_group": {"A": 0, "B": 0, "C": 0}}}))
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_USAGE


# -- simulate and features ----------------------------------------------------------

def test_full_manifest_gives_110_rows(tmp_path):
    cfg = small_config(tmp_path, n_per_group={"A": 18, "B": 19, "C": 18},
                       responder_fraction={"A": 11 / 18, "B": 5 / 19, "C": 2 / 18},
                       eeg={"duration_s": 2.5})
    cfg["min_seconds"] = 2.0
    cfg["features"]["write_psd"] = False
    assert cmd_simulate(cfg) == 0
    manifest = json.loads(cfg.manifest_path.read_text())
    assert len(manifest["recordings"]) == 110
    assert cmd_features(cfg) == 0
    df = read_feature_table(cfg.features_path)
    assert len(df) == 110
    assert df.groupby("group")["subject_id"].nunique().to_dict() == {"A": 18, "B": 19, "C": 18}
    assert list(df["subject_id"]) == sorted(df["subject_id"])
    assert (df.groupby("subject_id")["session"].apply(tuple) == ("baseline", "post240")).all()
    for col in ("absdb_theta_Fp1", "rel_lowalpha_AF8", "asym_lowalpha_Fp1-Fp2",
                "cord_theta_AF7"):
        assert col in df.columns


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = small_config(out)
    cfg_path = out.parent / f"{out.name}.json"
    cfg_path.write_text(json.dumps({k: v for k, v in cfg.items() if k != "out_dir"}))
    assert main(["all", "--config", str(cfg_path), "--out", str(out)]) == EXIT_OK
    return out, cfg_path


def test_all_outputs_present(small_run):
    out, _ = small_run
    for name in ("features.csv", "features_qc.json", "stats.json", "stats.txt", "predict.json",
                 "predict.txt", "predict_grid.svg", "predict_folds.json", "best_model.json",
                 "effective_config.json", "report/report.txt", "report/cohort_summary.json",
                 "report/hdrs_trajectories.svg", "report/baseline_spectra_A.svg",
                 "data/manifest.json", "data/cohort.csv"):
        assert (out / name).is_file(), name
    for svg in out.rglob("*.svg"):
        text = svg.read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text
    assert "Baseline comparison" in (out / "report" / "report.txt").read_text()


def test_rerun_is_byte_identical(small_run):
    out, cfg_path = small_run
    before = tree_digest(out)
    assert main(["all", "--config", str(cfg_path), "--out", str(out)]) == EXIT_OK
    assert tree_digest(out) == before


def copy_data(src, dst):
    shutil.copytree(src / "data", dst / "data")
    return json.loads((dst / "data" / "manifest.json").read_text())


def test_missing_sidecar_is_isolated(small_run, tmp_path):
    out, _ = small_run
    cfg = small_config(tmp_path)
    cfg["features"]["write_psd"] = False
    manifest = copy_data(out, tmp_path)
    victim = manifest["recordings"][3]
    (tmp_path / "data" / victim["sidecar_json"]).unlink()
    assert cmd_features(cfg) == EXIT_PARTIAL
    df = read_feature_table(cfg.features_path)
    assert len(df) == len(manifest["recordings"]) - 1
    qc = json.loads((tmp_path / "features_qc.json").read_text())
    assert [e["recording_csv"] for e in qc["errors"]] == [victim["recording_csv"]]
    assert victim["sidecar_json"] in qc["errors"][0]["error"]


def test_corrupt_recording_gives_exit_1(small_run, tmp_path):
    out, _ = small_run
    cfg = small_config(tmp_path)
    cfg["features"]["write_psd"] = False
    manifest = copy_data(out, tmp_path)
    target = tmp_path / "data" / manifest["recordings"][0]["recording_csv"]
    lines = target.read_text().splitlines()
    target.write_text("\n".join(lines[:5] + ["1,2"] + lines[6:]) + "\n")
    assert main(["features", "--out", str(tmp_path), "--min-seconds", "10"]) == EXIT_PARTIAL
    assert len(read_feature_table(tmp_path / "features.csv")) == len(manifest["recordings"]) - 1


# -- stats --------------------------------------------------------------------------

def strong_table(seed=0, n=(18, 19, 18), duration=30.0, **kw):
    spec = CohortSpec(n_per_group=dict(zip("ABC", n)), eeg=SynthSpec(duration_s=duration),
                      seed=seed, **kw)
    pairs, records = gen_cohort(spec)
    return feature_table(pairs, records, CFG)


@pytest.fixture(scope="module")
def strong_df():
    return strong_table()


def test_strong_cohort_flags_theta(strong_df):
    report = run_stats(strong_df)
    ab = [r for r in report["baseline"] if r["family"] == "A+B" and "rel_theta" in r["feature"]]
    assert len(ab) == 4 and all(r["reject_primary"] for r in ab)
    resp = {r["feature"]: r for r in report["paired"] if r["family"] == "responders A+B"}
    assert all(resp[f"rel_lowalpha_{ch}"]["reject_primary"] for ch in ("AF7", "Fp1", "Fp2", "AF8"))


def test_empty_responder_set_is_insufficient_n(strong_df):
    df = strong_df.copy()
    df["label"] = "nonresponder"
    report = run_stats(df)
    assert all(r["status"] == "insufficient-n" for r in report["baseline"])
    resp = [r for r in report["paired"] if r["family"] == "responders A+B"]
    assert resp and all(r["status"] == "insufficient-n" for r in resp)
    assert not any(r["reject_primary"] for r in report["baseline"] + resp)


def test_missing_labels_rejected(strong_df):
    with pytest.raises(ConfigError):
        run_stats(strong_df.drop(columns=["label"]))


def test_null_cohorts_flag_within_alpha():
    # family-wise: one Hochberg family of 16 baseline comparisons per seed
    seeds, hits = 30, 0
    for seed in range(seeds):
        df = strong_table(seed, n=(12, 12, 0), duration=3.0, theta_deficit=1.0, post_alpha_gain=1.0,
                          responder_fraction={"A": 0.5, "B": 0.5, "C": 0.0})
        fam = [r for r in run_stats(df)["baseline"] if r["family"] == "A+B"]
        hits += any(r["reject_primary"] for r in fam)
    from scipy.stats import binom
    assert hits <= binom.ppf(0.99, seeds, 0.05)


# -- predict ------------------------------------------------------------------------

def test_full_grid_has_18_cells(strong_df):
    pcfg = dict(CFG["predict"], repeats=1)
    summary, details = run_predict(strong_df, pcfg, seed=0)
    panel = next(p for p in summary["grid"] if "3-fold" in p)
    cells = [(fs, k) for fs, row in summary["grid"][panel].items() for k in row]
    assert len(cells) == 18 and set(KINDS) == {k for _, k in cells}
    assert set(summary["grid"]) == {panel, "A (LOSO)", "B (LOSO)"}
    best = summary["best"]
    assert set(best["metrics"]) >= {"accuracy", "sensitivity", "specificity", "precision",
                                    "f_measure"}
    assert len(details) == 3 * 18


def test_two_band_column_weakly_dominates(strong_df):
    # NMSC is left out: its plain Euclidean distance lets the weak low-alpha columns
    # dilute theta, so it has no reason to improve with the extra band
    pcfg = dict(CFG["predict"], repeats=5, kinds=["LDA", "SvmRbf"], loso_groups=[])
    acc = {}
    for seed, df in enumerate([strong_df, strong_table(1), strong_table(2)]):
        row = next(iter(run_predict(df, pcfg, seed=seed)[0]["grid"].values()))
        for fs, cells in row.items():
            for kind, m in cells.items():
                acc.setdefault((fs, kind), []).append(m["accuracy"]["mean"])
    for kind in pcfg["kinds"]:
        both = np.mean(acc["theta+lowalpha", kind])
        assert both >= np.mean(acc["theta", kind]) - 1
        assert both >= np.mean(acc["lowalpha", kind]) - 1


def test_single_class_cell_reported_not_fatal(strong_df):
    df = strong_df.copy()
    df.loc[df["group"] == "B", "label"] = "nonresponder"
    pcfg = dict(CFG["predict"], repeats=1, kinds=["NMSC"], feature_sets=["theta"])
    summary, _ = run_predict(df, pcfg, seed=0)
    assert summary["grid"]["B (LOSO)"]["theta"]["NMSC"] is None
    assert [e["panel"] for e in summary["errors"]] == ["B (LOSO)"]


def test_cohort_spec_from_config():
    spec = cohort_spec_from_config(CFG)
    assert spec.n_per_group == {"A": 18, "B": 19, "C": 18}
    assert (spec.seed, spec.theta_deficit, spec.post_alpha_gain) == (CFG["seed"], 0.5, 1.5)
    assert spec.eeg.duration_s == 600.0
    spec = cohort_spec_from_config(StudyConfig.load(None, {"seed": 9}))
    assert spec.seed == 9
