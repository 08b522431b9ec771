"""Study configuration: JSON file + defaults + CLI overrides."""
from __future__ import annotations

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .ml import KINDS

DEFAULTS = {
    "out_dir": "out",
    "manifest": None,  # default: <out_dir>/data/manifest.json
    "features_csv": None,  # default: <out_dir>/features.csv
    "seed": 0,
    "min_seconds": 540.0,
    "filter": {"band": [1.0, 12.0], "order": 1024},
    "welch": {"window_len": 256, "overlap": 128, "nfft": None, "resolution_hz": 0.5,
              "window_fn": "hamming"},
    "features": {"asymmetry_use": "relative", "cordance_mode": "band", "write_psd": True},
    "clinical": {"threshold": 0.45, "timepoint": "240min"},
    "stats": {"alpha": 0.05, "secondary": 0.025},
    "predict": {
        "kinds": list(KINDS),
        "feature_sets": ["theta", "lowalpha", "theta+lowalpha"],
        "repeats": 10,
        "mixed_groups": ["A", "B"],
        "loso_groups": ["A", "B"],
        "hyperparams": {},
    },
    "simulate": {
        "n_per_group": {"A": 18, "B": 19, "C": 18},
        "responder_fraction": {"A": 11 / 18, "B": 5 / 19, "C": 2 / 18},
        "theta_deficit": 0.5,
        "post_alpha_gain": 1.5,
        "subject_jitter": 0.15,
        "eeg": {"fs_hz": 512.0, "duration_s": 600.0, "quantum_uv": 0.001},
    },
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            # free-form sections
            if path in ("simulate", "simulate.eeg", "simulate.hdrs_model", "predict.hyperparams",
                        "simulate.n_per_group", "simulate.responder_fraction"):
                out[key] = copy.deepcopy(val)
                continue
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = copy.deepcopy(val)
    return out


class StudyConfig(dict):
    """Resolved configuration; a plain dict with path helpers."""

    @classmethod
    def load(cls, path=None, overrides: dict | None = None) -> "StudyConfig":
        doc = {}
        if path is not None:
            try:
                doc = json.loads(Path(path).read_text(encoding="utf-8"))
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
            if not isinstance(doc, dict):
                raise ConfigError("config must be a JSON object")
        cfg = _merge(DEFAULTS, doc)
        cfg = _merge(cfg, {k: v for k, v in (overrides or {}).items() if v is not None})
        cfg = cls(cfg)
        cfg.check()
        return cfg

    def check(self):
        lo, hi = self["filter"]["band"]
        if not lo < hi:
            raise ConfigError("filter.band must be [low, high] with low < high")
        if self["filter"]["order"] % 2:
            raise ConfigError("filter.order must be even")
        unknown = set(self["predict"]["kinds"]) - set(KINDS)
        if unknown:
            raise ConfigError(f"unknown classifier kind(s) {sorted(unknown)}")
        if self["features"]["asymmetry_use"] not in ("relative", "absolute"):
            raise ConfigError("features.asymmetry_use must be relative or absolute")
        if self["features"]["cordance_mode"] not in ("band", "channel"):
            raise ConfigError("features.cordance_mode must be band or channel")

    @property
    def out_dir(self) -> Path:
        return Path(self["out_dir"])

    @property
    def manifest_path(self) -> Path:
        return Path(self["manifest"]) if self["manifest"] else self.out_dir / "data" / "manifest.json"

    @property
    def features_path(self) -> Path:
        return Path(self["features_csv"]) if self["features_csv"] else self.out_dir / "features.csv"

    def effective(self) -> dict:
        d = dict(self)
        d["manifest"] = str(self.manifest_path)
        d["features_csv"] = str(self.features_path)
        return d

    def write_effective(self, directory=None) -> Path:
        directory = Path(directory) if directory else self.out_dir
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / "effective_config.json"
        path.write_text(json.dumps(self.effective(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path
