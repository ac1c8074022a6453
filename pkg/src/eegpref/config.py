"""Experiment configuration (JSON).

Every default lives in ``DEFAULT_CONFIG``; a user file only lists what
it overrides. Unknown keys are rejected at every level. Hyperparameter
values and selector ``k`` may be lists, which expand into a grid.
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from .classifiers import KINDS, ClassifierSpec
from .core import LabelScheme
from .errors import ConfigurationError, EEGPrefError
from .evaluation import SelectorConfig
from .features import ChannelPolicy, PowerMode
from .pipeline import PreprocessConfig
from .preprocess import FilterSpec
from .synthgen import SynthConfig

DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": 42,
    "out_dir": "out",
    "threads": 1,
    "data": {"dir": None, "labels": None},
    "synth": {
        "n_subjects": 18,
        "n_trials": 12,
        "fs_hz": 250.0,
        "n_channels": 8,
        "epoch_seconds": 30.0,
        "band_amplitudes": {"delta": 20.0, "theta": 10.0, "alpha": 15.0, "beta": 8.0, "gamma": 4.0},
        "pink_noise_uV": 10.0,
        "beta_effect": 0.5,
        "artifact_rate": 0.0,
        "seed": None,
    },
    "preprocess": {
        "filter": {"kind": "bandpass", "low_hz": 0.5, "high_hz": 60.0, "order": 4},
        "notch_50hz": False,
        "flat_fraction": 0.5,
        "var_lo": 0.1,
        "var_hi": 10.0,
        "peak_uV": 150.0,
        "reference": True,
    },
    "labels": {"scheme": "binary_like_dislike", "threshold": 4},
    "features": {"channel_policy": "average", "power_mode": "relative"},
    "selectors": [
        {"method": "rfe", "k": 4, "ranker": "ridge"},
        {"method": "sbs", "k": 4, "folds": 5},
    ],
    "classifiers": [{"kind": kind, "hyperparameters": {}} for kind in KINDS],
    "evaluation": {"folds": 10, "test_fraction": 0.30, "shuffle_labels": False},
}

# run-time knobs that must not change any output bytes
_NOT_DIGESTED = ("out_dir", "threads")
_SELECTOR_KEYS = {"method", "k", "ranker", "folds"}
_CLASSIFIER_KEYS = {"kind", "hyperparameters"}


def _merge(base: dict, override: dict, where: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigurationError(f"unknown config key '{where}{key}'")
        if isinstance(base[key], dict) and key != "band_amplitudes":
            if not isinstance(value, dict):
                raise ConfigurationError(f"config key '{where}{key}' must be an object")
            out[key] = _merge(base[key], value, f"{where}{key}.")
        elif key == "band_amplitudes":
            if not isinstance(value, dict):
                raise ConfigurationError(f"config key '{where}{key}' must be an object")
            unknown = set(value) - set(base[key])
            if unknown:
                raise ConfigurationError(f"unknown band(s) in '{where}{key}': {sorted(unknown)}")
            out[key] = {**base[key], **value}
        else:
            out[key] = copy.deepcopy(value)
    return out


def digest(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class ExperimentConfig:
    raw: Dict[str, Any]

    @classmethod
    def from_dict(cls, user: Optional[dict] = None, seed: Optional[int] = None,
                  out_dir: Optional[str] = None, threads: Optional[int] = None) -> "ExperimentConfig":
        user = dict(user or {})
        raw = _merge(DEFAULT_CONFIG, {k: v for k, v in user.items() if k not in ("selectors", "classifiers")}, "")
        for key in ("selectors", "classifiers"):
            if key in user:
                if not isinstance(user[key], list) or not user[key]:
                    raise ConfigurationError(f"'{key}' must be a nonempty list")
                raw[key] = copy.deepcopy(user[key])
        if seed is not None:
            raw["seed"] = seed
            raw["synth"]["seed"] = None
        if out_dir is not None:
            raw["out_dir"] = str(out_dir)
        if threads is not None:
            raw["threads"] = threads
        cfg = cls(raw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: Optional[str | Path] = None, **overrides) -> "ExperimentConfig":
        if path is None:
            return cls.from_dict({}, **overrides)
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigurationError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(user, dict):
            raise ConfigurationError(f"{path}: top level must be a JSON object")
        return cls.from_dict(user, **overrides)

    # ------------------------------------------------------------------
    def validate(self) -> None:
        r = self.raw
        if not isinstance(r["seed"], int) or isinstance(r["seed"], bool):
            raise ConfigurationError(f"seed must be an integer, got {r['seed']!r}")
        if not isinstance(r["threads"], int) or r["threads"] < 1:
            raise ConfigurationError(f"threads must be an integer >= 1, got {r['threads']!r}")
        try:
            self.synth_config()
            self.preprocess_config()
            LabelScheme(r["labels"]["scheme"])
            ChannelPolicy(r["features"]["channel_policy"])
            PowerMode(r["features"]["power_mode"])
            self.selector_grid()
            self.classifier_grid()
        except ConfigurationError:
            raise
        except (EEGPrefError, ValueError, TypeError) as exc:
            raise ConfigurationError(str(exc)) from exc
        thr = r["labels"]["threshold"]
        if r["labels"]["scheme"] == LabelScheme.BINARY.value and not (isinstance(thr, int) and 2 <= thr <= 5):
            raise ConfigurationError(f"labels.threshold must be an integer in 2..5, got {thr!r}")
        ev = r["evaluation"]
        if not isinstance(ev["folds"], int) or ev["folds"] < 2:
            raise ConfigurationError(f"evaluation.folds must be an integer >= 2, got {ev['folds']!r}")
        if not 0 < ev["test_fraction"] < 1:
            raise ConfigurationError(f"evaluation.test_fraction must be in (0, 1), got {ev['test_fraction']!r}")
        if not isinstance(ev["shuffle_labels"], bool):
            raise ConfigurationError("evaluation.shuffle_labels must be a boolean")

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def threads(self) -> int:
        return self.raw["threads"]

    @property
    def out_dir(self) -> Path:
        return Path(self.raw["out_dir"])

    @property
    def data_dir(self) -> Path:
        d = self.raw["data"]["dir"]
        return Path(d) if d else self.out_dir / "data"

    @property
    def labels_path(self) -> Path:
        p = self.raw["data"]["labels"]
        return Path(p) if p else self.data_dir / "labels.csv"

    def synth_config(self) -> SynthConfig:
        s = dict(self.raw["synth"])
        s["seed"] = self.seed if s["seed"] is None else s["seed"]
        return SynthConfig(**s)

    def preprocess_config(self) -> PreprocessConfig:
        p = dict(self.raw["preprocess"])
        p["filter"] = FilterSpec(**p["filter"])
        return PreprocessConfig(**p)

    def selector_grid(self) -> List[SelectorConfig]:
        out = []
        for entry in self.raw["selectors"]:
            if not isinstance(entry, dict):
                raise ConfigurationError("each selector entry must be an object")
            unknown = set(entry) - _SELECTOR_KEYS
            if unknown:
                raise ConfigurationError(f"unknown selector key(s) {sorted(unknown)}")
            for k in _as_list(entry.get("k", 4)):
                out.append(SelectorConfig(entry.get("method", "rfe"), k,
                                          entry.get("ranker", "ridge"), entry.get("folds", 5)))
        return out

    def classifier_grid(self) -> List[ClassifierSpec]:
        out = []
        for entry in self.raw["classifiers"]:
            if not isinstance(entry, dict):
                raise ConfigurationError("each classifier entry must be an object")
            unknown = set(entry) - _CLASSIFIER_KEYS
            if unknown:
                raise ConfigurationError(f"unknown classifier key(s) {sorted(unknown)}")
            hp = entry.get("hyperparameters", {})
            names = sorted(hp)
            for values in itertools.product(*(_as_list(hp[n]) for n in names)):
                out.append(ClassifierSpec(entry.get("kind"), dict(zip(names, values)), self.seed))
        return out

    # ------------------------------------------------------------------
    def digested(self) -> dict:
        return {k: v for k, v in self.raw.items() if k not in _NOT_DIGESTED}

    @property
    def digest(self) -> str:
        return digest(self.digested())

    @property
    def synth_digest(self) -> str:
        return digest(self.synth_config().to_dict())

    @property
    def features_digest(self) -> str:
        r = self.raw
        return digest({"synth": self.synth_config().to_dict(), "data": r["data"],
                       "preprocess": r["preprocess"], "labels": r["labels"], "features": r["features"]})
