"""Experiment configuration files.

The format is INI-like::

    [dataset]                 # or [synthetic]
    path = compas.csv
    sensitive = sex, race
    majority = Male, Caucasian
    response = two_year_recid

    [experiment]
    L = 5
    repeats = 50
    master_seed = 7

    [mechanisms]
    1a
    2c

    [imputer.knn]
    k = 5

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from ..amputation import mechanism
from ..data import Schema
from ..imputers import IMPUTERS, imputer_parameters
from ..metrics import LITERAL, STANDARD
from ..prediction.forest import ForestConfig
from .synthetic import SyntheticSpec


class ConfigError(ValueError):
    """Invalid experiment configuration."""


IMPUTE = "impute"
PREDICT = "predict"

_DATASET_KEYS = {"path", "sensitive", "majority", "response", "normalize"}
_EXPERIMENT_KEYS = {
    "L", "repeats", "master_seed", "task", "train_fraction", "use_sensitive_in_imputation",
    "use_sensitive_in_prediction", "fpr_mode", "out", "format", "forest_trees",
    "forest_max_depth", "forest_min_leaf",
}


@dataclass
class ExperimentConfig:
    mechanisms: list
    imputers: dict  # name -> hyperparameter dict, in run order
    L: int = 5
    repeats: int = 50
    master_seed: int = 0
    task: str = IMPUTE
    dataset_path: Optional[Path] = None
    schema: Schema = field(default_factory=Schema)
    normalize: bool = True
    synthetic: Optional[SyntheticSpec] = None
    train_fraction: float = 0.8
    use_sensitive_in_imputation: bool = True
    use_sensitive_in_prediction: bool = True
    fpr_mode: str = STANDARD
    forest: ForestConfig = field(default_factory=ForestConfig)
    out: Path = Path("results")
    format: str = "csv"

    def validate(self) -> "ExperimentConfig":
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if not self.mechanisms:
            raise ConfigError("at least one mechanism is required")
        if not self.imputers:
            raise ConfigError("at least one imputer is required")
        if (self.dataset_path is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of [dataset] or [synthetic]")
        if self.task not in (IMPUTE, PREDICT):
            raise ConfigError(f"task must be {IMPUTE!r} or {PREDICT!r}")
        if self.fpr_mode not in (STANDARD, LITERAL):
            raise ConfigError(f"fpr_mode must be {STANDARD!r} or {LITERAL!r}")
        if self.format not in ("csv", "md"):
            raise ConfigError("format must be csv or md")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        for label in self.mechanisms:
            try:
                mechanism(label, self.L)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for name in self.imputers:
            if name not in IMPUTERS:
                raise ConfigError(f"unknown imputer {name!r}; choose from {', '.join(IMPUTERS)}")
        return self


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _number(text: str):
    text = text.strip()
    if text.lower() in ("none", "auto"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def coerce_value(text: str, default):
    if isinstance(default, bool):
        return _bool(text)
    if isinstance(default, int):
        value = _number(text)
        if not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {text!r}")
        return value
    if isinstance(default, float) or default is None:
        return _number(text)
    return text.strip()


def _list(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def _check_keys(section: str, keys, allowed) -> None:
    unknown = sorted(set(keys) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}]: unknown keys {unknown}")


def parse_config(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        allow_no_value=True, inline_comment_prefixes=("#",), comment_prefixes=("#",),
        delimiters=("=",), interpolation=None,
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    kwargs: dict = {"mechanisms": [], "imputers": {}}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "dataset":
            _check_keys(section, items, _DATASET_KEYS)
            if "path" not in items:
                raise ConfigError("[dataset]: path is required")
            path = Path(items["path"])
            kwargs["dataset_path"] = path if path.is_absolute() else base_dir / path
            majority = [None if m.lower() == "auto" else m for m in _list(items.get("majority", ""))]
            kwargs["schema"] = Schema(_list(items.get("sensitive", "")), majority,
                                      items.get("response") or None)
            if "normalize" in items:
                kwargs["normalize"] = _bool(items["normalize"])
        elif section == "synthetic":
            defaults = {f.name: f.default for f in fields(SyntheticSpec)}
            _check_keys(section, items, defaults)
            try:
                kwargs["synthetic"] = SyntheticSpec(**{k: coerce_value(v, defaults[k]) for k, v in items.items()})
            except ValueError as exc:
                raise ConfigError(f"[synthetic]: {exc}") from None
        elif section == "experiment":
            _check_keys(section, items, _EXPERIMENT_KEYS)
            forest = {}
            for key, text_value in items.items():
                if key.startswith("forest_"):
                    forest[key] = coerce_value(text_value, 0)
                elif key in ("L", "repeats", "master_seed"):
                    kwargs[key] = coerce_value(text_value, 0)
                elif key == "train_fraction":
                    kwargs[key] = coerce_value(text_value, 0.0)
                elif key.startswith("use_sensitive"):
                    kwargs[key] = _bool(text_value)
                elif key == "out":
                    kwargs[key] = Path(text_value.strip())
                else:
                    kwargs[key] = text_value.strip()
            if forest:
                kwargs["forest"] = ForestConfig(
                    n_trees=forest.get("forest_trees", 100),
                    max_depth=forest.get("forest_max_depth", 12),
                    min_leaf=forest.get("forest_min_leaf", 5),
                )
        elif section == "mechanisms":
            for label, value in items.items():
                if value is not None:
                    raise ConfigError(f"[mechanisms]: expected one label per line, got {label!r} = {value!r}")
                kwargs["mechanisms"].append(label)
        elif section.startswith("imputer."):
            name = section.split(".", 1)[1]
            if name not in IMPUTERS:
                raise ConfigError(f"unknown imputer {name!r}; choose from {', '.join(IMPUTERS)}")
            defaults = imputer_parameters(name)
            defaults.pop("use_sensitive", None)
            _check_keys(section, items, defaults)
            kwargs["imputers"][name] = {k: coerce_value(v or "", defaults[k]) for k, v in items.items()}
        else:
            raise ConfigError(f"unknown section [{section}]")
    try:
        return ExperimentConfig(**kwargs).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent)
