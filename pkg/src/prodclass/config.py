"""Pipeline configuration: a YAML document with nested sections.

Example::

    data:
      path: corpus.csv
      text_column: name
      label_column: category
    tokenizer:
      lowercase: true
      fold_diacritics: false
    vectorization:
      kind: tfidf            # count, tfidf, w2v-cbow-sum, ..., glove-sum
      params: {max_features: 3000, max_ngram: 3}
    classifier:
      algorithm: logistic_regression
      hyperparameters: {learning_rate: 0.1}
      grid: {}               # used by the grid command; empty -> built-in default grid
    split: {test_fraction: 0.2, stratified: true}
    cv: {k: 10, stratified: true}
    seed: 0
    workers: 1
    output_dir: runs/default

Validation checks every field before any data is read and reports all
problems at once, each prefixed by its dotted path.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .classifiers import ALGORITHMS
from .embeddings import allowed_params, parse_kind
from .errors import ConfigError, ProdclassError


@dataclass
class DataConfig:
    path: str = ""
    text_column: str = "name"
    label_column: str = "category"


@dataclass
class TokenizerSection:
    lowercase: bool = True
    fold_diacritics: bool = False


@dataclass
class VectorizationConfig:
    kind: str = "tfidf"
    params: dict = field(default_factory=dict)


@dataclass
class ClassifierConfig:
    algorithm: str = "logistic_regression"
    hyperparameters: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)


@dataclass
class SplitConfig:
    test_fraction: float = 0.2
    stratified: bool = True


@dataclass
class CVConfig:
    k: int = 10
    stratified: bool = True


@dataclass
class PipelineConfig:
    data: DataConfig = field(default_factory=DataConfig)
    tokenizer: TokenizerSection = field(default_factory=TokenizerSection)
    vectorization: VectorizationConfig = field(default_factory=VectorizationConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    cv: CVConfig = field(default_factory=CVConfig)
    seed: int = 0
    workers: int = 1
    output_dir: str = "runs/default"

    # construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, raw: dict | None) -> "PipelineConfig":
        errors: list[str] = []
        cfg = _build(cls, raw or {}, "", errors)
        if errors:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
        cfg.validate()
        return cfg

    @classmethod
    def from_yaml(cls, path: str | Path, overrides: list[str] | None = None) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(apply_overrides(raw, overrides or []))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # validation -----------------------------------------------------------
    def validate(self, need_data: bool = True) -> "PipelineConfig":
        errors = []
        if need_data and not self.data.path:
            errors.append("data.path: required")
        try:
            kind = parse_kind(self.vectorization.kind)
            bad = set(self.vectorization.params) - allowed_params(kind)
            if bad:
                errors.append(f"vectorization.params: {sorted(bad)} not accepted by {kind.value!r}; "
                              f"allowed: {sorted(allowed_params(kind))}")
        except ConfigError as exc:
            errors.append(f"vectorization.kind: {exc}")
        algo = self.classifier.algorithm
        if algo not in ALGORITHMS:
            errors.append(f"classifier.algorithm: unknown {algo!r}; choose from {sorted(ALGORITHMS)}")
        else:
            cls = ALGORITHMS[algo]
            bad = set(self.classifier.hyperparameters) - set(cls.defaults)
            if bad:
                errors.append(f"classifier.hyperparameters: {sorted(bad)} not accepted by {algo!r}; "
                              f"allowed: {sorted(cls.defaults)}")
            else:
                try:
                    cls(**self.classifier.hyperparameters)
                except ProdclassError as exc:
                    errors.append(f"classifier.hyperparameters: {exc}")
            for key, vals in self.classifier.grid.items():
                if key not in cls.defaults:
                    errors.append(f"classifier.grid.{key}: not a hyperparameter of {algo!r}")
                elif not isinstance(vals, list) or not vals:
                    errors.append(f"classifier.grid.{key}: must be a non-empty list")
        if not 0.0 < self.split.test_fraction < 1.0:
            errors.append("split.test_fraction: must lie in (0, 1)")
        if self.cv.k < 2:
            errors.append("cv.k: must be >= 2")
        if self.workers < 1:
            errors.append("workers: must be >= 1")
        if not self.output_dir:
            errors.append("output_dir: required")
        if errors:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
        return self


_SCALARS = {int: (int,), float: (int, float), bool: (bool,), str: (str,), dict: (dict,)}


def _build(cls, raw, prefix: str, errors: list[str]):
    if not isinstance(raw, dict):
        errors.append(f"{prefix.rstrip('.') or '<root>'}: expected a mapping")
        return cls()
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in fields:
            errors.append(f"{prefix}{key}: unknown field; expected one of {sorted(fields)}")
    kwargs = {}
    hints = {f.name: f.type for f in dataclasses.fields(cls)}
    for name, f in fields.items():
        if name not in raw:
            continue
        value = raw[name]
        typ = _resolve(hints[name])
        if dataclasses.is_dataclass(typ):
            kwargs[name] = _build(typ, value, f"{prefix}{name}.", errors)
            continue
        ok = _SCALARS.get(typ, (object,))
        if value is None and typ is dict:
            value = {}
        if not isinstance(value, ok) or (typ in (int, float) and isinstance(value, bool)):
            errors.append(f"{prefix}{name}: expected {typ.__name__}, got {type(value).__name__}")
            continue
        kwargs[name] = float(value) if typ is float else value
    return cls(**kwargs)


def _resolve(annotation):
    if isinstance(annotation, str):
        return {"int": int, "float": float, "bool": bool, "str": str, "dict": dict, **{
            c.__name__: c for c in (DataConfig, TokenizerSection, VectorizationConfig, ClassifierConfig,
                                     SplitConfig, CVConfig)}}[annotation]
    return annotation


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as YAML scalars."""
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"override {item!r} has an empty key")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError:
            value = text
        node = out
        for p in parts[:-1]:
            nxt = node.get(p)
            if not isinstance(nxt, dict):
                nxt = node[p] = {}
            node = nxt
        node[parts[-1]] = value
    return out
