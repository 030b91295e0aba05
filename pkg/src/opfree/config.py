"""Experiment configuration: schema ``opfree-1``.

Example::

    {
      "version": "opfree-1",
      "dim": 1,
      "models": {"1": {"kraus": [1], "kind": "circle"}},
      "profile": {"weights": [0.5, 0.5], "values": {"a": [1, -1]}},
      "words": [{"id": "Y4", "matrix": ["1", "1", "1", "1"]},
                {"id": "DYDYD", "matrix": ["1", "1"], "diag": ["a", "a", "a"]}],
      "n_list": [8, 16, 32, 64],
      "trials": 200,
      "seed": 0,
      "mode": "exact",
      "law": "conditional",
      "outputs": {"csv": "sweep.csv"}
    }

Symbols are JSON strings; ``null`` in ``diag`` is the unit.  Everything is
resolved and validated at load time so that a bad config fails before any
computation starts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .io import element_from_json, matrix_from_json
from .limits import DiagonalProfile, MixedWord
from .matmodel import KINDS, EntryModel, FiniteDiagonal

__all__ = ["SCHEMA_VERSION", "ConfigError", "WordSpec", "ExperimentConfig", "load_config", "parse_config", "default_config"]

SCHEMA_VERSION = "opfree-1"
MODES = ("exact", "mc", "both")
LAWS = ("conditional", "boolean")
_KEYS = {"version", "dim", "models", "profile", "words", "n_list", "trials", "seed", "mode", "law", "outputs"}


class ConfigError(ValueError):
    """Schema violation or unresolved reference in an experiment config."""


@dataclass(frozen=True)
class WordSpec:
    id: str
    word: MixedWord


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    models: dict
    profile: DiagonalProfile
    words: tuple
    n_list: tuple = (8, 16, 32, 64)
    trials: int = 200
    seed: int = 0
    mode: str = "exact"
    law: str = "conditional"
    outputs: dict = field(default_factory=dict)
    version: str = SCHEMA_VERSION

    @property
    def diag(self) -> FiniteDiagonal:
        return FiniteDiagonal(self.profile)

    @property
    def etas(self) -> dict:
        return {s: m.eta for s, m in self.models.items()}

    def word(self, word_id: str) -> WordSpec:
        for w in self.words:
            if w.id == word_id:
                return w
        raise ConfigError(f"unknown word id {word_id!r}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _int(obj: Any, name: str, minimum: int = 0) -> int:
    _require(isinstance(obj, int) and not isinstance(obj, bool) and obj >= minimum, f"{name} must be an integer >= {minimum}")
    return obj


def parse_word(obj: Any, dim: int, models: dict, profile: DiagonalProfile, default_id: str) -> WordSpec:
    if isinstance(obj, list):
        obj = {"matrix": obj}
    _require(isinstance(obj, dict), "a word must be an object or a list of matrix symbols")
    matrix = [str(s) for s in obj.get("matrix", [])]
    wid = str(obj.get("id", default_id))
    diag = obj.get("diag")
    diag = [None] * (len(matrix) + 1) if diag is None else [None if t is None else str(t) for t in diag]
    _require(len(diag) == len(matrix) + 1, f"word {wid}: diag needs {len(matrix) + 1} entries, got {len(diag)}")
    for s in matrix:
        _require(s in models, f"word {wid}: unknown matrix symbol {s!r}")
    for t in diag:
        _require(t is None or t in profile.values, f"word {wid}: unknown diagonal symbol {t!r}")
    consts = None
    if "constants" in obj:
        try:
            consts = [element_from_json(c, dim) for c in obj["constants"]]
            word = MixedWord(tuple(diag), tuple(matrix), tuple(consts))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"word {wid}: {exc}") from exc
    else:
        word = MixedWord(tuple(diag), tuple(matrix))
    return WordSpec(wid, word)


def parse_config(raw: Any) -> ExperimentConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    unknown = set(raw) - _KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    _require(raw.get("version") == SCHEMA_VERSION, f"version must be {SCHEMA_VERSION!r}, got {raw.get('version')!r}")
    dim = _int(raw.get("dim", 1), "dim", 1)

    models_raw = raw.get("models", {})
    _require(isinstance(models_raw, dict) and models_raw, "models must be a nonempty object")
    models = {}
    for sym, spec in models_raw.items():
        _require(isinstance(spec, dict) and "kraus" in spec, f"model {sym}: needs a kraus list")
        kind = spec.get("kind", "circle")
        _require(kind in KINDS, f"model {sym}: kind must be one of {KINDS}")
        try:
            kraus = [matrix_from_json(K, dim) for K in spec["kraus"]]
            models[str(sym)] = EntryModel(str(sym), tuple(kraus), kind)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"model {sym}: {exc}") from exc

    prof_raw = raw.get("profile", {"weights": [1.0]})
    _require(isinstance(prof_raw, dict) and "weights" in prof_raw, "profile needs weights")
    try:
        values = {str(t): [matrix_from_json(v, dim) for v in seq] for t, seq in prof_raw.get("values", {}).items()}
        profile = DiagonalProfile(prof_raw["weights"], values, dim=dim)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"profile: {exc}") from exc
    overlap = set(models) & set(profile.values)
    _require(not overlap, f"symbols used as both matrix and diagonal: {sorted(overlap)}")

    words_raw = raw.get("words", [])
    _require(isinstance(words_raw, list), "words must be a list")
    words = tuple(parse_word(w, dim, models, profile, f"w{i}") for i, w in enumerate(words_raw))
    ids = [w.id for w in words]
    _require(len(set(ids)) == len(ids), "word ids must be unique")

    n_list = raw.get("n_list", [8, 16, 32, 64])
    _require(isinstance(n_list, list) and n_list, "n_list must be a nonempty list")
    n_list = tuple(_int(n, "n_list entries", profile.steps) for n in n_list)
    _require(list(n_list) == sorted(n_list), "n_list must be ascending")
    mode = raw.get("mode", "exact")
    _require(mode in MODES, f"mode must be one of {MODES}")
    law = raw.get("law", "conditional")
    _require(law in LAWS, f"law must be one of {LAWS}")
    outputs = raw.get("outputs", {})
    _require(isinstance(outputs, dict), "outputs must be an object")
    return ExperimentConfig(
        dim=dim,
        models=models,
        profile=profile,
        words=words,
        n_list=n_list,
        trials=_int(raw.get("trials", 200), "trials", 2),
        seed=_int(raw.get("seed", 0), "seed"),
        mode=mode,
        law=law,
        outputs=dict(outputs),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a config file; ``OSError`` propagates for I/O problems."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(raw)


def default_config(symbols=("1", "2")) -> ExperimentConfig:
    """Scalar setting: ``B = C``, ``eta = id`` for each symbol, trivial profile."""
    models = {s: EntryModel(s, (np.eye(1),)) for s in symbols}
    return ExperimentConfig(dim=1, models=models, profile=DiagonalProfile.trivial(1), words=())
