"""Run configuration: defaults, file loading, flag overrides, hashing.

The config is one JSON document. Defaults carry the published training
setup (Adam, lr 0.001, embedding dim 100, dropout 0.5, batch 512, epochs
300) plus estimator parameters (mutation degree 0.05, MC dropout 0.5).
Artifacts land in `work_dir/<first 12 hex of the config hash>/`, so
rerunning with an identical effective config overwrites byte-identically
while changed configs get their own bucket.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

DEFAULT_CONFIG: dict = {
    "paths": {
        "corpus_dir": "corpus",
        "work_dir": "work",
        "manifests": {},  # optional per-shift overrides of corpus_dir/manifest_<shift>.json
    },
    "corpus": {
        "val_fraction": 0.1,
        "min_count": 1,
    },
    "extraction": {
        "max_contexts": 200,
        "max_path_len": 9,
        "window": 4,
    },
    "train": {
        "optimizer": "adam",
        "learning_rate": 0.001,
        "embedding_dim": 100,
        "dropout": 0.5,
        "batch_size": 512,
        "epochs": 300,
    },
    "uncertainty": {
        "mc_passes": 30,
        "mc_dropout_p": 0.5,
        "mutant_count": 50,
        "mutation_degree": 0.05,
        "probe_epochs": 20,
        "probe_learning_rate": 0.001,
    },
    "synth": {
        "timeline_files": 40,
        "project_files": 45,
        "author_files": {"alice": 30, "adam": 10, "mira": 10, "bogdan": 12},
    },
    "seed": 0,
}


class ConfigError(ValueError):
    pass


def _deep_merge(base: dict, override: dict, path: str = "") -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in merged:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(merged[key], dict) and key != "manifests" and key != "author_files":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            merged[key] = _deep_merge(merged[key], value, where)
        else:
            merged[key] = value
    return merged


def _validate(config: dict) -> None:
    def positive(path: str, value, kind=(int, float)):
        if not isinstance(value, kind) or isinstance(value, bool) or value <= 0:
            raise ConfigError(f"config {path!r} must be positive, got {value!r}")

    if config["train"]["optimizer"] != "adam":
        raise ConfigError(f"only the adam optimizer is supported, got {config['train']['optimizer']!r}")
    positive("train.learning_rate", config["train"]["learning_rate"])
    positive("train.embedding_dim", config["train"]["embedding_dim"], int)
    positive("train.batch_size", config["train"]["batch_size"], int)
    positive("train.epochs", config["train"]["epochs"], int)
    if not 0.0 <= config["train"]["dropout"] < 1.0:
        raise ConfigError(f"train.dropout must lie in [0, 1), got {config['train']['dropout']!r}")
    if not 0.0 < config["corpus"]["val_fraction"] < 1.0:
        raise ConfigError(f"corpus.val_fraction must lie in (0, 1), got {config['corpus']['val_fraction']!r}")
    positive("corpus.min_count", config["corpus"]["min_count"], int)
    positive("extraction.max_contexts", config["extraction"]["max_contexts"], int)
    positive("extraction.max_path_len", config["extraction"]["max_path_len"], int)
    positive("extraction.window", config["extraction"]["window"], int)
    positive("uncertainty.mc_passes", config["uncertainty"]["mc_passes"], int)
    positive("uncertainty.mutant_count", config["uncertainty"]["mutant_count"], int)
    if not 0.0 <= config["uncertainty"]["mutation_degree"] <= 1.0:
        raise ConfigError("uncertainty.mutation_degree must lie in [0, 1]")
    if not 0.0 <= config["uncertainty"]["mc_dropout_p"] < 1.0:
        raise ConfigError("uncertainty.mc_dropout_p must lie in [0, 1)")
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        raise ConfigError(f"seed must be an unsigned integer, got {config['seed']!r}")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults <- config file <- explicit overrides; validated."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        config = _deep_merge(config, doc)
        base_dir = path.parent.resolve()
    if overrides:
        config = _deep_merge(config, overrides)
    _validate(config)
    config["paths"]["_base_dir"] = str(base_dir)
    return config


def config_hash(config: dict) -> str:
    """sha256 of the canonical effective config (machine-local paths excluded)."""
    hashable = copy.deepcopy(config)
    hashable.get("paths", {}).pop("_base_dir", None)
    canonical = json.dumps(hashable, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def echo_config(config: dict) -> dict:
    """The config as embedded into artifacts: effective values plus hash."""
    echoed = copy.deepcopy(config)
    echoed.get("paths", {}).pop("_base_dir", None)
    echoed["config_hash"] = config_hash(config)
    return echoed


def resolve_path(config: dict, key: str) -> Path:
    base = Path(config["paths"].get("_base_dir", "."))
    return (base / config["paths"][key]).resolve()


def corpus_dir(config: dict) -> Path:
    return resolve_path(config, "corpus_dir")


def bucket_dir(config: dict) -> Path:
    return resolve_path(config, "work_dir") / config_hash(config)[:12]


def manifest_path(config: dict, shift: str) -> Path:
    override = config["paths"]["manifests"].get(shift)
    if override:
        return (Path(config["paths"].get("_base_dir", ".")) / override).resolve()
    return corpus_dir(config) / f"manifest_{shift}.json"
