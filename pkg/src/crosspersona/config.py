"""Pipeline configuration: one JSON document plus ``--set key=value`` overrides."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .interests import DEFAULT_PROFESSIONAL_ROOTS, InterestTaxonomy
from .matching import MatchConfig
from .offense import OffenseConfig
from .personality import InferenceConfig
from .providers import BACKENDS, MODES

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "platforms": ["linkedin", "x"],
    "paths": {
        "identities": "identities.jsonl",
        "corpora": "corpora.jsonl",
        "labeled": None,
        "out_dir": "out",
        "cache_dir": None,
        "taxonomy": None,
    },
    "match": {"require_all": False, "sample_size": None},
    "inference": {"runs": 10, "stddev_threshold": 0.6, "min_posts": 2, "max_posts": 200},
    "interests": {
        "professional_roots": list(DEFAULT_PROFESSIONAL_ROOTS),
        "confidence_floor": 0.0,
        "top_n": 5,
    },
    "offense": {"threshold": 0.8, "max_chars": None},
    "integrate": {"from": "linkedin", "to": "x", "magnitudes": [1.0, 2.0, 3.0]},
    "clustering": {"k_min": 2, "k_max": 20, "repeats": 10},
    "stats": {"platform_pair": None},
    "providers": {
        "mode": "mock",
        "backend": "mock",
        "lexicons": {},
        "endpoints": {},
    },
}


def derive_seed(seed: int, stage: str) -> int:
    """Sub-seed for a pipeline stage: first 8 bytes of sha256("seed:stage")."""
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in base:
            raise ConfigError(f"unknown config key {where}{k!r}")
        if isinstance(base[k], dict) and k not in ("lexicons", "endpoints"):
            if not isinstance(v, dict):
                raise ConfigError(f"config key {where}{k} must be an object")
            out[k] = _merge(base[k], v, f"{where}{k}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except ValueError:
        return raw


def apply_override(doc: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    cur = doc
    for p in parts[:-1]:
        if not isinstance(cur.get(p), dict):
            raise ConfigError(f"unknown config key {key!r}")
        cur = cur[p]
    if parts[-1] not in cur and not (len(parts) >= 2 and parts[-2] in ("lexicons", "endpoints")):
        raise ConfigError(f"unknown config key {key!r}")
    cur[parts[-1]] = _parse_value(raw)


@dataclass
class PipelineConfig:
    doc: dict
    base_dir: Path

    @classmethod
    def load(cls, path: str | Path | None, overrides: list[str] = (), seed: int | None = None,
             mode: str | None = None, workers: int | None = None) -> "PipelineConfig":
        user: dict = {}
        base_dir = Path.cwd()
        if path is not None:
            p = Path(path)
            try:
                user = json.loads(p.read_text(encoding="utf-8"))
            except FileNotFoundError as exc:
                raise ConfigError(f"config file {p} not found") from exc
            except ValueError as exc:
                raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
            if not isinstance(user, dict):
                raise ConfigError("config must be a JSON object")
            base_dir = p.resolve().parent
        doc = _merge(DEFAULTS, user)
        for assignment in overrides:
            apply_override(doc, assignment)
        if seed is not None:
            doc["seed"] = seed
        if mode is not None:
            doc["providers"]["mode"] = mode
        if workers is not None:
            doc["workers"] = workers
        cfg = cls(doc, base_dir)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d = self.doc
        try:
            self.match_config()
            self.inference_config()
            self.taxonomy()
            self.offense_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from exc
        if not isinstance(d["seed"], int):
            raise ConfigError("seed must be an integer")
        if not isinstance(d["workers"], int) or d["workers"] < 1:
            raise ConfigError("workers must be a positive integer")
        prov = d["providers"]
        if prov["mode"] not in MODES:
            raise ConfigError(f"providers.mode must be one of {MODES}")
        if prov["backend"] not in BACKENDS:
            raise ConfigError(f"providers.backend must be one of {BACKENDS}")
        if prov["mode"] in ("replay", "record") and not d["paths"]["cache_dir"]:
            raise ConfigError(f"mode {prov['mode']} requires paths.cache_dir")
        if prov["mode"] == "replay" and not self.path("cache_dir").is_dir():
            raise ConfigError(f"replay cache directory {self.path('cache_dir')} does not exist")
        cl = d["clustering"]
        if not (2 <= cl["k_min"] <= cl["k_max"]) or cl["repeats"] < 1:
            raise ConfigError("clustering needs 2 <= k_min <= k_max and repeats >= 1")
        if d["integrate"]["from"] == d["integrate"]["to"]:
            raise ConfigError("integrate.from and integrate.to must differ")

    # -- accessors -----------------------------------------------------------
    @property
    def seed(self) -> int:
        return self.doc["seed"]

    @property
    def platforms(self) -> list[str]:
        return [p.lower() for p in self.doc["platforms"]]

    def path(self, name: str) -> Path | None:
        raw = self.doc["paths"].get(name)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        return self.path("out_dir")

    def match_config(self) -> MatchConfig:
        m = self.doc["match"]
        return MatchConfig(
            target_platforms=frozenset(self.platforms),
            require_all=bool(m["require_all"]),
            sample_size=m["sample_size"],
            rng_seed=derive_seed(self.seed, "match"),
        )

    def inference_config(self) -> InferenceConfig:
        i = self.doc["inference"]
        return InferenceConfig(
            runs=int(i["runs"]),
            stddev_threshold=float(i["stddev_threshold"]),
            min_posts=int(i["min_posts"]),
            max_posts=int(i["max_posts"]),
            rng_seed=derive_seed(self.seed, "providers"),
        )

    def taxonomy(self) -> InterestTaxonomy:
        i = self.doc["interests"]
        return InterestTaxonomy(frozenset(i["professional_roots"]), float(i["confidence_floor"]))

    def offense_config(self) -> OffenseConfig:
        return OffenseConfig(float(self.doc["offense"]["threshold"]))

    def snapshot(self) -> dict:
        """Config as recorded in run manifests (output location omitted)."""
        doc = copy.deepcopy(self.doc)
        doc["paths"].pop("out_dir", None)
        return doc
