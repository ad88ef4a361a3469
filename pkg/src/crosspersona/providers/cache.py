"""Content-addressed record/replay store for provider responses."""

from __future__ import annotations

import json
import os
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from ..domain import CategoryPath
from ..errors import ConfigError, DataError, ReplayMissError
from .base import ContentClassifier, OffensivenessScorer, PersonalityProvider, ProviderRequest

MODES = ("record", "replay", "passthrough")


class ReplayCache:
    """Directory of JSON records, one file per request hash.

    * ``record``: serve existing records, otherwise compute and write one.
    * ``replay``: serve existing records; a miss raises ReplayMissError.
    * ``passthrough``: always compute, never read or write.
    """

    def __init__(self, directory: str | Path, mode: str = "replay"):
        if mode not in MODES:
            raise ConfigError(f"cache mode must be one of {MODES}, got {mode!r}")
        self.directory = Path(directory)
        self.mode = mode
        if mode == "replay" and not self.directory.is_dir():
            raise ConfigError(f"replay cache directory {self.directory} does not exist")
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def path_for(self, request_hash: str) -> Path:
        return self.directory / request_hash[:2] / f"{request_hash}.json"

    def get(self, request_hash: str) -> dict | None:
        p = self.path_for(request_hash)
        if not p.exists():
            return None
        try:
            record = json.loads(p.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise DataError(f"corrupt cache record {p}") from exc
        if record.get("hash") != request_hash:
            raise DataError(f"cache record {p} carries hash {record.get('hash')}")
        return record

    def put(self, request: ProviderRequest, response: Any) -> dict:
        record = {
            "hash": request.request_hash,
            "kind": request.kind,
            "request_meta": request.meta(),
            "response": response,
            "recorded_at": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        }
        target = self.path_for(request.request_hash)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(record, fh, sort_keys=True, ensure_ascii=False)
                fh.write("\n")
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return record

    def fetch(self, request: ProviderRequest, compute: Callable[[], Any] | None) -> Any:
        """Return the canonical response for ``request`` under this cache's mode."""
        if self.mode == "passthrough":
            if compute is None:
                raise ConfigError("passthrough cache needs an upstream provider")
            return compute()
        record = self.get(request.request_hash)
        if record is not None:
            with self._lock:
                self.hits += 1
            return record["response"]
        with self._lock:
            self.misses += 1
        if self.mode == "replay" or compute is None:
            raise ReplayMissError(request.request_hash)
        response = compute()
        self.put(request, response)
        return response


class CachedPersonalityProvider:
    def __init__(self, cache: ReplayCache, inner: PersonalityProvider | None = None):
        self.cache = cache
        self.inner = inner
        self.max_in_flight = inner.max_in_flight if inner is not None else 64

    def personality_score(self, text: str, trait_index: int, run_index: int) -> float:
        req = ProviderRequest("personality", text, trait_index, run_index)
        compute = None
        if self.inner is not None:
            compute = lambda: float(self.inner.personality_score(text, trait_index, run_index))  # noqa: E731
        return float(self.cache.fetch(req, compute))


class CachedContentClassifier:
    def __init__(self, cache: ReplayCache, inner: ContentClassifier | None = None):
        self.cache = cache
        self.inner = inner
        self.max_in_flight = inner.max_in_flight if inner is not None else 64

    def classify_content(self, text: str) -> list[CategoryPath]:
        req = ProviderRequest("classify", text)
        compute = None
        if self.inner is not None:
            compute = lambda: [  # noqa: E731
                {"path": str(c), "confidence": c.confidence} for c in self.inner.classify_content(text)
            ]
        raw = self.cache.fetch(req, compute)
        return [CategoryPath.parse(item["path"], item["confidence"]) for item in raw]


class CachedOffenseScorer:
    def __init__(self, cache: ReplayCache, inner: OffensivenessScorer | None = None,
                 max_chars: int | None = None):
        self.cache = cache
        self.inner = inner
        self.max_in_flight = inner.max_in_flight if inner is not None else 64
        if max_chars is None:
            max_chars = inner.max_chars if inner is not None else 20000
        self.max_chars = max_chars

    def score_offense(self, text: str) -> dict[str, float]:
        req = ProviderRequest("offense", text)
        compute = None
        if self.inner is not None:
            compute = lambda: dict(self.inner.score_offense(text))  # noqa: E731
        return dict(self.cache.fetch(req, compute))
