"""Scoring providers: personality LLM, content classifier, offensiveness scorer.

Every provider has a remote HTTP implementation, a deterministic mock, and a
record/replay cache wrapper.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import httpx

from ..errors import ConfigError
from .base import (
    ContentClassifier,
    OffensivenessScorer,
    PersonalityProvider,
    ProviderRequest,
    TokenBucket,
    request_hash,
    with_retries,
)
from .cache import CachedContentClassifier, CachedOffenseScorer, CachedPersonalityProvider, ReplayCache
from .mock import MockContentClassifier, MockOffenseScorer, MockPersonalityProvider
from .remote import (
    Endpoint,
    RemoteContentClassifier,
    RemoteOffenseScorer,
    RemotePersonalityProvider,
    parse_first_number,
)

MODES = ("mock", "replay", "record", "live")
BACKENDS = ("mock", "remote")

__all__ = [
    "BACKENDS",
    "MODES",
    "CachedContentClassifier",
    "CachedOffenseScorer",
    "CachedPersonalityProvider",
    "ContentClassifier",
    "Endpoint",
    "MockContentClassifier",
    "MockOffenseScorer",
    "MockPersonalityProvider",
    "OffensivenessScorer",
    "PersonalityProvider",
    "ProviderRequest",
    "ProviderSet",
    "RemoteContentClassifier",
    "RemoteOffenseScorer",
    "RemotePersonalityProvider",
    "ReplayCache",
    "TokenBucket",
    "make_providers",
    "parse_first_number",
    "request_hash",
    "with_retries",
]


@dataclass
class ProviderSet:
    personality: PersonalityProvider
    classifier: ContentClassifier
    scorer: OffensivenessScorer
    cache: ReplayCache | None = None


def make_providers(
    mode: str,
    seed: int,
    backend: str = "mock",
    cache_dir: str | Path | None = None,
    endpoints: dict | None = None,
    lexicons: dict | None = None,
    client: httpx.Client | None = None,
    max_chars: int | None = None,
) -> ProviderSet:
    """Build the three providers for a run mode.

    ``mock`` uses mocks directly. ``live`` calls the backend without caching.
    ``record`` calls the backend through the cache, writing new records.
    ``replay`` serves only from the cache and never constructs an HTTP client.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if backend not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}, got {backend!r}")
    lexicons = lexicons or {}

    def mocks():
        scorer = MockOffenseScorer(seed, lexicons.get("offense", "offense_lexicon.json"))
        if max_chars is not None:
            scorer.max_chars = max_chars
        return (
            MockPersonalityProvider(seed, lexicons.get("personality", "personality_lexicon.json")),
            MockContentClassifier(lexicons.get("classifier", "classifier_lexicon.json")),
            scorer,
        )

    def remotes():
        eps = endpoints or {}
        missing = [k for k in ("personality", "classifier", "offense") if k not in eps]
        if missing:
            raise ConfigError(f"remote backend needs endpoints for {missing}")
        scorer_kw = {"max_chars": max_chars} if max_chars is not None else {}
        return (
            RemotePersonalityProvider(Endpoint.from_dict(dict(eps["personality"])), client),
            RemoteContentClassifier(Endpoint.from_dict(dict(eps["classifier"])), client),
            RemoteOffenseScorer(Endpoint.from_dict(dict(eps["offense"])), client, **scorer_kw),
        )

    if mode == "mock":
        return ProviderSet(*mocks())
    if mode == "replay":
        if cache_dir is None:
            raise ConfigError("replay mode needs a cache directory")
        cache = ReplayCache(cache_dir, "replay")
        return ProviderSet(
            CachedPersonalityProvider(cache),
            CachedContentClassifier(cache),
            CachedOffenseScorer(cache, max_chars=max_chars),
            cache,
        )
    inner = mocks() if backend == "mock" else remotes()
    if mode == "live":
        return ProviderSet(*inner)
    if cache_dir is None:
        raise ConfigError("record mode needs a cache directory")
    cache = ReplayCache(cache_dir, "record")
    return ProviderSet(
        CachedPersonalityProvider(cache, inner[0]),
        CachedContentClassifier(cache, inner[1]),
        CachedOffenseScorer(cache, inner[2]),
        cache,
    )
