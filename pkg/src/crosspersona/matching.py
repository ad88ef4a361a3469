"""Linked-identity selection, activity verification and seeded sampling."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .domain import PostCorpus, normalize_platform
from .errors import ConfigError, DataError

_URL_PREFIX = re.compile(
    r"^(?:https?://)?(?:www\.)?"
    r"(?:x\.com|twitter\.com|linkedin\.com/(?:in|company)|github\.com|[a-z0-9.-]+\.[a-z]{2,})/",
    re.IGNORECASE,
)


def normalize_handle(handle: str) -> str:
    """Case-fold a handle and strip profile-URL prefixes, ``@`` and slashes."""
    # iterate to a fixpoint so normalization is idempotent (e.g. "x.com/@x.com/a")
    prev = None
    h = handle
    while h != prev:
        prev = h
        h = _URL_PREFIX.sub("", h.strip())
        h = h.split("?", 1)[0].strip("/").lstrip("@").casefold()
    return h


@dataclass(frozen=True)
class LinkedIdentity:
    """One person's self-reported handles.

    ``verified`` holds activity verdicts for a subset of ``links``.
    ``manual_verified`` carries manual-review overrides from the identity file;
    an override of ``False`` vetoes a platform, ``True`` cannot stand in for
    missing content.
    """

    user_key: str
    links: Mapping[str, str]
    verified: Mapping[str, bool] = field(default_factory=dict)
    manual_verified: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.user_key:
            raise DataError("identity user_key must be nonempty")
        links = {normalize_platform(p): normalize_handle(h) for p, h in self.links.items()}
        if not links:
            raise DataError(f"identity {self.user_key} has no links")
        object.__setattr__(self, "links", dict(sorted(links.items())))
        verified = {normalize_platform(p): bool(v) for p, v in self.verified.items()}
        manual = {normalize_platform(p): bool(v) for p, v in self.manual_verified.items()}
        for name, m in (("verified", verified), ("manual_verified", manual)):
            extra = set(m) - set(links)
            if extra:
                raise DataError(f"identity {self.user_key}: {name} names unlinked platforms {sorted(extra)}")
        object.__setattr__(self, "verified", dict(sorted(verified.items())))
        object.__setattr__(self, "manual_verified", dict(sorted(manual.items())))

    @property
    def platforms(self) -> frozenset[str]:
        return frozenset(self.links)

    def verified_platforms(self) -> list[str]:
        return [p for p, ok in self.verified.items() if ok]


@dataclass(frozen=True)
class MatchConfig:
    target_platforms: frozenset[str]
    require_all: bool = False
    sample_size: int | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        plats = frozenset(normalize_platform(p) for p in self.target_platforms)
        if not plats:
            raise ConfigError("target_platforms must be nonempty")
        object.__setattr__(self, "target_platforms", plats)
        if self.sample_size is not None and self.sample_size < 1:
            raise ConfigError("sample_size must be a positive integer")


def _matches(identity: LinkedIdentity, cfg: MatchConfig) -> bool:
    if cfg.require_all:
        return cfg.target_platforms <= identity.platforms
    return bool(cfg.target_platforms & identity.platforms)


def select_linked_users(
    universe: Iterable[LinkedIdentity], cfg: MatchConfig
) -> list[LinkedIdentity]:
    """Keep identities linked to the target platforms, then sample.

    Without sampling the input order is preserved. With sampling, a seeded
    uniform draw without replacement picks ``sample_size`` candidates, which
    are returned in their original relative order.
    """
    candidates = [u for u in universe if _matches(u, cfg)]
    if cfg.sample_size is None:
        return candidates
    if cfg.sample_size > len(candidates):
        raise DataError(
            f"sample_size {cfg.sample_size} exceeds the {len(candidates)} matching users"
        )
    rng = np.random.default_rng(cfg.rng_seed & 0xFFFFFFFFFFFFFFFF)
    picked = np.sort(rng.choice(len(candidates), size=cfg.sample_size, replace=False))
    return [candidates[i] for i in picked]


def verify_activity(
    user: LinkedIdentity, corpora: Mapping[tuple[str, str], PostCorpus]
) -> LinkedIdentity:
    """Mark each linked platform active iff its corpus has a nonempty-text post."""
    verdicts = {}
    for platform in user.links:
        corpus = corpora.get((user.user_key, platform))
        active = corpus is not None and any(p.text.strip() for p in corpus.posts)
        if user.manual_verified.get(platform) is False:
            active = False
        verdicts[platform] = active
    return replace(user, verified=verdicts)
