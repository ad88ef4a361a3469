"""Professional vs. personal interest extraction over hierarchical content categories."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .domain import CategoryPath, PlatformProfile, PostCorpus, canonical_categories
from .errors import ConfigError, DataError
from .providers.base import ContentClassifier

DEFAULT_PROFESSIONAL_ROOTS = ("Computers & Electronics", "Internet & Telecom")


@dataclass(frozen=True)
class InterestTaxonomy:
    professional_roots: frozenset[str] = frozenset(DEFAULT_PROFESSIONAL_ROOTS)
    confidence_floor: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "professional_roots", frozenset(self.professional_roots))
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ConfigError("confidence_floor must be in [0, 1]")


def load_category_tree(path: str | Path | None = None) -> dict[str, list[str]]:
    """Load the ``{root: [path, ...]}`` category tree (bundled one by default)."""
    if path is None:
        text = resources.files("crosspersona.data").joinpath("taxonomy.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)["categories"]


def classify_interests(
    corpus: PostCorpus, classifier: ContentClassifier, confidence_floor: float = 0.0,
    max_posts: int | None = None,
) -> tuple[CategoryPath, ...]:
    """Classify each nonempty post; merge by path keeping the max confidence."""
    texts = corpus.texts if max_posts is None else corpus.texts[:max_posts]
    found: list[CategoryPath] = []
    for text in texts:
        found.extend(classifier.classify_content(text))
    return tuple(c for c in canonical_categories(found) if c.confidence >= confidence_floor)


def split_interests(
    categories: Iterable[CategoryPath], tax: InterestTaxonomy
) -> tuple[tuple[CategoryPath, ...], tuple[CategoryPath, ...]]:
    prof, pers = [], []
    for c in canonical_categories(categories):
        (prof if c.root in tax.professional_roots else pers).append(c)
    return tuple(prof), tuple(pers)


def interest_frequencies(
    profiles: Sequence[PlatformProfile], level: str = "leaf", kind: str = "professional",
    top_n: int | None = None,
) -> list[tuple[str, int, float]]:
    """Relative frequency of categories, counted once per profile.

    Returns ``(category, count, rfreq)`` sorted by frequency descending, then
    name. ``level="top"`` uses the root segment, ``"leaf"`` the last segment.
    """
    if not profiles:
        raise DataError("interest_frequencies needs at least one profile")
    if level not in ("top", "leaf"):
        raise ConfigError(f"level must be 'top' or 'leaf', got {level!r}")
    if kind not in ("professional", "personal"):
        raise ConfigError(f"kind must be 'professional' or 'personal', got {kind!r}")
    counts: Counter[str] = Counter()
    for prof in profiles:
        cats = prof.professional_interests if kind == "professional" else prof.personal_interests
        counts.update({c.root if level == "top" else c.leaf for c in cats})
    total = sum(counts.values())
    if total == 0:
        return []
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if top_n is not None:
        ranked = ranked[:top_n]
    return [(name, n, n / total) for name, n in ranked]
