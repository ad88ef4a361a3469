"""Offensiveness scoring and the any-post/any-attribute threshold rule."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .domain import OFFENSE_ATTRIBUTES, OffenseScores, PostCorpus
from .errors import ConfigError, DataError, ProviderError, ReplayMissError
from .providers.base import OffensivenessScorer, check_offense_map

log = logging.getLogger(__name__)

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class OffenseConfig:
    threshold: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("offense threshold must be in [0, 1]")


def chunk_text(text: str, max_chars: int) -> list[str]:
    """Split on sentence boundaries so every chunk fits ``max_chars``.

    Sentences longer than the limit are hard-split.
    """
    if len(text) <= max_chars:
        return [text]
    chunks: list[str] = []
    cur = ""
    for sentence in _SENTENCE_END.split(text):
        while len(sentence) > max_chars:
            if cur:
                chunks.append(cur)
                cur = ""
            chunks.append(sentence[:max_chars])
            sentence = sentence[max_chars:]
        candidate = f"{cur} {sentence}" if cur else sentence
        if len(candidate) <= max_chars:
            cur = candidate
        else:
            chunks.append(cur)
            cur = sentence
    if cur:
        chunks.append(cur)
    return chunks


def score_post(text: str, scorer: OffensivenessScorer) -> dict[str, float]:
    """Score one post, taking per-attribute maxima over its chunks."""
    best = dict.fromkeys(OFFENSE_ATTRIBUTES, 0.0)
    for chunk in chunk_text(text, scorer.max_chars):
        scores = check_offense_map(scorer.score_offense(chunk), OFFENSE_ATTRIBUTES)
        for a in OFFENSE_ATTRIBUTES:
            best[a] = max(best[a], scores[a])
    return best


def score_offensiveness_detailed(
    corpus: PostCorpus, scorer: OffensivenessScorer
) -> tuple[OffenseScores, list[tuple[int, dict[str, float]]]]:
    """Per-attribute maxima plus the per-post scores (post index into the corpus)."""
    per_post: list[tuple[int, dict[str, float]]] = []
    failed = 0
    attempted = 0
    for i, post in enumerate(corpus.posts):
        if not post.text.strip():
            continue
        attempted += 1
        try:
            per_post.append((i, score_post(post.text, scorer)))
        except ReplayMissError:
            raise
        except ProviderError as exc:
            log.warning("post %d of %s/%s not scored: %s", i, corpus.user, corpus.platform, exc)
            failed += 1
    if attempted == 0:
        raise DataError(f"corpus {corpus.user}/{corpus.platform} has no text to score")
    if not per_post:
        raise ProviderError(f"all {failed} posts of {corpus.user}/{corpus.platform} failed to score")
    maxima = {a: max(s[a] for _, s in per_post) for a in OFFENSE_ATTRIBUTES}
    return OffenseScores(maxima, len(per_post), failed), per_post


def score_offensiveness(corpus: PostCorpus, scorer: OffensivenessScorer) -> OffenseScores:
    return score_offensiveness_detailed(corpus, scorer)[0]


def classify_offensive(scores: OffenseScores, cfg: OffenseConfig = OffenseConfig()) -> bool:
    """Offensive iff some attribute maximum reaches the threshold (inclusive)."""
    return any(scores[a] >= cfg.threshold for a in OFFENSE_ATTRIBUTES)
