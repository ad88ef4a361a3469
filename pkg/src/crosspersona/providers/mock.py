"""Deterministic offline providers driven by keyword lexicons.

Every mock is a pure function of the request and its seed: uniform draws come
from SHA-256 of ``request_hash:seed:salt``, never from global RNG state.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..domain import OFFENSE_ATTRIBUTES, TRAITS, CategoryPath
from .base import ProviderRequest

_TOKEN = re.compile(r"[a-z0-9+#']+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def hash_uniform(request_hash: str, seed: int, salt: str = "") -> float:
    """Map (request_hash, seed, salt) to a uniform value in [0, 1)."""
    digest = hashlib.sha256(f"{request_hash}:{seed}:{salt}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


def load_lexicon(name_or_path: str | Path) -> dict:
    """Load a bundled lexicon by file name, or any JSON file by path."""
    p = Path(name_or_path)
    if p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    return json.loads(resources.files("crosspersona.data").joinpath(str(name_or_path)).read_text("utf-8"))


class MockPersonalityProvider:
    """Cue-word personality scorer.

    For each trait the lexicon lists ``high`` and ``low`` cue words. The base
    score is ``1 + 4 * (h + 0.5) / (h + l + 1)``; each run adds uniform jitter
    whose half-width shrinks with the amount of cue evidence, so texts with few
    cues produce unstable runs.
    """

    max_in_flight = 64

    def __init__(self, seed: int = 0, lexicon: dict | str | Path = "personality_lexicon.json",
                 max_jitter: float = 2.0):
        lex = lexicon if isinstance(lexicon, dict) else load_lexicon(lexicon)
        self.seed = seed
        self.max_jitter = max_jitter
        self._cues = {
            i + 1: (frozenset(lex[t]["high"]), frozenset(lex[t]["low"])) for i, t in enumerate(TRAITS)
        }
        self._counts = lru_cache(maxsize=4096)(self._count_cues)

    def _count_cues(self, text: str) -> tuple[tuple[int, int], ...]:
        counts = Counter(tokenize(text))
        out = []
        for i in range(1, 6):
            high, low = self._cues[i]
            out.append((sum(counts[w] for w in high), sum(counts[w] for w in low)))
        return tuple(out)

    def personality_score(self, text: str, trait_index: int, run_index: int) -> float:
        req = ProviderRequest("personality", text, trait_index, run_index)
        h, l = self._counts(text)[trait_index - 1]
        base = 1.0 + 4.0 * (h + 0.5) / (h + l + 1.0)
        half_width = min(self.max_jitter, self.max_jitter / math.sqrt(1.0 + h + l))
        u = hash_uniform(req.request_hash, self.seed, "jitter")
        return min(5.0, max(1.0, base + (2.0 * u - 1.0) * half_width))


class MockContentClassifier:
    """Keyword lexicon classifier: confidence is the path's share of keyword hits."""

    max_in_flight = 64

    def __init__(self, lexicon: dict | str | Path = "classifier_lexicon.json"):
        lex = lexicon if isinstance(lexicon, dict) else load_lexicon(lexicon)
        self.keywords: dict[str, str] = {k.lower(): v for k, v in lex["keywords"].items()}

    def classify_content(self, text: str) -> list[CategoryPath]:
        hits = Counter(self.keywords[t] for t in tokenize(text) if t in self.keywords)
        total = sum(hits.values())
        return [CategoryPath.parse(path, n / total) for path, n in sorted(hits.items())]


class MockOffenseScorer:
    """Hash-derived offensiveness scores; trigger words force high scores.

    Benign text scores every attribute in [0, 0.45). A trigger word lifts
    toxicity and insult into [0.8, 1.0).
    """

    max_in_flight = 64

    def __init__(self, seed: int = 0, lexicon: dict | str | Path = "offense_lexicon.json",
                 max_chars: int = 3000):
        lex = lexicon if isinstance(lexicon, dict) else load_lexicon(lexicon)
        self.seed = seed
        self.triggers = frozenset(w.lower() for w in lex["triggers"])
        self.max_chars = max_chars

    def score_offense(self, text: str) -> dict[str, float]:
        h = ProviderRequest("offense", text).request_hash
        triggered = any(t in self.triggers for t in tokenize(text))
        scores = {}
        for a in OFFENSE_ATTRIBUTES:
            u = hash_uniform(h, self.seed, a)
            if triggered and a in ("toxicity", "insult"):
                scores[a] = 0.8 + 0.2 * u
            else:
                scores[a] = 0.45 * u
        return scores
