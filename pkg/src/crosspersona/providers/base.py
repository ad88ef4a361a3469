"""Provider protocols and the plumbing shared by every implementation."""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence, TypeVar, runtime_checkable

from ..domain import TRAITS, CategoryPath
from ..errors import ProviderError

log = logging.getLogger(__name__)

KINDS = ("personality", "classify", "offense")

T = TypeVar("T")


@dataclass(frozen=True)
class ProviderRequest:
    kind: str
    text: str
    trait_index: int = 0
    run_index: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.kind == "personality" and not 1 <= self.trait_index <= 5:
            raise ValueError(f"trait_index must be in 1..5, got {self.trait_index}")

    @property
    def request_hash(self) -> str:
        return request_hash(self.kind, self.trait_index, self.run_index, self.text)

    def meta(self) -> dict:
        """Request description safe to persist (no payload text)."""
        return {
            "kind": self.kind,
            "trait_index": self.trait_index,
            "run_index": self.run_index,
            "text_length": len(self.text),
        }


def request_hash(kind: str, trait_index: int, run_index: int, text: str) -> str:
    payload = "\x1f".join((kind, str(trait_index), str(run_index), text))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@runtime_checkable
class PersonalityProvider(Protocol):
    max_in_flight: int

    def personality_score(self, text: str, trait_index: int, run_index: int) -> float: ...


@runtime_checkable
class ContentClassifier(Protocol):
    max_in_flight: int

    def classify_content(self, text: str) -> list[CategoryPath]: ...


@runtime_checkable
class OffensivenessScorer(Protocol):
    max_in_flight: int
    max_chars: int

    def score_offense(self, text: str) -> dict[str, float]: ...


def with_retries(
    fn: Callable[[], T],
    retries: int = 3,
    backoff: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
    what: str = "provider call",
) -> T:
    """Call ``fn``; on ProviderError retry up to ``retries`` times with exponential backoff."""
    attempt = 0
    while True:
        try:
            return fn()
        except ProviderError as exc:
            if attempt >= retries:
                raise ProviderError(f"{what} failed after {attempt + 1} attempts: {exc}") from exc
            delay = backoff * (2**attempt)
            log.warning("%s failed (%s); retry %d/%d in %.2fs", what, exc, attempt + 1, retries, delay)
            sleep(delay)
            attempt += 1


class TokenBucket:
    """Blocking token-bucket rate limiter (``rate`` tokens per second)."""

    def __init__(
        self,
        rate: float,
        capacity: float | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)
        self.capacity = float(capacity if capacity is not None else max(1.0, rate))
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


def trait_name(trait_index: int) -> str:
    return TRAITS[trait_index - 1]


def check_offense_map(scores: Mapping[str, float], attributes: Sequence[str]) -> dict[str, float]:
    missing = [a for a in attributes if a not in scores]
    if missing:
        raise ProviderError(f"offense response lacks attributes {missing}")
    out = {}
    for a in attributes:
        v = float(scores[a])
        if not 0.0 <= v <= 1.0:
            raise ProviderError(f"offense score {a}={v} outside [0, 1]")
        out[a] = v
    return out
