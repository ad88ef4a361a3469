"""Core value types shared by every pipeline stage.

All types are frozen dataclasses. Trait vectors are always 5-tuples in OCEAN
order (openness, conscientiousness, extraversion, agreeableness, neuroticism).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from .errors import DataError, StructuralError

TRAITS: tuple[str, ...] = (
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
)
TRAIT_MIN = 1.0
TRAIT_MAX = 5.0

OFFENSE_ATTRIBUTES: tuple[str, ...] = (
    "toxicity",
    "severe_toxicity",
    "identity_attack",
    "insult",
    "profanity",
    "threat",
)


def normalize_platform(name: str) -> str:
    """Platform ids are short lowercase identifiers."""
    if not isinstance(name, str) or not name.strip():
        raise DataError(f"invalid platform id: {name!r}")
    return name.strip().lower()


def _check_traits(values: Sequence[float], what: str) -> tuple[float, ...]:
    if len(values) != len(TRAITS):
        raise DataError(f"{what}: expected {len(TRAITS)} trait values, got {len(values)}")
    out = tuple(float(v) for v in values)
    for v in out:
        if not (TRAIT_MIN <= v <= TRAIT_MAX) or math.isnan(v):
            raise DataError(f"{what}: trait score {v} outside [{TRAIT_MIN}, {TRAIT_MAX}]")
    return out


@dataclass(frozen=True)
class Post:
    platform: str
    author_key: str
    text: str
    posted_at: datetime | None = None
    is_bio: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "platform", normalize_platform(self.platform))
        if not self.author_key:
            raise DataError("post author_key must be nonempty")
        if self.posted_at is not None and self.posted_at.tzinfo is None:
            raise DataError("post timestamps must be timezone-aware (UTC)")


@dataclass(frozen=True)
class PostCorpus:
    """Recent posts of one user on one platform, most recent first."""

    user: str
    platform: str
    posts: tuple[Post, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "platform", normalize_platform(self.platform))
        object.__setattr__(self, "posts", tuple(self.posts))
        for p in self.posts:
            if p.author_key != self.user or p.platform != self.platform:
                raise DataError(
                    f"post by {p.author_key}/{p.platform} in corpus {self.user}/{self.platform}"
                )
        stamps = [p.posted_at for p in self.posts]
        if stamps and all(s is not None for s in stamps):
            if any(a < b for a, b in zip(stamps, stamps[1:])):
                raise DataError(f"corpus {self.user}/{self.platform} is not most-recent-first")

    @property
    def texts(self) -> list[str]:
        """Nonempty post texts in corpus order."""
        return [p.text for p in self.posts if p.text.strip()]

    def __len__(self) -> int:
        return len(self.posts)


@dataclass(frozen=True)
class PersonalityVector:
    traits: tuple[float, ...]
    run_stddev: tuple[float, ...]
    runs: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "traits", _check_traits(self.traits, "PersonalityVector"))
        sd = tuple(float(s) for s in self.run_stddev)
        if len(sd) != len(TRAITS) or any(s < 0 or math.isnan(s) for s in sd):
            raise DataError(f"run_stddev must be five nonnegative values, got {sd}")
        object.__setattr__(self, "run_stddev", sd)
        if int(self.runs) < 1:
            raise DataError("runs must be >= 1")


@dataclass(frozen=True, order=True)
class CategoryPath:
    """A hierarchical content category, root segment first."""

    segments: tuple[str, ...]
    confidence: float = 1.0

    def __post_init__(self) -> None:
        segs = tuple(self.segments)
        if not segs or any(not isinstance(s, str) or not s for s in segs):
            raise DataError(f"invalid category path: {segs!r}")
        object.__setattr__(self, "segments", segs)
        c = float(self.confidence)
        if not (0.0 <= c <= 1.0):
            raise DataError(f"category confidence {c} outside [0, 1]")
        object.__setattr__(self, "confidence", c)

    @classmethod
    def parse(cls, path: str, confidence: float = 1.0) -> "CategoryPath":
        """Parse the slash-delimited form, e.g. ``/Computers & Electronics/Programming``."""
        return cls(tuple(s for s in path.strip().split("/") if s), confidence)

    @property
    def root(self) -> str:
        return self.segments[0]

    @property
    def leaf(self) -> str:
        return self.segments[-1]

    def __str__(self) -> str:
        return "/" + "/".join(self.segments)


def canonical_categories(paths: Iterable[CategoryPath]) -> tuple[CategoryPath, ...]:
    """Dedupe by path keeping the max confidence; sort by path."""
    best: dict[tuple[str, ...], CategoryPath] = {}
    for p in paths:
        cur = best.get(p.segments)
        if cur is None or p.confidence > cur.confidence:
            best[p.segments] = p
    return tuple(best[k] for k in sorted(best))


@dataclass(frozen=True)
class OffenseScores:
    """Per-attribute maxima over a user's scored posts."""

    maxima: Mapping[str, float]
    n_posts_scored: int
    n_posts_failed: int = 0

    def __post_init__(self) -> None:
        if set(self.maxima) != set(OFFENSE_ATTRIBUTES):
            raise DataError(f"offense scores need exactly {OFFENSE_ATTRIBUTES}")
        m = {a: float(self.maxima[a]) for a in OFFENSE_ATTRIBUTES}
        for a, v in m.items():
            if not (0.0 <= v <= 1.0):
                raise DataError(f"offense score {a}={v} outside [0, 1]")
        object.__setattr__(self, "maxima", m)

    def __getitem__(self, attribute: str) -> float:
        return self.maxima[attribute]


@dataclass(frozen=True)
class PlatformProfile:
    """Per-platform profile: personality, interests and offensiveness."""

    user: str
    platform: str
    personality: PersonalityVector | None
    professional_interests: tuple[CategoryPath, ...]
    personal_interests: tuple[CategoryPath, ...]
    offensive: bool
    offense: OffenseScores | None = None
    filter_reason: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "platform", normalize_platform(self.platform))
        prof = canonical_categories(self.professional_interests)
        pers = canonical_categories(self.personal_interests)
        overlap = {p.segments for p in prof} & {p.segments for p in pers}
        if overlap:
            shown = ", ".join("/" + "/".join(s) for s in sorted(overlap))
            raise StructuralError(f"professional and personal interests overlap: {shown}")
        object.__setattr__(self, "professional_interests", prof)
        object.__setattr__(self, "personal_interests", pers)


@dataclass(frozen=True)
class CrossPlatformProfile:
    user: str
    per_platform: Mapping[str, PlatformProfile]
    averaged_traits: tuple[float, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.per_platform:
            raise DataError("cross-platform profile needs at least one platform")
        object.__setattr__(
            self, "per_platform", {k: self.per_platform[k] for k in sorted(self.per_platform)}
        )
        if self.averaged_traits is not None:
            object.__setattr__(
                self, "averaged_traits", _check_traits(self.averaged_traits, "averaged_traits")
            )

    def traits_on(self, platform: str) -> tuple[float, ...] | None:
        prof = self.per_platform.get(platform)
        if prof is None or prof.personality is None:
            return None
        return prof.personality.traits


def build_profile(
    user: str,
    platform: str,
    personality: PersonalityVector | None,
    prof: Iterable[CategoryPath],
    pers: Iterable[CategoryPath],
    offense: OffenseScores | None,
    offensive: bool,
    filter_reason: str | None = None,
) -> PlatformProfile:
    """Assemble a platform profile; raises StructuralError on interest overlap."""
    return PlatformProfile(
        user=user,
        platform=platform,
        personality=personality,
        professional_interests=tuple(prof),
        personal_interests=tuple(pers),
        offensive=bool(offensive),
        offense=offense,
        filter_reason=filter_reason,
    )


def synthesize_cross_platform(profiles: Sequence[PlatformProfile]) -> CrossPlatformProfile:
    """Combine one user's platform profiles.

    Trait averages run over the platforms that actually carry a personality
    vector; platforms whose inference was filtered out do not enter the
    denominator.
    """
    if not profiles:
        raise DataError("cannot synthesize a cross-platform profile from no profiles")
    users = {p.user for p in profiles}
    if len(users) != 1:
        raise DataError(f"profiles span several users: {sorted(users)}")
    per_platform: dict[str, PlatformProfile] = {}
    for p in profiles:
        if p.platform in per_platform:
            raise DataError(f"duplicate platform {p.platform!r} for user {p.user}")
        per_platform[p.platform] = p

    vectors = [
        per_platform[k].personality.traits
        for k in sorted(per_platform)
        if per_platform[k].personality is not None
    ]
    averaged = None
    if vectors:
        averaged = tuple(
            min(max(math.fsum(col) / len(col), min(col)), max(col)) for col in zip(*vectors)
        )
    return CrossPlatformProfile(user=users.pop(), per_platform=per_platform, averaged_traits=averaged)
