"""Displayed-personality inference from repeated provider runs, with stability filtering
and validation error metrics against labeled users."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .domain import TRAIT_MAX, TRAIT_MIN, TRAITS, PersonalityVector, PostCorpus
from .errors import ConfigError, DataError, InferenceError, ProviderError
from .providers.base import PersonalityProvider

log = logging.getLogger(__name__)

POST_DELIMITER = "\n-----\n"
FILTER_MODES = ("none", "stddev", "posts", "both")


@dataclass(frozen=True)
class InferenceConfig:
    runs: int = 10
    stddev_threshold: float = 0.6
    min_posts: int = 2
    max_posts: int = 200
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.stddev_threshold < 0:
            raise ConfigError("stddev_threshold must be >= 0")
        if self.min_posts < 0 or self.max_posts < 1:
            raise ConfigError("min_posts must be >= 0 and max_posts >= 1")


@dataclass(frozen=True)
class RunRecord:
    """Raw per-run scores kept for the audit log."""

    scores: tuple[tuple[float, ...], ...]  # [trait][run], post-clamp
    clamped: tuple[tuple[int, int, float], ...] = ()  # (trait_index, run_index, raw)


@dataclass(frozen=True)
class Verdict:
    keep: bool
    reason: str | None = None  # "stddev", "min_posts" or None


def build_submission(corpus: PostCorpus, max_posts: int) -> str:
    """Concatenate nonempty posts most-recent-first, capped at ``max_posts``."""
    return POST_DELIMITER.join(corpus.texts[:max_posts])


def mean_and_pstdev(values: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation, exact for constant input."""
    n = len(values)
    if n == 0:
        raise ValueError("no values")
    lo, hi = min(values), max(values)
    if lo == hi:
        return float(lo), 0.0
    mean = min(max(math.fsum(values) / n, lo), hi)
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def aggregate_runs(scores_per_trait: Sequence[Sequence[float]]) -> PersonalityVector:
    means, sds = zip(*(mean_and_pstdev(s) for s in scores_per_trait))
    return PersonalityVector(tuple(means), tuple(sds), len(scores_per_trait[0]))


def infer_personality_runs(
    corpus: PostCorpus, provider: PersonalityProvider, cfg: InferenceConfig
) -> tuple[PersonalityVector, RunRecord]:
    """Run the provider ``cfg.runs`` times per trait; return the averaged vector and raw runs."""
    text = build_submission(corpus, cfg.max_posts)
    if not text.strip():
        raise DataError(f"corpus {corpus.user}/{corpus.platform} has no text to score")
    per_trait: list[tuple[float, ...]] = []
    clamps: list[tuple[int, int, float]] = []
    for t in range(1, len(TRAITS) + 1):
        runs = []
        for r in range(cfg.runs):
            try:
                raw = float(provider.personality_score(text, t, r))
            except ProviderError as exc:
                raise InferenceError(
                    f"personality run {r} (trait {TRAITS[t - 1]}) failed for "
                    f"{corpus.user}/{corpus.platform}: {exc}",
                    run_index=r,
                ) from exc
            if math.isnan(raw):
                raise InferenceError(f"personality run {r} returned NaN", run_index=r)
            score = min(max(raw, TRAIT_MIN), TRAIT_MAX)
            if score != raw:
                log.info("clamped %s run %d trait %d: %r -> %r", corpus.user, r, t, raw, score)
                clamps.append((t, r, raw))
            runs.append(score)
        per_trait.append(tuple(runs))
    return aggregate_runs(per_trait), RunRecord(tuple(per_trait), tuple(clamps))


def infer_personality(
    corpus: PostCorpus, provider: PersonalityProvider, cfg: InferenceConfig
) -> PersonalityVector:
    return infer_personality_runs(corpus, provider, cfg)[0]


def apply_stability_filter(
    v: PersonalityVector, corpus: PostCorpus | int, cfg: InferenceConfig, mode: str = "both"
) -> Verdict:
    """Drop unstable or thin inferences.

    The stddev rule fires when any trait's run dispersion exceeds the threshold;
    the posts rule fires when the corpus has fewer than ``min_posts`` nonempty
    posts. ``mode`` selects which rules apply.
    """
    if mode not in FILTER_MODES:
        raise ConfigError(f"filter mode must be one of {FILTER_MODES}")
    n_posts = corpus if isinstance(corpus, int) else len(corpus.texts)
    # the posts rule is reported first: thin corpora are also the noisy ones
    if mode in ("posts", "both") and n_posts < cfg.min_posts:
        return Verdict(False, "min_posts")
    if mode in ("stddev", "both") and any(s > cfg.stddev_threshold for s in v.run_stddev):
        return Verdict(False, "stddev")
    return Verdict(True)


@dataclass(frozen=True)
class LabeledUser:
    user_key: str
    posts: PostCorpus
    true_traits: tuple[float, ...]

    def __post_init__(self) -> None:
        tt = tuple(float(x) for x in self.true_traits)
        if len(tt) != 5 or any(not TRAIT_MIN <= x <= TRAIT_MAX for x in tt):
            raise DataError(f"labeled user {self.user_key}: true_traits must be five values in [1, 5]")
        object.__setattr__(self, "true_traits", tt)


@dataclass(frozen=True)
class ErrorReport:
    rmse: tuple[float, ...]
    mse: tuple[float, ...]
    mae: tuple[float, ...]
    n_users: int
    filter_mode: str = "none"
    dropped: dict = field(default_factory=dict, compare=False)


def error_metrics(predicted: Sequence[Sequence[float]], truth: Sequence[Sequence[float]]):
    """Per-trait (rmse, mse, mae) over paired rows."""
    if len(predicted) != len(truth) or not predicted:
        raise DataError("need equally many, and at least one, predictions and truths")
    n = len(predicted)
    dims = len(predicted[0])
    mse = tuple(math.fsum((p[i] - t[i]) ** 2 for p, t in zip(predicted, truth)) / n for i in range(dims))
    mae = tuple(math.fsum(abs(p[i] - t[i]) for p, t in zip(predicted, truth)) / n for i in range(dims))
    rmse = tuple(math.sqrt(m) for m in mse)
    return rmse, mse, mae


def report_from_inferences(
    inferred: Sequence[tuple[LabeledUser, PersonalityVector]],
    cfg: InferenceConfig,
    filter_mode: str,
) -> ErrorReport:
    survivors = []
    dropped: dict[str, int] = {}
    for user, vec in inferred:
        verdict = apply_stability_filter(vec, user.posts, cfg, filter_mode)
        if verdict.keep:
            survivors.append((user, vec))
        else:
            dropped[verdict.reason] = dropped.get(verdict.reason, 0) + 1
    if not survivors:
        raise DataError(f"no labeled users survive filter mode {filter_mode!r}")
    rmse, mse, mae = error_metrics([v.traits for _, v in survivors], [u.true_traits for u, _ in survivors])
    return ErrorReport(rmse, mse, mae, len(survivors), filter_mode, dropped)


def validate_against_labels(
    labeled: Sequence[LabeledUser],
    provider: PersonalityProvider,
    cfg: InferenceConfig,
    filter_mode: str = "none",
) -> ErrorReport:
    if not labeled:
        raise DataError("no labeled users")
    inferred = [(u, infer_personality(u.posts, provider, cfg)) for u in labeled]
    return report_from_inferences(inferred, cfg, filter_mode)
