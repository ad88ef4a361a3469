from __future__ import annotations

import shutil
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
from hypothesis import strategies as st

from crosspersona.domain import (
    OFFENSE_ATTRIBUTES,
    CategoryPath,
    CrossPlatformProfile,
    OffenseScores,
    PersonalityVector,
    PlatformProfile,
    Post,
    PostCorpus,
)
from crosspersona.matching import LinkedIdentity

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


@pytest.fixture
def synthetic_dir(tmp_path: Path) -> Path:
    """A private copy of the bundled synthetic corpus and its config."""
    dst = tmp_path / "synthetic"
    shutil.copytree(FIXTURES / "synthetic", dst)
    return dst


def vector(traits, sd=(0.0,) * 5, runs=10) -> PersonalityVector:
    return PersonalityVector(tuple(traits), tuple(sd), runs)


def zero_offense(n=1) -> OffenseScores:
    return OffenseScores({a: 0.0 for a in OFFENSE_ATTRIBUTES}, n)


def profile(user, platform, traits=None, prof=(), pers=(), offensive=False, reason=None) -> PlatformProfile:
    return PlatformProfile(
        user=user,
        platform=platform,
        personality=None if traits is None else vector(traits),
        professional_interests=tuple(CategoryPath.parse(p) for p in prof),
        personal_interests=tuple(CategoryPath.parse(p) for p in pers),
        offensive=offensive,
        offense=zero_offense(),
        filter_reason=reason,
    )


# -- hypothesis strategies ----------------------------------------------------

# text that survives UTF-8 encoding (no lone surrogates)
texts = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40)
names = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=12)
platform_ids = st.sampled_from(["linkedin", "x", "mastodon", "github", "reddit"])
trait_values = st.floats(1.0, 5.0, allow_nan=False)
unit = st.floats(0.0, 1.0, allow_nan=False)

trait_vectors = st.tuples(*[trait_values] * 5)
personality_vectors = st.builds(
    PersonalityVector,
    traits=trait_vectors,
    run_stddev=st.tuples(*[st.floats(0.0, 3.0, allow_nan=False)] * 5),
    runs=st.integers(1, 20),
)
category_paths = st.builds(
    CategoryPath, segments=st.lists(names, min_size=1, max_size=4).map(tuple), confidence=unit
)
offense_scores = st.builds(
    OffenseScores,
    maxima=st.fixed_dictionaries({a: unit for a in OFFENSE_ATTRIBUTES}),
    n_posts_scored=st.integers(0, 500),
    n_posts_failed=st.integers(0, 5),
)


@st.composite
def platform_profiles(draw, user=None, platform=None) -> PlatformProfile:
    cats = draw(st.lists(category_paths, max_size=6))
    # split by unique path so the two sets are disjoint
    split = draw(st.lists(st.booleans(), min_size=len(cats), max_size=len(cats)))
    seen: dict[tuple, bool] = {}
    for c, s in zip(cats, split):
        seen.setdefault(c.segments, s)
    prof = [c for c in cats if seen[c.segments]]
    pers = [c for c in cats if not seen[c.segments]]
    return PlatformProfile(
        user=user if user is not None else draw(names),
        platform=platform if platform is not None else draw(platform_ids),
        personality=draw(st.none() | personality_vectors),
        professional_interests=tuple(prof),
        personal_interests=tuple(pers),
        offensive=draw(st.booleans()),
        offense=draw(st.none() | offense_scores),
        filter_reason=draw(st.none() | st.sampled_from(["stddev", "min_posts"])),
    )


@st.composite
def cross_profiles(draw) -> CrossPlatformProfile:
    user = draw(names)
    plats = draw(st.lists(platform_ids, min_size=1, max_size=3, unique=True))
    per = {p: draw(platform_profiles(user=user, platform=p)) for p in plats}
    return CrossPlatformProfile(user, per, draw(st.none() | trait_vectors))


@st.composite
def linked_identities(draw) -> LinkedIdentity:
    links = draw(st.dictionaries(platform_ids, texts, min_size=1, max_size=4))
    plats = sorted(links)
    verified = draw(st.dictionaries(st.sampled_from(plats), st.booleans()))
    manual = draw(st.dictionaries(st.sampled_from(plats), st.booleans()))
    return LinkedIdentity(draw(names), links, verified, manual)


timestamps = st.datetimes(
    min_value=datetime(2000, 1, 1), max_value=datetime(2035, 1, 1), timezones=st.just(timezone.utc)
)


@st.composite
def post_corpora(draw, user=None, platform=None) -> PostCorpus:
    user = user if user is not None else draw(names)
    platform = platform if platform is not None else draw(platform_ids)
    n = draw(st.integers(1, 5))
    stamped = draw(st.booleans())
    posts = []
    if stamped:
        start = draw(timestamps)
        gaps = draw(st.lists(st.integers(1, 10**7), min_size=n, max_size=n))
        t = start
        for g in gaps:
            posts.append(Post(platform, user, draw(texts), t, draw(st.booleans())))
            t = t - timedelta(seconds=g)
    else:
        posts = [Post(platform, user, draw(texts), None, draw(st.booleans())) for _ in range(n)]
    return PostCorpus(user, platform, tuple(posts))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title = results[number]
        terminalreporter.write_line(f"criterion {number}: {status} {title}")
