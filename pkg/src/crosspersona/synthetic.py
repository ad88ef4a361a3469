"""Deterministic synthetic corpus for offline end-to-end runs.

Each user gets latent OCEAN traits per platform; posts are built from the
bundled cue-word lexicons so the mock providers recover traits, topics and
offensive behaviour that track the latent values. Run
``python3 -m crosspersona.synthetic OUT_DIR`` to write identities, corpora,
labeled users and a matching config.
"""

from __future__ import annotations

import argparse
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .domain import TRAITS, Post, PostCorpus
from .matching import LinkedIdentity
from .providers.mock import load_lexicon
from .storage import dumps_record, post_to_record, write_identities, write_jsonl, write_text

FILLER = ("today", "this", "week", "with", "some", "notes", "about", "our", "new", "on", "and", "the")
PROFESSIONAL_TOPICS = ("python", "rust", "docker", "linux", "postgres", "react", "cloud", "kernel",
                       "git", "compiler", "android", "opensource", "javascript", "firewall")
PERSONAL_TOPICS = ("hiring", "career", "ml", "startup", "music", "coffee", "hiking", "chess",
                   "gaming", "travel", "running", "election", "crypto", "photography")
TRIGGERS = ("idiot", "moron", "trash", "loser")
# platform-level shift added to the latent linkedin traits when posting on x
X_SHIFT = (0.1, -0.3, 0.2, -0.6, 0.9)
EPOCH = datetime(2023, 1, 1, tzinfo=timezone.utc)


def _cue_bag(rng: np.random.Generator, traits, lex: dict, cues_per_trait: int) -> list[str]:
    words = []
    for t, value in zip(TRAITS, traits):
        share = (value - 1.0) / 4.0
        n_high = int(round(share * cues_per_trait))
        words += list(rng.choice(lex[t]["high"], n_high))
        words += list(rng.choice(lex[t]["low"], cues_per_trait - n_high))
    return words


def _posts(rng, user: str, platform: str, traits, n_posts: int, lex: dict, topics: tuple,
           offensive: bool, terse: bool = False) -> list[Post]:
    # terse users leave little cue evidence, so provider runs disagree
    cues = 1 if terse else max(10, 2 * n_posts)
    bag = _cue_bag(rng, traits, lex, cues_per_trait=cues)
    bag += list(rng.choice(topics, max(2, n_posts)))
    if offensive:
        bag += list(rng.choice(TRIGGERS, 1 + n_posts // 4))
    order = rng.permutation(len(bag))
    buckets: list[list[str]] = [[] for _ in range(n_posts)]
    for i, j in enumerate(order):
        buckets[i % n_posts].append(str(bag[j]))
    posts = []
    for i, words in enumerate(buckets):
        filler = list(rng.choice(FILLER, 4))
        body = " ".join(filler[:2] + words + filler[2:])
        stamp = EPOCH + timedelta(days=int(rng.integers(0, 700)), minutes=i)
        posts.append(Post(platform, user, body.capitalize() + ".", stamp))
    posts.sort(key=lambda p: p.posted_at, reverse=True)
    return posts


def _clip(v):
    return tuple(float(min(5.0, max(1.0, round(x, 2)))) for x in v)


def generate(seed: int = 7, n_identities: int = 130) -> tuple[list[LinkedIdentity], list[PostCorpus]]:
    rng = np.random.default_rng(seed)
    lex = load_lexicon("personality_lexicon.json")
    identities, corpora = [], []
    for i in range(n_identities):
        user = f"u{i:03d}"
        roll = i % 13
        if roll == 12:
            links = {"linkedin": f"in/{user}", "mastodon": f"@{user}@example.social"}
        elif roll == 11:
            links = {"x": f"@{user}_x", "github": f"{user}"}
        else:
            links = {"linkedin": f"https://www.linkedin.com/in/{user}", "x": f"@{user}"}
            if roll % 3 == 0:
                links["github"] = f"github.com/{user}"
        manual = {"x": False} if i in (17, 88) else {}
        identities.append(LinkedIdentity(user, links, manual_verified=manual))

        base = rng.normal(3.0, 0.7, 5)
        # a third of users change a lot between platforms
        spread = 1.2 if i % 3 == 0 else 0.3
        per_platform = {
            "linkedin": _clip(base),
            "x": _clip(base + np.array(X_SHIFT) + rng.normal(0.0, spread, 5)),
            "mastodon": _clip(base + rng.normal(0.0, 0.3, 5)),
            "github": _clip(base),
        }
        for platform in sorted(links):
            if platform == "github":
                continue
            traits = per_platform[platform]
            n_posts = int(rng.integers(3, 12))
            if platform == "x" and i % 17 == 5:
                n_posts = 1
            topics = PROFESSIONAL_TOPICS if platform == "linkedin" else PROFESSIONAL_TOPICS + PERSONAL_TOPICS
            rate = 0.04 if platform == "linkedin" else 0.15 + 0.12 * (traits[4] - 3.0)
            offensive = rng.random() < rate
            terse = platform == "x" and i % 23 == 7
            posts = _posts(rng, user, platform, traits, n_posts, lex, topics, offensive, terse)
            if platform == "x" and i % 29 == 3:
                # linked account with nothing but blank posts
                posts = [Post(platform, user, "  ", p.posted_at) for p in posts]
            corpora.append(PostCorpus(user, platform, tuple(posts)))
    return identities, corpora


def generate_labeled(seed: int = 11, n_users: int = 60) -> list[dict]:
    rng = np.random.default_rng(seed)
    lex = load_lexicon("personality_lexicon.json")
    out = []
    for i in range(n_users):
        user = f"lab{i:03d}"
        truth = _clip(rng.normal(3.0, 0.8, 5))
        # observed text reflects a noisy view of the true traits
        shown = _clip(np.array(truth) + rng.normal(0.0, 0.5, 5))
        n_posts = 1 if i % 10 == 9 else int(rng.integers(2, 10))
        posts = _posts(rng, user, "labeled", shown, n_posts, lex, PERSONAL_TOPICS, False)
        out.append({"user_key": user, "true_traits": list(truth), "posts": [p.text for p in posts]})
    return out


CONFIG = {
    "seed": 2024,
    "workers": 4,
    "platforms": ["linkedin", "x"],
    "paths": {
        "identities": "identities.jsonl",
        "corpora": "corpora.jsonl",
        "labeled": "labeled.jsonl",
        "out_dir": "out",
    },
    "match": {"require_all": True, "sample_size": 100},
    "clustering": {"k_min": 2, "k_max": 10, "repeats": 10},
}


def write_fixture(out_dir: str | Path, seed: int = 7) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    identities, corpora = generate(seed)
    write_identities(out / "identities.jsonl", identities)
    # post lines are stored shuffled; loaders restore most-recent-first order
    lines = [dumps_record(post_to_record(p)) for c in corpora for p in c.posts]
    order = np.random.default_rng(seed + 1).permutation(len(lines))
    write_text(out / "corpora.jsonl", "".join(lines[i] + "\n" for i in order))
    write_jsonl(out / "labeled.jsonl", generate_labeled())
    write_text(out / "config.json", json.dumps(CONFIG, indent=2, sort_keys=True) + "\n")
    return out


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description="Write the synthetic fixture corpus.")
    ap.add_argument("out_dir")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    print(write_fixture(args.out_dir, args.seed))


if __name__ == "__main__":
    main()
