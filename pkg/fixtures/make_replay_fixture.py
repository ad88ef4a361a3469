"""Rebuild fixtures/replay: hand-chosen provider responses for one 5-post corpus.

The recorded values are the oracle inputs for the replay tests; edit them here
and rerun ``python3 fixtures/make_replay_fixture.py`` to refresh the records.
"""

import json
import shutil
from pathlib import Path

from crosspersona.domain import OFFENSE_ATTRIBUTES, Post, PostCorpus
from crosspersona.personality import build_submission
from crosspersona.providers import ProviderRequest, ReplayCache

HERE = Path(__file__).resolve().parent
OUT = HERE / "replay"

POSTS = [
    "Shipped the new compiler pass today, thanks everyone.",
    "Anyone else worried about the release deadline?",
    "Weekend plan: chess and coffee.",
    "This take is ridiculous and wrong.",
    "Calm week, reading about linux kernels.",
]
# runs per trait (openness .. neuroticism), ten each
RUNS = [
    [4.0] * 10,
    [3.0, 4.0] * 5,
    [1.0, 5.0] * 5,
    [1.5, 2.5] * 5,
    [2.0, 4.0, 2.0, 4.0, 2.0, 4.0, 2.0, 4.0, 3.0, 3.0],
]
CLASSES = [
    [{"path": "/Computers & Electronics/Programming", "confidence": 0.4}],
    [],
    [{"path": "/Games/Table Games/Chess", "confidence": 0.7},
     {"path": "/Food & Drink/Beverages/Coffee & Tea", "confidence": 0.3}],
    [],
    [{"path": "/Computers & Electronics/Software/Operating Systems", "confidence": 0.6},
     {"path": "/Computers & Electronics/Programming", "confidence": 0.9}],
]
TOXICITY = [0.05, 0.20, 0.01, 0.85, 0.10]
INSULT = [0.02, 0.10, 0.00, 0.80, 0.05]


def offense(i):
    scores = {a: 0.01 * (j + 1) for j, a in enumerate(OFFENSE_ATTRIBUTES)}
    scores["toxicity"] = TOXICITY[i]
    scores["insult"] = INSULT[i]
    return scores


def corpus():
    return PostCorpus("r1", "x", tuple(Post("x", "r1", t) for t in POSTS))


def main():
    shutil.rmtree(OUT, ignore_errors=True)
    cache = ReplayCache(OUT, "record")
    text = build_submission(corpus(), 200)
    for t, runs in enumerate(RUNS, start=1):
        for r, score in enumerate(runs):
            cache.put(ProviderRequest("personality", text, t, r), score)
    for i, post in enumerate(POSTS):
        cache.put(ProviderRequest("classify", post), CLASSES[i])
        cache.put(ProviderRequest("offense", post), offense(i))
    (OUT / "posts.json").write_text(json.dumps({"posts": POSTS}, indent=1) + "\n")


if __name__ == "__main__":
    main()
