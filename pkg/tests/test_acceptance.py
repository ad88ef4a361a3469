"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line.

Criterion 8 needs a real labeled dataset and a live scoring endpoint; it is
skipped unless ``CROSSPERSONA_LIVE_CONFIG`` points at a config file whose
``paths.labeled`` and ``providers.endpoints`` are filled in.
"""

import functools
import json
import math
import os
import random
import shutil
import socket
import sys
import time
from pathlib import Path

import httpx
import numpy as np
import pytest

from crosspersona import pipeline
from crosspersona.clustering import FeatureMatrix, kmeans, select_k, silhouette
from crosspersona.config import PipelineConfig
from crosspersona.domain import OFFENSE_ATTRIBUTES, OffenseScores, Post, PostCorpus
from crosspersona.offense import OffenseConfig, classify_offensive, score_offensiveness
from crosspersona.personality import (
    FILTER_MODES,
    InferenceConfig,
    apply_stability_filter,
    error_metrics,
    infer_personality,
)
from crosspersona.providers import CachedPersonalityProvider, ReplayCache
from crosspersona.stats import ks_two_sample, point_biserial
from crosspersona.storage import (
    dumps_corpora,
    dumps_identities,
    dumps_profiles,
    loads_corpora,
    loads_identities,
    loads_profiles,
    persist_profiles,
    read_csv,
    read_jsonl,
)

from conftest import FIXTURES, cross_profiles, linked_identities, platform_profiles, post_corpora, profile, vector

sys.path.insert(0, str(FIXTURES))
import make_replay_fixture as replay_fx  # noqa: E402

RESULTS: dict[int, tuple[str, str]] = {}


def criterion(number: int, title: str):
    """Record the outcome of an acceptance test and print it as one line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except pytest.skip.Exception:
                RESULTS[number] = ("SKIP", title)
                print(f"criterion {number}: SKIP {title}")
                raise
            except BaseException:
                RESULTS[number] = ("FAIL", title)
                print(f"criterion {number}: FAIL {title}")
                raise
            RESULTS[number] = ("PASS", title)
            print(f"criterion {number}: PASS {title}")

        return run

    return wrap


# -- independent oracles ---------------------------------------------------------

def brute_ks(a, b):
    grid = sorted(set(a) | set(b))
    return max(abs(sum(x <= g for x in a) / len(a) - sum(x <= g for x in b) / len(b)) for g in grid)


def pearson(x, y):
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((u - mx) * (v - my) for u, v in zip(x, y))
    sxx = math.fsum((u - mx) ** 2 for u in x)
    syy = math.fsum((v - my) ** 2 for v in y)
    return sxy / math.sqrt(sxx * syy)


def brute_silhouette(points, labels):
    n = len(points)
    out = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            out.append(0.0)
            continue
        a = sum(math.dist(points[i], points[j]) for j in own) / len(own)
        b = min(
            sum(math.dist(points[i], points[j]) for j in range(n) if labels[j] == c)
            / sum(1 for j in range(n) if labels[j] == c)
            for c in set(labels) if c != labels[i]
        )
        out.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return out


def brute_change_table(deltas, magnitudes):
    rows = []
    for n in range(1, 6):
        row = []
        for m in magnitudes:
            hits = sum(1 for d in deltas if sum(1 for v in d if abs(v) >= m - 1e-9) >= n)
            row.append(100.0 * hits / len(deltas))
        rows.append(row)
    return rows


# -- 1 -------------------------------------------------------------------------

@criterion(1, "KS and point-biserial match brute-force oracles (1e-12), < 10 s")
def test_criterion_1_statistics_oracles():
    start = time.perf_counter()
    rng = random.Random(1)
    for i in range(1000):
        na, nb = rng.randint(1, 50), rng.randint(1, 50)
        if i % 2:  # heavy ties
            a = [rng.randint(0, 8) / 2 for _ in range(na)]
            b = [rng.randint(0, 8) / 2 for _ in range(nb)]
        else:
            a = [rng.uniform(1, 5) for _ in range(na)]
            b = [rng.uniform(1, 5) for _ in range(nb)]
        assert abs(ks_two_sample(a, b).d_statistic - brute_ks(a, b)) <= 1e-12
    assert ks_two_sample([1, 2, 3, 4], [2, 3, 4, 5]).d_statistic == 0.25

    checked = 0
    while checked < 1000:
        n = rng.randint(3, 50)
        flags = [rng.randint(0, 1) for _ in range(n)]
        vals = [rng.uniform(1, 5) + rng.choice([0.0, 0.7]) * f for f in flags]
        if len(set(flags)) < 2:
            continue
        assert abs(point_biserial(flags, vals).r - pearson(flags, vals)) <= 1e-12
        checked += 1
    assert time.perf_counter() - start < 10.0


# -- 2 -------------------------------------------------------------------------

def separated_blobs(seed):
    rng = np.random.default_rng(seed)
    while True:
        centers = rng.uniform(0, 12, (3, 5))
        if min(np.linalg.norm(centers[i] - centers[j]) for i in range(3) for j in range(i + 1, 3)) >= 5:
            break
    pts = np.vstack([c + rng.normal(0, 0.2, (20, 5)) for c in centers])
    return FeatureMatrix(tuple(f"p{i}" for i in range(60)), pts)


@criterion(2, "select_k finds 3 blobs in >= 95/100 seeds; silhouette oracle 1e-9; monotone objective")
def test_criterion_2_clustering():
    hits = 0
    for seed in range(100):
        data = separated_blobs(seed)
        res = select_k(data, (2, 10), repeats=10, seed=seed)
        hits += res.best_k == 3
        h = res.best.objective_history
        assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(h, h[1:]))
        for k in (2, 5, 9):
            h = kmeans(data, k, seed + 1000).objective_history
            assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(h, h[1:]))
    assert hits >= 95, f"k=3 recovered in {hits}/100 seeds"

    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(3, 51))
        pts = rng.normal(size=(n, int(rng.integers(1, 6))))
        k = int(rng.integers(2, min(6, n) + 1))
        labels = rng.integers(0, k, n).tolist()
        if len(set(labels)) < 2:
            continue
        s, _ = silhouette(FeatureMatrix(tuple(map(str, range(n))), pts), labels)
        assert np.allclose(s, brute_silhouette(pts.tolist(), labels), atol=1e-9, rtol=0)


# -- 3 -------------------------------------------------------------------------

@criterion(3, "replayed runs match the hand oracle; filter monotone and intersection law")
def test_criterion_3_inference_and_filter():
    cache = ReplayCache(FIXTURES / "replay", "replay")
    v = infer_personality(replay_fx.corpus(), CachedPersonalityProvider(cache), InferenceConfig())
    assert v.traits == (4.0, 3.5, 3.0, 2.0, 3.0)
    assert v.run_stddev == (0.0, 0.5, 2.0, 0.5, math.sqrt(0.8))

    rng = random.Random(3)
    for _ in range(1000):
        vec = vector([3] * 5, sd=[rng.choice([0.0, 0.6, rng.uniform(0, 2)]) for _ in range(5)])
        n_posts = rng.randint(0, 8)
        t_lo, t_hi = sorted(rng.uniform(0, 2) for _ in range(2))
        m_lo, m_hi = sorted(rng.randint(0, 8) for _ in range(2))
        keep = {}
        for mode in FILTER_MODES:
            lo = apply_stability_filter(vec, n_posts, InferenceConfig(stddev_threshold=t_lo, min_posts=m_lo), mode)
            hi_t = apply_stability_filter(vec, n_posts, InferenceConfig(stddev_threshold=t_hi, min_posts=m_lo), mode)
            hi_m = apply_stability_filter(vec, n_posts, InferenceConfig(stddev_threshold=t_lo, min_posts=m_hi), mode)
            assert not lo.keep or hi_t.keep
            assert lo.keep or not hi_m.keep
            keep[mode] = lo.keep
        assert keep["none"]
        assert keep["both"] == (keep["stddev"] and keep["posts"])


# -- 4 -------------------------------------------------------------------------

class TableScorer:
    max_in_flight = 1
    max_chars = 20000

    def __init__(self, table):
        self.table = table

    def score_offense(self, text):
        return self.table[text]


@criterion(4, "offensive flag monotone in threshold; 0.8 boundary; maxima match brute force")
def test_criterion_4_offensiveness():
    rng = random.Random(4)
    for _ in range(1000):
        scores = OffenseScores({a: rng.random() for a in OFFENSE_ATTRIBUTES}, 1)
        lo, hi = sorted(rng.random() for _ in range(2))
        if classify_offensive(scores, OffenseConfig(hi)):
            assert classify_offensive(scores, OffenseConfig(lo))
    edge = OffenseScores({a: (0.8 if a == "toxicity" else 0.0) for a in OFFENSE_ATTRIBUTES}, 1)
    assert classify_offensive(edge, OffenseConfig(0.8))

    for _ in range(200):
        rows = [{a: rng.random() for a in OFFENSE_ATTRIBUTES} for _ in range(rng.randint(1, 10))]
        texts = [f"post {i}" for i in range(len(rows))]
        corpus = PostCorpus("u", "x", tuple(Post("x", "u", t) for t in texts))
        got = score_offensiveness(corpus, TableScorer(dict(zip(texts, rows))))
        for a in OFFENSE_ATTRIBUTES:
            best = rows[0][a]
            for r in rows[1:]:
                if r[a] > best:
                    best = r[a]
            assert got[a] == best


# -- 5 -------------------------------------------------------------------------

@criterion(5, "RMSE/MSE/MAE match hand oracles; RMSE >= MAE; perfect predictor is zero")
def test_criterion_5_error_metrics():
    rmse, mse, mae = error_metrics([[1.0, 2.0], [3.0, 4.0]], [[2.0, 2.0], [5.0, 1.0]])
    assert abs(mae[0] - 1.5) <= 1e-12 and abs(mse[0] - 2.5) <= 1e-12 and abs(rmse[0] - math.sqrt(2.5)) <= 1e-12
    assert abs(mae[1] - 1.5) <= 1e-12 and abs(mse[1] - 4.5) <= 1e-12 and abs(rmse[1] - math.sqrt(4.5)) <= 1e-12

    rng = random.Random(5)
    for _ in range(1000):
        n = rng.randint(1, 12)
        pred = [[rng.uniform(1, 5) for _ in range(5)] for _ in range(n)]
        truth = [[rng.uniform(1, 5) for _ in range(5)] for _ in range(n)]
        rmse, mse, mae = error_metrics(pred, truth)
        for i in range(5):
            oracle_mse = sum((p[i] - t[i]) ** 2 for p, t in zip(pred, truth)) / n
            oracle_mae = sum(abs(p[i] - t[i]) for p, t in zip(pred, truth)) / n
            assert abs(mse[i] - oracle_mse) <= 1e-12 and abs(mae[i] - oracle_mae) <= 1e-12
            assert rmse[i] >= mae[i] - 1e-12
        assert error_metrics(truth, truth) == ((0.0,) * 5,) * 3


# -- 6 -------------------------------------------------------------------------

HAND_DELTAS = {
    # user: (linkedin traits, x traits); unlisted users move by (x - linkedin)
    "u01": ((3.0,) * 5, (3.0,) * 5),
    "u02": ((3.0,) * 5, (4.0, 3.0, 3.0, 3.0, 3.0)),
    "u03": ((3.0,) * 5, (2.0, 4.0, 3.0, 3.0, 3.0)),
    "u04": ((3.0,) * 5, (5.0, 2.5, 3.0, 3.0, 3.0)),
    "u05": ((3.0,) * 5, (1.0, 5.0, 4.0, 3.0, 3.0)),
    "u06": ((3.0,) * 5, (3.9,) * 5),
    "u07": ((3.0,) * 5, (4.5, 4.5, 4.5, 4.5, 3.0)),
    "u08": ((3.0,) * 5, (1.0,) * 5),
    "u09": ((3.0, 2.3, 3.0, 3.0, 3.0), (3.0, 1.3, 3.0, 3.0, 3.0)),
    "u10": ((1.0, 1.0, 3.0, 3.0, 3.0), (4.0, 4.5, 3.0, 3.0, 3.0)),
}

# Enumerated by hand from HAND_DELTAS: percent of the 10 paired users with at
# least n traits whose |change| reaches 1, 2 and 3 points.
HAND_TABLE = [
    [80.0, 40.0, 10.0],
    [50.0, 30.0, 10.0],
    [30.0, 10.0, 0.0],
    [20.0, 10.0, 0.0],
    [10.0, 10.0, 0.0],
]


def _table(path):
    return [[float(r[c]) for c in ("1+", "2+", "3+")] for r in read_csv(path)]


class NetworkGuard:
    """Counts (and refuses) socket connects and httpx transport requests."""

    def __init__(self, monkeypatch):
        self.sockets = 0
        self.http = 0

        def no_connect(sock, *args, **kwargs):
            self.sockets += 1
            raise OSError("network access attempted during an offline run")

        def no_request(transport, request):
            self.http += 1
            raise httpx.ConnectError("network access attempted", request=request)

        monkeypatch.setattr(socket.socket, "connect", no_connect)
        monkeypatch.setattr(socket.socket, "connect_ex", no_connect)
        monkeypatch.setattr(httpx.HTTPTransport, "handle_request", no_request)


def _run_pipeline(src: Path, dst: Path) -> Path:
    shutil.copytree(src, dst)
    cfg = PipelineConfig.load(dst / "config.json")
    pipeline.cmd_match(cfg)
    pipeline.cmd_profile(cfg)
    pipeline.cmd_integrate(cfg)
    for features in ("traits:linkedin", "traits:x", "trait_change"):
        pipeline.cmd_cluster(cfg, features)
    pipeline.cmd_stats(cfg)
    return dst / "out"


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@criterion(6, "synthetic run is byte-identical, golden, < 60 s, offline; change table matches hand fixture")
def test_criterion_6_end_to_end(tmp_path, monkeypatch):
    guard = NetworkGuard(monkeypatch)
    start = time.perf_counter()
    first = _run_pipeline(FIXTURES / "synthetic", tmp_path / "run1")
    second = _run_pipeline(FIXTURES / "synthetic", tmp_path / "run2")
    assert time.perf_counter() - start < 60.0
    a, b = _tree(first), _tree(second)
    assert a.keys() == b.keys() and len(a) > 20
    for name in a:
        assert a[name] == b[name], name

    golden = FIXTURES / "golden"
    assert a["profile/platform_profiles.jsonl"] == (golden / "platform_profiles.jsonl").read_bytes()
    assert a["integrate/change_magnitudes.csv"] == (golden / "change_magnitudes.csv").read_bytes()
    deltas = [r["delta"] for r in read_jsonl(first / "integrate/trait_changes.jsonl")]
    # the csv keeps six significant digits
    assert np.allclose(_table(first / "integrate/change_magnitudes.csv"),
                       brute_change_table(deltas, (1.0, 2.0, 3.0)), rtol=1e-5, atol=0)

    # hand fixture through the integrate stage
    hand = tmp_path / "hand"
    (hand / "out/profile").mkdir(parents=True)
    profiles = []
    for user, (li, x) in HAND_DELTAS.items():
        profiles += [profile(user, "linkedin", li), profile(user, "x", x)]
    profiles += [profile("u11", "linkedin", [3.0] * 5), profile("u11", "x", None, reason="stddev")]
    persist_profiles(hand / "out/profile/platform_profiles.jsonl", profiles)
    (hand / "config.json").write_text(json.dumps({"paths": {"out_dir": "out"}}))
    summary = pipeline.cmd_integrate(PipelineConfig.load(hand / "config.json"))
    assert summary["paired"] == 10 and summary["skipped"] == 1
    assert _table(hand / "out/integrate/change_magnitudes.csv") == HAND_TABLE

    assert guard.sockets == 0 and guard.http == 0


# -- 7 -------------------------------------------------------------------------

@criterion(7, "load(persist(x)) == x for 10,000 generated profiles, identities and corpora")
def test_criterion_7_round_trip():
    from hypothesis import HealthCheck, given, settings
    from hypothesis import strategies as st

    failures = []
    cases = st.one_of(
        platform_profiles().map(lambda p: ("profiles", [p])),
        cross_profiles().map(lambda c: ("profiles", [c])),
        st.lists(linked_identities(), max_size=4, unique_by=lambda u: u.user_key).map(lambda x: ("ids", x)),
        st.lists(post_corpora(), max_size=3, unique_by=lambda c: (c.user, c.platform)).map(lambda x: ("corpora", x)),
    )

    @settings(max_examples=10_000, deadline=None, database=None,
              suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
    @given(cases)
    def round_trip(case):
        kind, items = case
        if kind == "profiles":
            ok = loads_profiles(dumps_profiles(items)) == items
        elif kind == "ids":
            ok = loads_identities(dumps_identities(items)) == items
        else:
            ok = loads_corpora(dumps_corpora(items)) == {(c.user, c.platform): c for c in items}
        if not ok:
            failures.append(case)
        assert ok

    round_trip()
    assert failures == []


# -- 8 -------------------------------------------------------------------------

LIVE_ENV = "CROSSPERSONA_LIVE_CONFIG"


@criterion(8, "live validation report against a labeled dataset (optional, not run in CI)")
def test_criterion_8_live_validation():
    path = os.environ.get(LIVE_ENV)
    if not path:
        pytest.skip(f"set {LIVE_ENV} to a config with paths.labeled and remote endpoints")
    cfg = PipelineConfig.load(path, mode="live")
    summary = pipeline.cmd_validate(cfg)
    rows = read_csv(cfg.out_dir / "validate/error_report.csv")
    rmse_rows = [r for r in rows if r["metric"] == "RMSE" and r["filter_mode"] != "reference"]
    assert rmse_rows and all(float(r[t]) >= 0 for r in rmse_rows for t in
                             ("openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"))
    assert any(r["filter_mode"] == "reference" for r in rows)
    for mode, rep in summary["modes"].items():
        inside = sum(0.894 <= x <= 1.319 for x in rep["rmse"])
        print(f"  {mode}: RMSE {[round(x, 3) for x in rep['rmse']]} ({inside}/5 inside 0.894-1.319)")
