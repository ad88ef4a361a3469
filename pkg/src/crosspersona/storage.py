"""File formats: identities, post corpora, profiles, audit streams, report tables.

Record streams are JSONL (UTF-8, LF). Profile files start with a header line
carrying ``schema_version``. Floats in JSON use shortest round-trip repr;
report CSVs use 6 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from . import __version__
from .domain import (
    CategoryPath,
    CrossPlatformProfile,
    OffenseScores,
    PersonalityVector,
    PlatformProfile,
    Post,
    PostCorpus,
)
from .errors import CrossPersonaError, DataError, SchemaVersionError
from .matching import LinkedIdentity

SCHEMA_VERSION = 1
PLATFORM_PROFILE = "platform_profile"
CROSS_PLATFORM_PROFILE = "cross_platform_profile"


def dumps_record(record: Any) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def fmt6(x: float) -> str:
    """Report-table float format: 6 significant digits."""
    if x != x:
        return ""
    out = f"{x:.6g}"
    return "0" if out == "-0" else out


def parse_timestamp(value: str | None) -> datetime | None:
    if value is None or value == "":
        return None
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime | None) -> str | None:
    if dt is None:
        return None
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _iter_jsonl(text: str, source: str) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: malformed JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise DataError(f"{source}:{lineno}: expected a JSON object")
        yield lineno, obj


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(f"input file {path} not found") from exc


def write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_jsonl(path: str | Path, records: Iterable[Any]) -> None:
    write_text(path, "".join(dumps_record(r) + "\n" for r in records))


def read_jsonl(path: str | Path) -> list[dict]:
    return [obj for _, obj in _iter_jsonl(_read(path), str(path))]


def write_csv(
    path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]], footnotes: Sequence[str] = ()
) -> None:
    """Write a report table; footnote lines are appended as ``# ...`` comments."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt6(v) if isinstance(v, float) else v for v in row])
    for note in footnotes:
        buf.write(f"# {note}\n")
    write_text(path, buf.getvalue())


def read_csv(path: str | Path) -> list[dict[str, str]]:
    lines = [ln for ln in _read(path).split("\n") if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- identities --------------------------------------------------------------

def identity_to_record(u: LinkedIdentity) -> dict:
    rec: dict[str, Any] = {"user_key": u.user_key, "links": dict(u.links)}
    if u.verified:
        rec["verified"] = dict(u.verified)
    if u.manual_verified:
        rec["manual_verified"] = dict(u.manual_verified)
    return rec


def loads_identities(text: str, source: str = "<identities>") -> list[LinkedIdentity]:
    out: list[LinkedIdentity] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(text, source):
        key = obj.get("user_key")
        if not isinstance(key, str) or not key:
            raise DataError(f"{source}:{lineno}: missing user_key")
        if key in seen:
            raise DataError(f"{source}:{lineno}: duplicate user_key {key!r}")
        links = obj.get("links")
        if not isinstance(links, dict) or not all(isinstance(v, str) for v in links.values()):
            raise DataError(f"{source}:{lineno}: links must map platform -> handle")
        try:
            out.append(
                LinkedIdentity(
                    user_key=key,
                    links=links,
                    verified=obj.get("verified") or {},
                    manual_verified=obj.get("manual_verified") or {},
                )
            )
        except CrossPersonaError as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from exc
        seen.add(key)
    return out


def load_identities(path: str | Path) -> list[LinkedIdentity]:
    return loads_identities(_read(path), str(path))


def dumps_identities(identities: Iterable[LinkedIdentity]) -> str:
    return "".join(dumps_record(identity_to_record(u)) + "\n" for u in identities)


def write_identities(path: str | Path, identities: Iterable[LinkedIdentity]) -> None:
    write_text(path, dumps_identities(identities))


# -- corpora -----------------------------------------------------------------

def loads_corpora(text: str, source: str = "<corpora>") -> dict[tuple[str, str], PostCorpus]:
    """Group post lines by (user, platform).

    A corpus whose posts all carry timestamps is sorted most-recent-first
    (stable); otherwise file order is kept.
    """
    grouped: dict[tuple[str, str], list[Post]] = {}
    for lineno, obj in _iter_jsonl(text, source):
        try:
            user = obj["user_key"]
            text_ = obj["text"]
            if not isinstance(user, str) or not isinstance(text_, str):
                raise DataError("user_key and text must be strings")
            post = Post(
                platform=obj["platform"],
                author_key=user,
                text=text_,
                posted_at=parse_timestamp(obj.get("posted_at")),
                is_bio=bool(obj.get("is_bio", False)),
            )
        except KeyError as exc:
            raise DataError(f"{source}:{lineno}: missing field {exc.args[0]!r}") from exc
        except (CrossPersonaError, ValueError, TypeError) as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from exc
        grouped.setdefault((user, post.platform), []).append(post)
    out = {}
    for (user, platform), posts in grouped.items():
        if all(p.posted_at is not None for p in posts):
            posts = sorted(posts, key=lambda p: p.posted_at, reverse=True)
        out[(user, platform)] = PostCorpus(user, platform, tuple(posts))
    return out


def load_corpora(path: str | Path) -> dict[tuple[str, str], PostCorpus]:
    return loads_corpora(_read(path), str(path))


def post_to_record(p: Post) -> dict:
    rec: dict[str, Any] = {"user_key": p.author_key, "platform": p.platform, "text": p.text}
    if p.posted_at is not None:
        rec["posted_at"] = format_timestamp(p.posted_at)
    if p.is_bio:
        rec["is_bio"] = True
    return rec


def dumps_corpora(corpora: Iterable[PostCorpus]) -> str:
    return "".join(dumps_record(post_to_record(p)) + "\n" for c in corpora for p in c.posts)


def write_corpora(path: str | Path, corpora: Iterable[PostCorpus]) -> None:
    write_text(path, dumps_corpora(corpora))


# -- profiles ----------------------------------------------------------------

def _cats_to_list(cats: Sequence[CategoryPath]) -> list[dict]:
    return [{"segments": list(c.segments), "confidence": c.confidence} for c in cats]


def _cats_from_list(items: list[dict]) -> tuple[CategoryPath, ...]:
    return tuple(CategoryPath(tuple(it["segments"]), it["confidence"]) for it in items)


def platform_profile_to_record(p: PlatformProfile) -> dict:
    pv = p.personality
    return {
        "user": p.user,
        "platform": p.platform,
        "personality": None
        if pv is None
        else {"traits": list(pv.traits), "run_stddev": list(pv.run_stddev), "runs": pv.runs},
        "professional_interests": _cats_to_list(p.professional_interests),
        "personal_interests": _cats_to_list(p.personal_interests),
        "offensive": p.offensive,
        "offense": None
        if p.offense is None
        else {
            "maxima": dict(p.offense.maxima),
            "n_posts_scored": p.offense.n_posts_scored,
            "n_posts_failed": p.offense.n_posts_failed,
        },
        "filter_reason": p.filter_reason,
    }


def platform_profile_from_record(r: dict) -> PlatformProfile:
    pv = r.get("personality")
    off = r.get("offense")
    return PlatformProfile(
        user=r["user"],
        platform=r["platform"],
        personality=None if pv is None else PersonalityVector(tuple(pv["traits"]), tuple(pv["run_stddev"]), pv["runs"]),
        professional_interests=_cats_from_list(r["professional_interests"]),
        personal_interests=_cats_from_list(r["personal_interests"]),
        offensive=bool(r["offensive"]),
        offense=None if off is None else OffenseScores(off["maxima"], off["n_posts_scored"], off["n_posts_failed"]),
        filter_reason=r.get("filter_reason"),
    )


def cross_profile_to_record(c: CrossPlatformProfile) -> dict:
    return {
        "user": c.user,
        "averaged_traits": None if c.averaged_traits is None else list(c.averaged_traits),
        "per_platform": {k: platform_profile_to_record(v) for k, v in c.per_platform.items()},
    }


def cross_profile_from_record(r: dict) -> CrossPlatformProfile:
    avg = r.get("averaged_traits")
    return CrossPlatformProfile(
        user=r["user"],
        per_platform={k: platform_profile_from_record(v) for k, v in r["per_platform"].items()},
        averaged_traits=None if avg is None else tuple(avg),
    )


def dumps_profiles(
    profiles: Sequence[PlatformProfile] | Sequence[CrossPlatformProfile], run_id: str | None = None
) -> str:
    kinds = {type(p) for p in profiles}
    if len(kinds) > 1:
        raise DataError("cannot mix platform and cross-platform profiles in one file")
    cross = kinds == {CrossPlatformProfile}
    header = {
        "schema_version": SCHEMA_VERSION,
        "record_type": CROSS_PLATFORM_PROFILE if cross else PLATFORM_PROFILE,
        "run_id": run_id,
    }
    conv = cross_profile_to_record if cross else platform_profile_to_record
    lines = [dumps_record(header)] + [dumps_record(conv(p)) for p in profiles]
    return "\n".join(lines) + "\n"


def loads_profiles(text: str, source: str = "<profiles>") -> list:
    records = _iter_jsonl(text, source)
    try:
        _, header = next(records)
    except StopIteration:
        raise DataError(f"{source}: empty profile file (no header)") from None
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{source}: schema_version {version!r} is not supported (expected {SCHEMA_VERSION})"
        )
    kind = header.get("record_type")
    if kind == PLATFORM_PROFILE:
        conv = platform_profile_from_record
    elif kind == CROSS_PLATFORM_PROFILE:
        conv = cross_profile_from_record
    else:
        raise DataError(f"{source}: unknown record_type {kind!r}")
    out = []
    for lineno, rec in records:
        try:
            out.append(conv(rec))
        except (KeyError, TypeError) as exc:
            raise DataError(f"{source}:{lineno}: malformed profile record ({exc})") from exc
    return out


def persist_profiles(path: str | Path, profiles: Sequence, run_id: str | None = None) -> None:
    write_text(path, dumps_profiles(profiles, run_id))


def load_profiles(path: str | Path) -> list:
    return loads_profiles(_read(path), str(path))


def profiles_run_id(path: str | Path) -> str | None:
    with open(path, encoding="utf-8") as fh:
        return json.loads(fh.readline()).get("run_id")


# -- run manifest ------------------------------------------------------------

def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: Mapping[str, Any]
    input_digests: Mapping[str, str]
    tool_version: str = __version__
    run_id: str = field(default="")

    def __post_init__(self) -> None:
        if not self.run_id:
            # locations, worker count and cache mode do not change results
            cfg = {k: v for k, v in self.config.items() if k not in ("paths", "workers")}
            if isinstance(cfg.get("providers"), Mapping):
                cfg["providers"] = {k: v for k, v in cfg["providers"].items() if k != "mode"}
            basis = dumps_record(
                {"command": self.command, "config": cfg, "inputs": self.input_digests,
                 "version": self.tool_version}
            )
            object.__setattr__(self, "run_id", hashlib.sha256(basis.encode()).hexdigest()[:16])

    def write(self, path: str | Path) -> None:
        write_text(path, json.dumps(asdict(self), sort_keys=True, indent=2, ensure_ascii=False) + "\n")
