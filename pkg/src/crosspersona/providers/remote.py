"""Plain-HTTP provider clients with configurable wire formats.

Each endpoint is described by a URL, header and body templates, and a small
path expression locating the answer in the JSON reply, so API drift is a
config change. ``${NAME}`` in the URL or headers is replaced from the
environment at request time and never persisted or logged. ``{text}``,
``{prompt}`` and ``{trait}`` placeholders in the body are filled per request.
"""

from __future__ import annotations

import copy
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import httpx

from ..domain import OFFENSE_ATTRIBUTES, CategoryPath
from ..errors import ConfigError, ProviderError
from .base import TokenBucket, check_offense_map, trait_name, with_retries

log = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "Below are recent social media posts written by one person. Rate how strongly the "
    "author displays the Big Five personality trait '{trait}' on a scale from 1 (very low) "
    "to 5 (very high). Reply with a single number only.\n\nPosts:\n{text}"
)

_ENV = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")
_PATH_TOKEN = re.compile(r"([^.\[\]]+)|\[(\d+)\]")


def parse_first_number(reply: str) -> float:
    """First number in an LLM reply: ``"Score: 4.5/5"`` -> 4.5."""
    m = _NUMBER.search(reply)
    if m is None:
        raise ProviderError(f"no number in reply {reply[:80]!r}")
    return float(m.group())


def extract(payload: Any, path: str) -> Any:
    """Resolve a dotted path with list indices, e.g. ``choices[0].message.content``."""
    cur = payload
    for key, index in _PATH_TOKEN.findall(path):
        try:
            cur = cur[int(index)] if index else cur[key]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"response has no element at {path!r}") from exc
    return cur


def _expand_env(s: str) -> str:
    def sub(m: re.Match) -> str:
        val = os.environ.get(m.group(1))
        if val is None:
            raise ConfigError(f"environment variable {m.group(1)} is not set")
        return val

    return _ENV.sub(sub, s)


def _fill(template: Any, values: dict[str, str]) -> Any:
    if isinstance(template, str):
        out = template
        for k, v in values.items():
            out = out.replace("{" + k + "}", v)
        return out
    if isinstance(template, dict):
        return {k: _fill(v, values) for k, v in template.items()}
    if isinstance(template, list):
        return [_fill(v, values) for v in template]
    return copy.deepcopy(template)


@dataclass
class Endpoint:
    url: str
    body: dict = field(default_factory=dict)
    headers: dict[str, str] = field(default_factory=dict)
    response_path: str = ""
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 0.5
    rate_per_sec: float | None = None
    max_in_flight: int = 4

    @classmethod
    def from_dict(cls, d: dict) -> "Endpoint":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown endpoint keys {sorted(unknown)}")
        if "url" not in d:
            raise ConfigError("endpoint config needs a url")
        return cls(**d)


class _HttpProvider:
    def __init__(self, endpoint: Endpoint, client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoint = endpoint
        self.max_in_flight = endpoint.max_in_flight
        self._client = client or httpx.Client(timeout=endpoint.timeout)
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(endpoint.max_in_flight)
        self._bucket = TokenBucket(endpoint.rate_per_sec, sleep=sleep) if endpoint.rate_per_sec else None

    def _post_once(self, body: dict) -> Any:
        ep = self.endpoint
        if self._bucket is not None:
            self._bucket.acquire()
        headers = {k: _expand_env(v) for k, v in ep.headers.items()}
        with self._slots:
            try:
                resp = self._client.post(_expand_env(ep.url), json=body, headers=headers)
            except httpx.HTTPError as exc:
                raise ProviderError(f"transport error: {type(exc).__name__}") from exc
        if resp.status_code >= 400:
            raise ProviderError(f"HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderError("reply is not JSON") from exc

    def _call(self, body: dict, parse: Callable[[Any], Any], what: str) -> Any:
        return with_retries(
            lambda: parse(self._post_once(body)),
            retries=self.endpoint.retries,
            backoff=self.endpoint.backoff,
            sleep=self._sleep,
            what=what,
        )

    def close(self) -> None:
        self._client.close()


class RemotePersonalityProvider(_HttpProvider):
    """Chat-completion style LLM scorer; defaults target an OpenAI-compatible API."""

    def __init__(self, endpoint: Endpoint, client: httpx.Client | None = None,
                 prompt_template: str = PROMPT_TEMPLATE, **kw):
        if not endpoint.body:
            endpoint.body = {"messages": [{"role": "user", "content": "{prompt}"}], "temperature": 1.0}
        if not endpoint.response_path:
            endpoint.response_path = "choices[0].message.content"
        super().__init__(endpoint, client, **kw)
        self.prompt_template = prompt_template

    def personality_score(self, text: str, trait_index: int, run_index: int) -> float:
        trait = trait_name(trait_index)
        prompt = self.prompt_template.replace("{trait}", trait).replace("{text}", text)
        body = _fill(self.endpoint.body, {"prompt": prompt, "text": text, "trait": trait})

        def parse(payload: Any) -> float:
            return parse_first_number(str(extract(payload, self.endpoint.response_path)))

        return self._call(body, parse, f"personality trait {trait_index} run {run_index}")


class RemoteContentClassifier(_HttpProvider):
    """Content-category classifier; defaults follow a ``classifyText``-shaped reply."""

    def __init__(self, endpoint: Endpoint, client: httpx.Client | None = None,
                 name_field: str = "name", confidence_field: str = "confidence", **kw):
        if not endpoint.body:
            endpoint.body = {"document": {"type": "PLAIN_TEXT", "content": "{text}"}}
        if not endpoint.response_path:
            endpoint.response_path = "categories"
        super().__init__(endpoint, client, **kw)
        self.name_field = name_field
        self.confidence_field = confidence_field

    def classify_content(self, text: str) -> list[CategoryPath]:
        body = _fill(self.endpoint.body, {"text": text})

        def parse(payload: Any) -> list[CategoryPath]:
            items = extract(payload, self.endpoint.response_path) if self.endpoint.response_path else payload
            if items is None:
                return []
            try:
                return [
                    CategoryPath.parse(it[self.name_field], float(it.get(self.confidence_field, 1.0)))
                    for it in items
                ]
            except (KeyError, TypeError, AttributeError) as exc:
                raise ProviderError("malformed category list in reply") from exc

        return self._call(body, parse, "content classification")


PERSPECTIVE_PATHS = {a: f"attributeScores.{a.upper()}.summaryScore.value" for a in OFFENSE_ATTRIBUTES}


class RemoteOffenseScorer(_HttpProvider):
    """Toxicity scorer; defaults follow the Perspective ``comments:analyze`` wire format."""

    def __init__(self, endpoint: Endpoint, client: httpx.Client | None = None,
                 attribute_paths: dict[str, str] | None = None, max_chars: int = 20000, **kw):
        if not endpoint.body:
            endpoint.body = {
                "comment": {"text": "{text}"},
                "requestedAttributes": {a.upper(): {} for a in OFFENSE_ATTRIBUTES},
            }
        super().__init__(endpoint, client, **kw)
        self.attribute_paths = attribute_paths or dict(PERSPECTIVE_PATHS)
        self.max_chars = max_chars

    def score_offense(self, text: str) -> dict[str, float]:
        body = _fill(self.endpoint.body, {"text": text})

        def parse(payload: Any) -> dict[str, float]:
            return check_offense_map(
                {a: extract(payload, p) for a, p in self.attribute_paths.items()}, OFFENSE_ATTRIBUTES
            )

        return self._call(body, parse, "offense scoring")
