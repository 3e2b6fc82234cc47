"""Provider-agnostic gateway to chat-completion LLMs.

Three modes:
  live    — HTTP calls (OpenAI-style chat completions) with retries and
            bounded concurrency; requires the API key env var.
  record  — live, plus every response persisted as a content-addressed
            fixture file.
  replay  — fixture lookup only; fully offline and deterministic, which is
            what every test and every reproducible evaluation run uses.

The cache key is a SHA-256 over the canonical serialization of the request
(model id, prompt, temperature, max tokens), so identical requests are
deduplicated in memory, on disk, and across runs. Temperature is pinned to 0
for every request; raising it is not supported.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .prompts import TEMPLATES, PromptTemplate

API_KEY_ENV = "QUDEVAL_LLM_API_KEY"

_SLOT_RE = re.compile(r"\{\{([a-z_]+)\}\}")


class PromptError(ValueError):
    pass


class MissingSlot(PromptError):
    pass


class UnknownTemplate(PromptError):
    pass


class ProviderError(RuntimeError):
    pass


class RateLimited(ProviderError):
    pass


class FixtureMiss(ProviderError):
    def __init__(self, cache_key: str):
        super().__init__(f"no replay fixture for cache key {cache_key}")
        self.cache_key = cache_key


class UnparseableResponse(ValueError):
    pass


class NonNumericResponse(UnparseableResponse):
    pass


def render_prompt(template_id: str, slots: dict[str, str]) -> str:
    """Byte-exact slot substitution; every required slot must be supplied and
    no unresolved placeholder may remain."""
    template = TEMPLATES.get(template_id)
    if template is None:
        raise UnknownTemplate(template_id)
    missing = template.required_slots - set(slots)
    if missing:
        raise MissingSlot(f"template {template_id} missing slots: {sorted(missing)}")

    def sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in slots:
            raise MissingSlot(f"template {template_id} missing slot {name!r}")
        return str(slots[name])

    rendered = _SLOT_RE.sub(sub, template.body)
    if _SLOT_RE.search(rendered):
        raise PromptError(f"unresolved placeholder after rendering {template_id}")
    return rendered


@dataclass(frozen=True)
class LlmRequest:
    model: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self):
        if self.temperature != 0.0:
            raise ValueError("temperature is fixed at 0")

    def canonical(self) -> str:
        return json.dumps(
            {
                "max_tokens": self.max_tokens,
                "model": self.model,
                "prompt": self.prompt,
                "temperature": self.temperature,
            },
            ensure_ascii=False,
            sort_keys=True,
            separators=(",", ":"),
        )

    def cache_key(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LlmResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_s: float = 0.0
    cached: bool = False


@dataclass
class GatewayConfig:
    mode: str = "replay"  # live | record | replay
    model: str = "gpt-4"
    base_url: str = "https://api.openai.com/v1"
    fixture_dir: Optional[Path] = None
    max_inflight: int = 4
    max_retries: int = 3
    timeout_s: float = 60.0

    @classmethod
    def from_file(cls, path: Path | str) -> "GatewayConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = cls()
        for key in ("mode", "model", "base_url", "max_inflight", "max_retries", "timeout_s"):
            if key in raw:
                setattr(cfg, key, raw[key])
        if raw.get("fixture_dir"):
            cfg.fixture_dir = Path(raw["fixture_dir"])
        return cfg


class LlmGateway:
    """Thread-safe completion client with fixture-backed caching."""

    def __init__(self, config: GatewayConfig):
        if config.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown mode {config.mode!r}")
        if config.mode in ("replay", "record") and config.fixture_dir is None:
            raise ValueError(f"{config.mode} mode requires a fixture directory")
        self.config = config
        self._memory: dict[str, LlmResponse] = {}
        self._lock = threading.Lock()
        self._inflight: dict[str, threading.Event] = {}
        self._sem = threading.BoundedSemaphore(config.max_inflight)
        self.requests_sent = 0  # live HTTP calls actually made

    # -- fixture store --

    def _fixture_path(self, key: str) -> Path:
        assert self.config.fixture_dir is not None
        return Path(self.config.fixture_dir) / key[:2] / f"{key}.json"

    def _read_fixture(self, key: str) -> Optional[LlmResponse]:
        path = self._fixture_path(key)
        if not path.exists():
            return None
        raw = json.loads(path.read_text(encoding="utf-8"))
        resp = raw["response"]
        return LlmResponse(
            text=resp["text"],
            prompt_tokens=resp.get("prompt_tokens", 0),
            completion_tokens=resp.get("completion_tokens", 0),
            latency_s=0.0,
            cached=True,
        )

    def _write_fixture(self, key: str, request: LlmRequest, response: LlmResponse) -> None:
        path = self._fixture_path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "cache_key": key,
            "request": {
                "model": request.model,
                "prompt": request.prompt,
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            },
            "response": {
                "text": response.text,
                "prompt_tokens": response.prompt_tokens,
                "completion_tokens": response.completion_tokens,
            },
        }
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        tmp.replace(path)

    # -- completion --

    def complete(self, request: LlmRequest) -> LlmResponse:
        key = request.cache_key()
        with self._lock:
            if key in self._memory:
                resp = self._memory[key]
                return LlmResponse(resp.text, resp.prompt_tokens, resp.completion_tokens, 0.0, True)
            pending = self._inflight.get(key)
            if pending is None:
                self._inflight[key] = threading.Event()
            # else: another thread is fetching this exact request
        if pending is not None:
            pending.wait()
            with self._lock:
                resp = self._memory.get(key)
            if resp is None:
                raise ProviderError(f"deduplicated request {key} failed in peer thread")
            return LlmResponse(resp.text, resp.prompt_tokens, resp.completion_tokens, 0.0, True)

        try:
            response = self._complete_uncached(request, key)
            with self._lock:
                self._memory[key] = response
            return response
        finally:
            with self._lock:
                self._inflight.pop(key).set()

    def _complete_uncached(self, request: LlmRequest, key: str) -> LlmResponse:
        if self.config.mode == "replay":
            fixture = self._read_fixture(key)
            if fixture is None:
                raise FixtureMiss(key)
            return fixture
        if self.config.mode == "record":
            fixture = self._read_fixture(key)
            if fixture is not None:
                return fixture
        response = self._live(request)
        if self.config.mode == "record":
            self._write_fixture(key, request, response)
        return response

    def _live(self, request: LlmRequest) -> LlmResponse:
        import httpx

        api_key = os.environ.get(API_KEY_ENV)
        if not api_key:
            raise ProviderError(f"live mode requires the {API_KEY_ENV} env var")
        payload = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        last_error: Optional[Exception] = None
        rate_limited = False
        for attempt in range(self.config.max_retries):
            if attempt:
                time.sleep(min(2.0 ** attempt, 8.0))
            try:
                with self._sem:
                    started = time.monotonic()
                    with httpx.Client(timeout=self.config.timeout_s) as client:
                        resp = client.post(
                            f"{self.config.base_url.rstrip('/')}/chat/completions",
                            headers={"Authorization": f"Bearer {api_key}"},
                            json=payload,
                        )
                    elapsed = time.monotonic() - started
                self.requests_sent += 1
                if resp.status_code == 429:
                    rate_limited = True
                    last_error = RateLimited("provider returned 429")
                    continue
                resp.raise_for_status()
                body = resp.json()
                usage = body.get("usage", {})
                return LlmResponse(
                    text=body["choices"][0]["message"]["content"],
                    prompt_tokens=usage.get("prompt_tokens", 0),
                    completion_tokens=usage.get("completion_tokens", 0),
                    latency_s=elapsed,
                    cached=False,
                )
            except RateLimited:
                continue
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_error = exc
        if rate_limited:
            raise RateLimited(f"rate limited after {self.config.max_retries} attempts")
        raise ProviderError(f"provider failed after {self.config.max_retries} attempts: {last_error}")

    def request_for(self, prompt: str, max_tokens: int = 512) -> LlmRequest:
        return LlmRequest(model=self.config.model, prompt=prompt, max_tokens=max_tokens)


def record_fixture(fixture_dir: Path | str, request: LlmRequest, text: str) -> str:
    """Persist a canned response for the given request; returns the cache key.

    This is how offline fixture sets are assembled without touching a
    provider: compute the key the gateway would use and drop the response in
    the content-addressed layout.
    """
    gateway = LlmGateway(GatewayConfig(mode="replay", fixture_dir=Path(fixture_dir)))
    key = request.cache_key()
    gateway._write_fixture(key, request, LlmResponse(text=text))
    return key


# --- response parsing ---------------------------------------------------------

_BRACKET_OPTION_RE = re.compile(r"\[\s*(\d+)\s*:")
_LEADING_NUMBER_RE = re.compile(r"^\s*\(?(\d+)[.):\s]")
_ANY_INT_RE = re.compile(r"\d+")


def parse_option(text: str, options: Sequence[str]) -> str:
    """Map a judge response onto one of the option labels.

    Rules, first hit wins: the "[n: ...]" format, a bare leading option
    number, a unique option-name substring, and finally a lenient scan that
    accepts the response if exactly one valid option number occurs anywhere
    ("I think option 2 fits best").
    """
    if not options:
        raise ValueError("empty option set")
    n = len(options)

    match = _BRACKET_OPTION_RE.search(text)
    if match and 1 <= int(match.group(1)) <= n:
        return options[int(match.group(1)) - 1]

    match = _LEADING_NUMBER_RE.match(text + " ")
    if match and 1 <= int(match.group(1)) <= n:
        return options[int(match.group(1)) - 1]

    lowered = text.lower()
    hits = [i for i, option in enumerate(options) if option.lower() in lowered]
    if len(hits) == 1:
        return options[hits[0]]

    numbers = {int(m) for m in _ANY_INT_RE.findall(text) if 1 <= int(m) <= n}
    if len(numbers) == 1:
        return options[numbers.pop() - 1]

    raise UnparseableResponse(f"no option rule fired on {text!r}")


_NUMBER_TOKEN_RE = re.compile(r"-?\d+(?:\.\d+)?")


def parse_score(text: str, lo: float, hi: float) -> float:
    """First number in the response, clamped into [lo, hi] with a warning flag
    via ValueError-free clamping. Raises NonNumericResponse when no number."""
    match = _NUMBER_TOKEN_RE.search(text)
    if not match:
        raise NonNumericResponse(f"no number in {text!r}")
    value = float(match.group(0))
    return min(max(value, lo), hi)
