"""Generation backends: remote chat API, scripted replay, and gold oracle.

Every backend maps a rendered prompt to raw text. The scripted and oracle
variants are pure functions of their configuration, which makes whole
pipeline runs reproducible byte-for-byte.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

import requests

from .errors import ConfigError, OracleMissError, ScriptMissError, TransportError

logger = logging.getLogger(__name__)

API_KEY_ENV = "STRUCTREASON_API_KEY"


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    stage_tag: str
    max_output_chars: int = 4000
    temperature: float = 0.0

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.max_output_chars <= 0:
            raise ValueError("max_output_chars must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


class Backend(Protocol):
    """Anything that can answer a generation request with raw text."""

    name: str
    deterministic: bool

    def complete(self, request: GenerationRequest) -> str: ...


def script_key(stage_tag: str, prompt: str) -> str:
    """Replay key: stage tag plus SHA-256 of the prompt bytes."""
    digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
    return f"{stage_tag}:{digest}"


class ScriptedBackend:
    """Replays recorded responses keyed by stage tag + prompt hash."""

    deterministic = True

    def __init__(self, script: dict[str, str], name: str = "scripted"):
        self.name = name
        self._script = dict(script)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        import json

        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read script file {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"script file {path} must be a JSON object")
        return cls({str(k): str(v) for k, v in doc.items()}, name=f"scripted:{Path(path).name}")

    @classmethod
    def from_steps(cls, steps: Iterable[tuple[str, str, str]]) -> "ScriptedBackend":
        """Build from (stage_tag, prompt, response) triples, e.g. trace steps."""
        script = {script_key(tag, prompt): response for tag, prompt, response in steps}
        return cls(script)

    def complete(self, request: GenerationRequest) -> str:
        key = script_key(request.stage_tag, request.prompt)
        if key not in self._script:
            raise ScriptMissError(request.stage_tag)
        return self._script[key]


class GoldOracleBackend:
    """Answers every prompt with the dataset's gold decision for that stage.

    Stages backed by a list of lists are consumed one sub-list per call
    (multi-hop stages); stages backed by a flat list answer the same joined
    text on every call. Used to test orchestration independent of any model.
    """

    deterministic = True
    name = "gold-oracle"

    # joiner per stage: selections are comma-joined so exact token matching
    # fires; triple strings contain commas, so they are semicolon-joined and
    # matched by containment; answers are newline-joined.
    _JOINERS = {
        "triple-select": "; ",
        "answer-generate": "\n",
        "fact-verify": "\n",
    }

    def __init__(self, stage_plans: dict[str, object]):
        self._plans = stage_plans
        self._cursors: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_gold(
        cls,
        intermediates: dict | None,
        gold_answers: list[str] | None = None,
        gold_sql: str | None = None,
    ) -> "GoldOracleBackend":
        plans: dict[str, object] = dict(intermediates or {})
        if gold_answers is not None:
            plans.setdefault("answer-generate", list(gold_answers))
            plans.setdefault("fact-verify", list(gold_answers))
        if gold_sql is not None:
            plans.setdefault("sql-generate", gold_sql)
        return cls(plans)

    def _join(self, stage: str, items: list) -> str:
        return self._JOINERS.get(stage, ", ").join(str(i) for i in items)

    def complete(self, request: GenerationRequest) -> str:
        # strip the per-call ordinal ("relation-select#2"): gold plans are
        # keyed by stage and consumed in call order
        stage = request.stage_tag.split("#", 1)[0]
        if stage not in self._plans:
            raise OracleMissError(stage)
        plan = self._plans[stage]
        if isinstance(plan, str):
            return plan
        if isinstance(plan, list) and plan and isinstance(plan[0], list):
            with self._lock:
                i = self._cursors.get(stage, 0)
                self._cursors[stage] = i + 1
            if i >= len(plan):
                raise OracleMissError(stage)
            return self._join(stage, plan[i])
        if isinstance(plan, list):
            if plan and isinstance(plan[0], str) and stage == "sufficiency":
                # sufficiency verdicts are consumed one per hop
                with self._lock:
                    i = self._cursors.get(stage, 0)
                    self._cursors[stage] = i + 1
                if i >= len(plan):
                    raise OracleMissError(stage)
                return str(plan[i])
            return self._join(stage, plan)
        raise OracleMissError(stage)


class RemoteChatBackend:
    """Chat-completion wire client with bounded retries and backoff.

    Request: POST {model, messages, temperature, max_tokens}; the reply text
    is read from choices[0].message.content. The API key comes from the
    STRUCTREASON_API_KEY environment variable only.
    """

    deterministic = False

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        max_in_flight: int = 4,
        session: requests.Session | None = None,
    ):
        api_key = os.environ.get(API_KEY_ENV, "").strip()
        if not api_key:
            raise ConfigError(f"missing required environment variable {API_KEY_ENV}")
        if not endpoint or not model:
            raise ConfigError("remote backend needs an endpoint URL and a model name")
        self.name = f"remote:{model}"
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._api_key = api_key
        self._session = session or requests.Session()
        self._slots = threading.Semaphore(max_in_flight)

    def complete(self, request: GenerationRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": max(1, request.max_output_chars // 4),
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff * (2 ** (attempt - 1))
                logger.info(
                    "retrying %s (attempt %d/%d) after %.2fs: %s",
                    request.stage_tag, attempt, self.max_retries, delay, last_error,
                )
                time.sleep(delay)
            try:
                with self._slots:
                    resp = self._session.post(
                        self.endpoint, json=payload, headers=headers, timeout=self.timeout
                    )
                if resp.status_code in (429,) or resp.status_code >= 500:
                    last_error = TransportError(
                        f"HTTP {resp.status_code} from {self.endpoint}", attempts=attempt + 1
                    )
                    continue
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                continue
        raise TransportError(
            f"request for stage {request.stage_tag!r} failed after "
            f"{self.max_retries + 1} attempts: {last_error}",
            attempts=self.max_retries + 1,
        )
