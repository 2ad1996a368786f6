"""Single doorway to the completion model, with record/replay fixtures.

Every model call in the system goes through ``GenAiGateway``. Three modes:

* ``live``    - POST to the configured endpoint, nothing touches disk.
* ``record``  - live call, then persist the response keyed by a fingerprint
                of the request so later runs can replay it.
* ``replay``  - no network at all; a missing fixture is an error, not a
                fallback to live.

The fingerprint covers exactly what determines a response: the purpose tag,
system prompt, user prompt, and any corrective turns appended by the
structured-output retry loop. Two requests with the same fingerprint are the
same request.

``complete_structured`` wraps ``complete`` with a parse-and-retry loop: each
failed parse appends a corrective user turn quoting the failure reason, and
the loop gives up after ``max_attempts`` with every reason preserved.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

from .errors import (
    ConfigInvalid,
    FixtureMissing,
    InvariantViolation,
    ParseFailure,
    ProviderUnavailable,
    StructuredOutputExhausted,
)
from .jsontext import canonical_json

PURPOSE_TAGS = (
    "phase_generation",
    "phase_refinement",
    "layout_generation",
    "focus_tool_generation",
    "utterance_classification",
)

# On-disk layout: one subdirectory per purpose tag.
FIXTURE_SUBDIRS = {
    "phase_generation": "phase_generation",
    "phase_refinement": "phase_refinement",
    "layout_generation": "layouts",
    "focus_tool_generation": "focus_tool",
    "utterance_classification": "utterance_classification",
}

PROVIDER_MODES = ("live", "replay", "record")

MAX_ATTEMPT_LIMIT = 5


def correction_for(reason: str) -> str:
    """The corrective user turn sent after an invalid structured response."""
    return (
        f"Your previous response was invalid: {reason}. "
        "Respond again following the required format exactly."
    )


@dataclass(frozen=True)
class PromptRequest:
    purpose_tag: str
    system_prompt: str
    user_prompt: str
    corrections: tuple[str, ...] = ()
    max_attempts: int = 3

    def __post_init__(self):
        if self.purpose_tag not in PURPOSE_TAGS:
            raise InvariantViolation(f"unknown purpose tag {self.purpose_tag!r}")
        if not isinstance(self.max_attempts, int) or not 1 <= self.max_attempts <= MAX_ATTEMPT_LIMIT:
            raise InvariantViolation(
                f"max_attempts must be in 1..{MAX_ATTEMPT_LIMIT}, got {self.max_attempts!r}"
            )
        object.__setattr__(self, "corrections", tuple(self.corrections))

    def with_correction(self, text: str) -> "PromptRequest":
        return replace(self, corrections=self.corrections + (text,))

    def fingerprint(self) -> str:
        payload = canonical_json(
            {
                "purpose": self.purpose_tag,
                "system": self.system_prompt,
                "user": self.user_prompt,
                "corrections": list(self.corrections),
            }
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def messages(self) -> list[dict[str, str]]:
        """Chat-shaped message list for the transport."""
        out = [
            {"role": "system", "content": self.system_prompt},
            {"role": "user", "content": self.user_prompt},
        ]
        for turn in self.corrections:
            out.append({"role": "user", "content": turn})
        return out


@dataclass(frozen=True)
class CompletionResult:
    text: str
    attempt_count: int
    provider_id: str
    latency_ms: float


@dataclass(frozen=True)
class StructuredCompletion:
    """Outcome of the parse-and-retry loop."""

    value: Any
    attempt_count: int
    request: PromptRequest  # final request, corrective turns included
    raw_text: str


@dataclass(frozen=True)
class ProviderConfig:
    mode: str
    fixture_dir: str | Path = "fixtures"
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env_var: str = ""
    temperature: float | None = None

    def __post_init__(self):
        if self.mode not in PROVIDER_MODES:
            raise ConfigInvalid(f"provider mode must be one of {PROVIDER_MODES}, got {self.mode!r}")
        if self.mode in ("live", "record"):
            if not self.endpoint_url:
                raise ConfigInvalid(f"{self.mode} mode requires endpoint_url")
            if not self.api_key_env_var:
                raise ConfigInvalid(f"{self.mode} mode requires api_key_env_var")


Transport = Callable[[PromptRequest, ProviderConfig], str]


def http_transport(request: PromptRequest, config: ProviderConfig, *, _client=None) -> str:
    """Default chat-completions transport over HTTP. Raises ProviderUnavailable."""
    import httpx

    key = os.environ.get(config.api_key_env_var, "")
    if not key:
        raise ProviderUnavailable(
            f"environment variable {config.api_key_env_var} is not set"
        )
    body: dict[str, Any] = {
        "model": config.model_name,
        "messages": request.messages(),
    }
    if config.temperature is not None:
        body["temperature"] = config.temperature

    last_error: Exception | None = None
    for _ in range(3):
        try:
            client = _client or httpx.Client(timeout=60.0)
            try:
                response = client.post(
                    config.endpoint_url,
                    json=body,
                    headers={"Authorization": f"Bearer {key}"},
                )
            finally:
                if _client is None:
                    client.close()
            if response.status_code >= 400:
                raise ProviderUnavailable(
                    f"provider returned HTTP {response.status_code}"
                )
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except ProviderUnavailable:
            raise
        except (httpx.TransportError, KeyError, ValueError) as exc:
            last_error = exc
    raise ProviderUnavailable(f"provider unreachable after retries: {last_error}")


class GenAiGateway:
    """Mode-aware completion client. The only network-facing code in the package."""

    def __init__(self, config: ProviderConfig, transport: Transport | None = None):
        self.config = config
        self._transport = transport or http_transport
        if config.mode == "replay":
            self._fixture_root = Path(config.fixture_dir)
            if not self._fixture_root.is_dir():
                raise ConfigInvalid(f"fixture directory {self._fixture_root} does not exist")
        else:
            self._fixture_root = Path(config.fixture_dir)

    # -- fixture plumbing ---------------------------------------------------

    def fixture_path(self, request: PromptRequest) -> Path:
        subdir = FIXTURE_SUBDIRS[request.purpose_tag]
        return self._fixture_root / subdir / f"{request.fingerprint()}.json"

    def _read_fixture(self, request: PromptRequest) -> str:
        path = self.fixture_path(request)
        if not path.is_file():
            raise FixtureMissing(request.fingerprint(), path=path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return data["response"]["text"]

    def _write_fixture(self, request: PromptRequest, text: str) -> None:
        path = self.fixture_path(request)
        path.parent.mkdir(parents=True, exist_ok=True)
        record = {
            "fingerprint": request.fingerprint(),
            "request": {
                "purpose_tag": request.purpose_tag,
                "system_prompt": request.system_prompt,
                "user_prompt": request.user_prompt,
                "corrections": list(request.corrections),
            },
            "response": {"text": text},
            "meta": {
                "model_name": self.config.model_name,
                "temperature": self.config.temperature,
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")

    # -- completion ----------------------------------------------------------

    def complete(self, request: PromptRequest) -> CompletionResult:
        if self.config.mode == "replay":
            text = self._read_fixture(request)
            return CompletionResult(
                text=text, attempt_count=1, provider_id="fixture", latency_ms=0.0
            )

        started = time.monotonic()
        text = self._transport(request, self.config)
        elapsed_ms = (time.monotonic() - started) * 1000.0

        if self.config.mode == "record":
            self._write_fixture(request, text)

        return CompletionResult(
            text=text,
            attempt_count=1,
            provider_id=self.config.model_name or "live",
            latency_ms=elapsed_ms,
        )

    def complete_structured(self, request: PromptRequest, parser: Callable[[str], Any]) -> StructuredCompletion:
        """Run ``complete`` until ``parser`` accepts the text.

        Each parse failure appends a corrective turn and retries; after
        ``max_attempts`` failures the collected reasons are raised together.
        """
        current = request
        reasons: list[str] = []
        last_failure: ParseFailure | None = None
        for attempt in range(1, request.max_attempts + 1):
            result = self.complete(current)
            try:
                value = parser(result.text)
            except ParseFailure as failure:
                reasons.append(failure.reason)
                last_failure = failure
                current = current.with_correction(correction_for(failure.reason))
                continue
            return StructuredCompletion(
                value=value,
                attempt_count=attempt,
                request=current,
                raw_text=result.text,
            )
        raise StructuredOutputExhausted(reasons, last_failure=last_failure)
