"""Phase tracking: where is the conversation, and where may it go next.

Every utterance gets a verdict from one of three classifiers:

* ``llm``              - one structured model call per utterance;
* ``keyword_fallback`` - token overlap against each phase's title,
                         description, and behavior lists; used directly in
                         fallback mode and automatically when the model is
                         unavailable;
* ``scripted``         - replays a pre-authored verdict list (simulation).

A verdict that points away from the current phase becomes a transition
candidate only if the move is legal. Directional phases are one-way: once
the meeting has visited a directional phase, no directional phase at or
before it can be entered again. Iterative phases can always be revisited.
Aborted targets cool down for a while (wall time or utterance count,
whichever elapses first) before they can be proposed again.

The tracker itself never moves the meeting; committing a transition is the
controller's job.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol, Sequence

from .errors import (
    InvariantViolation,
    ParseFailure,
    ProviderFailure,
    ScriptExhausted,
)
from .gateway import GenAiGateway, PromptRequest
from .jsontext import extract_first_json
from .model import PhasePlan
from .prompts import PromptLibrary

CLASSIFIER_LLM = "llm"
CLASSIFIER_KEYWORD = "keyword_fallback"
CLASSIFIER_SCRIPTED = "scripted"

DIRECTIONAL_BLOCK_REASON = "directional phase cannot be returned to"

# Small, purpose-built stopword list: glue words that would otherwise let
# "the", "and" or "let's" decide a phase.
STOPWORDS = frozenset(
    """
    a an the and or but to of in on for with about into onto from by at as is
    are was were be been being am it its it's this that these those we our us
    i you your he she they them his her their what which who whom when where
    why how not no yes do does did done can could should would will shall may
    might must have has had having if then else so just very really quite too
    also up down out over under again once here there all any both each few
    more most other some such only own same than s t ll re ve d m don let
    lets get got
    """.split()
)

_WORD_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> frozenset[str]:
    """Case-folded word set with stopwords removed."""
    return frozenset(w for w in _WORD_RE.findall(text.casefold()) if w not in STOPWORDS)


def phase_tokens(phase) -> frozenset[str]:
    parts = [phase.title, phase.description, *phase.encouraged, *phase.discouraged]
    return tokenize(" ".join(parts))


@dataclass(frozen=True)
class Utterance:
    speaker_id: str
    at: float
    text: str

    def __post_init__(self):
        if not self.speaker_id or not self.speaker_id.strip():
            raise InvariantViolation("utterance speaker must be non-empty")
        if not self.text or not self.text.strip():
            raise InvariantViolation("utterance text must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"speaker_id": self.speaker_id, "at": self.at, "text": self.text}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Utterance":
        return cls(speaker_id=data["speaker_id"], at=data["at"], text=data["text"])


@dataclass(frozen=True)
class ClassifierVerdict:
    predicted_phase_index: int
    confidence: float
    classifier_id: str

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InvariantViolation("confidence must be within [0, 1]")
        if self.classifier_id not in (CLASSIFIER_LLM, CLASSIFIER_KEYWORD, CLASSIFIER_SCRIPTED):
            raise InvariantViolation(f"unknown classifier id {self.classifier_id!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicted_phase_index": self.predicted_phase_index,
            "confidence": self.confidence,
            "classifier_id": self.classifier_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ClassifierVerdict":
        return cls(
            predicted_phase_index=data["predicted_phase_index"],
            confidence=data["confidence"],
            classifier_id=data["classifier_id"],
        )


@dataclass(frozen=True)
class Cooldown:
    """An abort penalty on one phase: blocked until a time or a count."""

    until_time: float
    until_count: int

    def to_dict(self) -> dict[str, Any]:
        return {"until_time": self.until_time, "until_count": self.until_count}


@dataclass
class TrackerState:
    """Mutable per-session tracking state.

    ``visited`` only ever grows; ``current_phase_index`` changes only when
    the controller commits a proposal. ``utterance_count`` feeds the
    count-based half of cooldown expiry.
    """

    current_phase_index: int = 0
    visited: set[int] = field(default_factory=lambda: {0})
    cooldowns: dict[int, Cooldown] = field(default_factory=dict)
    utterance_count: int = 0
    last_utterance_at: float | None = None

    def __post_init__(self):
        if self.current_phase_index not in self.visited:
            raise InvariantViolation("current phase must be in the visited set")

    def note_utterance(self, at: float) -> None:
        """Advance the utterance clock; expires due cooldowns."""
        if self.last_utterance_at is not None and at < self.last_utterance_at:
            raise InvariantViolation(
                f"utterance times must be non-decreasing ({at} < {self.last_utterance_at})"
            )
        self.last_utterance_at = at
        self.utterance_count += 1
        expired = [
            idx
            for idx, cd in self.cooldowns.items()
            if at >= cd.until_time or self.utterance_count >= cd.until_count
        ]
        for idx in expired:
            del self.cooldowns[idx]

    def install_cooldown(self, phase_index: int, at: float, seconds: float, utterances: int) -> None:
        self.cooldowns[phase_index] = Cooldown(
            until_time=at + seconds,
            until_count=self.utterance_count + utterances,
        )

    def enter(self, phase_index: int) -> None:
        """Record a committed transition."""
        self.visited.add(phase_index)
        self.current_phase_index = phase_index

    def max_visited_directional(self, plan: PhasePlan) -> int:
        indices = [i for i in self.visited if plan.phases[i].is_directional]
        return max(indices, default=-1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "current_phase_index": self.current_phase_index,
            "visited": sorted(self.visited),
            "cooldowns": {str(i): cd.to_dict() for i, cd in sorted(self.cooldowns.items())},
            "utterance_count": self.utterance_count,
            "last_utterance_at": self.last_utterance_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrackerState":
        state = cls(
            current_phase_index=data["current_phase_index"],
            visited=set(data["visited"]),
            cooldowns={
                int(i): Cooldown(until_time=cd["until_time"], until_count=cd["until_count"])
                for i, cd in data["cooldowns"].items()
            },
            utterance_count=data["utterance_count"],
            last_utterance_at=data["last_utterance_at"],
        )
        return state


@dataclass(frozen=True)
class TransitionDecision:
    allowed: bool
    reason: str | None = None


def validate_transition(state: TrackerState, plan: PhasePlan, target_index: int) -> TransitionDecision:
    """Decide whether moving to ``target_index`` is currently legal."""
    if not 0 <= target_index < len(plan.phases):
        return TransitionDecision(False, f"no phase at index {target_index}")
    if target_index == state.current_phase_index:
        return TransitionDecision(False, "target phase is already the current phase")
    if target_index in state.cooldowns:
        return TransitionDecision(False, "phase is cooling down after an abort")
    target = plan.phases[target_index]
    if target.is_directional and target_index <= state.max_visited_directional(plan):
        return TransitionDecision(False, DIRECTIONAL_BLOCK_REASON)
    return TransitionDecision(True, None)


def observe(state: TrackerState, plan: PhasePlan, verdict: ClassifierVerdict) -> int | None:
    """Turn a verdict into a transition candidate, or nothing.

    A candidate is emitted only when the verdict points away from the
    current phase and the move is legal right now.
    """
    target = verdict.predicted_phase_index
    if target == state.current_phase_index:
        return None
    if not validate_transition(state, plan, target).allowed:
        return None
    return target


# --- classifiers -----------------------------------------------------------------

class Classifier(Protocol):
    def classify(self, utterance: Utterance, plan: PhasePlan, current_index: int) -> ClassifierVerdict:
        ...


class KeywordFallbackClassifier:
    """Token-overlap scoring against each phase's text.

    The winner is the phase sharing the most (non-stopword) tokens with the
    utterance; any tie, including the all-zero case, resolves to the current
    phase. Confidence is the winning overlap as a fraction of the
    utterance's token count.
    """

    def classify(self, utterance: Utterance, plan: PhasePlan, current_index: int) -> ClassifierVerdict:
        tokens = tokenize(utterance.text)
        scores = [len(tokens & phase_tokens(phase)) for phase in plan.phases]
        best = max(scores)
        winners = [i for i, s in enumerate(scores) if s == best]
        if best == 0 or len(winners) > 1:
            chosen = current_index
        else:
            chosen = winners[0]
        confidence = (scores[chosen] / len(tokens)) if tokens else 0.0
        return ClassifierVerdict(
            predicted_phase_index=chosen,
            confidence=min(1.0, confidence),
            classifier_id=CLASSIFIER_KEYWORD,
        )


class ScriptedClassifier:
    """Replays an authored verdict sequence; for simulations and tests."""

    def __init__(self, verdicts: Sequence[int]):
        self._queue = deque(verdicts)

    def classify(self, utterance: Utterance, plan: PhasePlan, current_index: int) -> ClassifierVerdict:
        if not self._queue:
            raise ScriptExhausted("scripted classifier has no verdicts left")
        target = self._queue.popleft()
        if not 0 <= target < len(plan.phases):
            raise InvariantViolation(f"scripted verdict {target} is out of range")
        return ClassifierVerdict(
            predicted_phase_index=target, confidence=1.0, classifier_id=CLASSIFIER_SCRIPTED
        )

    @property
    def remaining(self) -> int:
        return len(self._queue)


def _phase_listing(plan: PhasePlan) -> str:
    lines = []
    for idx, phase in enumerate(plan.phases):
        lines.append(f"{idx}: {phase.title} - {phase.description}")
    return "\n".join(lines)


def parse_phase_index(text: str, phase_count: int) -> int:
    value = extract_first_json(text)
    if not isinstance(value, dict) or "phase_index" not in value:
        raise ParseFailure('response must be an object with "phase_index"', code="bad_type")
    idx = value["phase_index"]
    if isinstance(idx, bool) or not isinstance(idx, (int, float)) or int(idx) != idx:
        raise ParseFailure('"phase_index" must be an integer', code="bad_type")
    idx = int(idx)
    if not 0 <= idx < phase_count:
        raise ParseFailure(
            f'"phase_index" must be in 0..{phase_count - 1}, got {idx}', code="out_of_range"
        )
    return idx


class LlmClassifier:
    """One structured model call per utterance, with keyword fallback.

    When the provider is unavailable (or a replay fixture is missing) the
    keyword classifier answers instead, so a meeting never stalls on a
    classification call.
    """

    def __init__(self, gateway: GenAiGateway, library: PromptLibrary, max_attempts: int = 3):
        self._gateway = gateway
        self._library = library
        self._max_attempts = max_attempts
        self._fallback = KeywordFallbackClassifier()

    def classify(self, utterance: Utterance, plan: PhasePlan, current_index: int) -> ClassifierVerdict:
        system, user = self._library.render(
            "utterance_classification",
            phases=_phase_listing(plan),
            current_index=current_index,
            utterance=utterance.text,
        )
        request = PromptRequest(
            purpose_tag="utterance_classification",
            system_prompt=system,
            user_prompt=user,
            max_attempts=self._max_attempts,
        )
        try:
            done = self._gateway.complete_structured(
                request, lambda text: parse_phase_index(text, len(plan.phases))
            )
        except ProviderFailure:
            return self._fallback.classify(utterance, plan, current_index)
        return ClassifierVerdict(
            predicted_phase_index=done.value, confidence=1.0, classifier_id=CLASSIFIER_LLM
        )


def make_classifier(
    mode: str,
    gateway: GenAiGateway | None = None,
    library: PromptLibrary | None = None,
    scripted_verdicts: Sequence[int] | None = None,
) -> Classifier:
    if mode == CLASSIFIER_KEYWORD:
        return KeywordFallbackClassifier()
    if mode == CLASSIFIER_SCRIPTED:
        return ScriptedClassifier(scripted_verdicts or [])
    if mode == CLASSIFIER_LLM:
        if gateway is None or library is None:
            raise InvariantViolation("llm classifier needs a gateway and prompt library")
        return LlmClassifier(gateway, library)
    raise InvariantViolation(f"unknown classifier mode {mode!r}")
