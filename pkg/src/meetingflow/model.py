"""Domain model for goal-driven meetings: invitations, phases, plans.

A meeting plan is a goal plus an ordered list of phases. Plans travel in two
serialized shapes:

* the full shape (``to_dict``/``from_dict``) used in event logs and on the
  wire, with self-describing key names;
* the compact shape (``to_compact_dict``/``parse_compact_plan``) used when
  talking to the completion model, with one- and two-letter keys to keep
  prompts and responses short.

Constructors enforce only the invariants that must never be violated in a
stored object (non-empty titles, sane ranges). Everything a generated plan
can plausibly get wrong is left to ``validate_plan`` so that callers can see
the full damage report instead of an exception on the first bad field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from .errors import InvariantViolation, ParseFailure
from .jsontext import canonical_json, extract_first_json

DEFAULT_ROLES: tuple[str, ...] = (
    "program_manager",
    "software_engineer",
    "hardware_engineer",
    "designer",
    "researcher",
)

MIN_DURATION_MINUTES = 5


class Priority(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


class Directionality(str, Enum):
    DIRECTIONAL = "directional"
    ITERATIVE = "iterative"


_PRIORITY_VALUES = frozenset(p.value for p in Priority)
_DIRECTIONALITY_VALUES = frozenset(d.value for d in Directionality)

# Compact-form phase keys, in the order they are reported when missing.
_PHASE_KEYS = ("pt", "pd", "be", "bd", "p", "t", "d")


def ensure_known_roles(roles: Iterable[str], known: Iterable[str] = DEFAULT_ROLES) -> None:
    """Raise InvariantViolation if any role is outside the configured set."""
    known_set = set(known)
    for role in roles:
        if role not in known_set:
            raise InvariantViolation(f"unknown role {role!r} (known: {sorted(known_set)})")


@dataclass(frozen=True)
class Invitation:
    """The meeting request a session is created from."""

    text: str
    duration_minutes: int
    organizer_id: str
    attendee_roles: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise InvariantViolation("invitation text must be non-empty")
        if not isinstance(self.duration_minutes, int) or isinstance(self.duration_minutes, bool):
            raise InvariantViolation("duration_minutes must be an integer")
        if self.duration_minutes < MIN_DURATION_MINUTES:
            raise InvariantViolation(
                f"duration_minutes must be at least {MIN_DURATION_MINUTES}"
            )
        if not self.organizer_id or not self.organizer_id.strip():
            raise InvariantViolation("organizer_id must be non-empty")
        object.__setattr__(self, "attendee_roles", tuple(self.attendee_roles))
        for role in self.attendee_roles:
            if not role or not role.strip():
                raise InvariantViolation("attendee roles must be non-empty strings")

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "duration_minutes": self.duration_minutes,
            "organizer_id": self.organizer_id,
            "attendee_roles": list(self.attendee_roles),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Invitation":
        return cls(
            text=data["text"],
            duration_minutes=data["duration_minutes"],
            organizer_id=data["organizer_id"],
            attendee_roles=tuple(data.get("attendee_roles", ())),
        )


@dataclass(frozen=True)
class Phase:
    """One segment of a meeting plan.

    ``priority`` and ``directionality`` are plain strings on purpose: a
    generated plan may carry values outside the canonical sets, and the
    validator reports those instead of the constructor refusing them.
    """

    title: str
    description: str
    encouraged: tuple[str, ...]
    discouraged: tuple[str, ...]
    priority: str
    allotted_minutes: int
    directionality: str

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise InvariantViolation("phase title must be non-empty")
        if not isinstance(self.allotted_minutes, int) or isinstance(self.allotted_minutes, bool):
            raise InvariantViolation("phase minutes must be an integer")
        if self.allotted_minutes < 1:
            raise InvariantViolation("phase minutes must be at least 1")
        object.__setattr__(self, "encouraged", tuple(self.encouraged))
        object.__setattr__(self, "discouraged", tuple(self.discouraged))

    @property
    def is_directional(self) -> bool:
        return self.directionality == Directionality.DIRECTIONAL.value

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "description": self.description,
            "encouraged": list(self.encouraged),
            "discouraged": list(self.discouraged),
            "priority": self.priority,
            "allotted_minutes": self.allotted_minutes,
            "directionality": self.directionality,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Phase":
        return cls(
            title=data["title"],
            description=data["description"],
            encouraged=tuple(data.get("encouraged", ())),
            discouraged=tuple(data.get("discouraged", ())),
            priority=data["priority"],
            allotted_minutes=data["allotted_minutes"],
            directionality=data["directionality"],
        )

    def to_compact_dict(self) -> dict[str, Any]:
        return {
            "pt": self.title,
            "pd": self.description,
            "be": list(self.encouraged),
            "bd": list(self.discouraged),
            "p": self.priority,
            "t": self.allotted_minutes,
            "d": self.directionality,
        }


@dataclass(frozen=True)
class PhasePlan:
    """A goal, its explanation, and the ordered phases that pursue it."""

    goal: str
    explanation: str
    phases: tuple[Phase, ...]
    revision: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        if not isinstance(self.revision, int) or self.revision < 0:
            raise InvariantViolation("plan revision must be a non-negative integer")

    @property
    def total_minutes(self) -> int:
        return sum(p.allotted_minutes for p in self.phases)

    def to_dict(self) -> dict[str, Any]:
        return {
            "goal": self.goal,
            "explanation": self.explanation,
            "revision": self.revision,
            "phases": [p.to_dict() for p in self.phases],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PhasePlan":
        return cls(
            goal=data["goal"],
            explanation=data["explanation"],
            revision=data.get("revision", 0),
            phases=tuple(Phase.from_dict(p) for p in data["phases"]),
        )

    def to_compact_dict(self) -> dict[str, Any]:
        return {
            "goal": self.goal,
            "pi": [p.to_compact_dict() for p in self.phases],
            "exp": self.explanation,
        }

    def canonical_bytes(self) -> bytes:
        """Stable serialized form, used for byte-level comparisons."""
        return canonical_json(self.to_dict()).encode("utf-8")


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    code: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"severity": self.severity, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "violations", tuple(self.violations))

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "error")

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {"violations": [v.to_dict() for v in self.violations]}


def validate_plan(plan: PhasePlan, invitation: Invitation) -> ValidationReport:
    """Check a plan against its invitation. Reports, never raises.

    Errors: no phases at all, first phase is not an introduction, minutes
    over-allocated beyond the invitation, priority/directionality outside
    their canonical value sets. Warnings: minutes under-allocated, no
    closing phase.
    """
    violations: list[Violation] = []
    if not plan.phases:
        violations.append(Violation("error", "empty_phases", "plan has no phases"))
        return ValidationReport(tuple(violations))

    first = plan.phases[0]
    if "introduction" not in first.title.lower():
        violations.append(
            Violation(
                "error",
                "missing_introduction",
                f"first phase must be an introduction, got {first.title!r}",
            )
        )

    total = plan.total_minutes
    if total > invitation.duration_minutes:
        violations.append(
            Violation(
                "error",
                "over_allocated",
                f"phases total {total} minutes, invitation allows {invitation.duration_minutes}",
            )
        )
    elif total < invitation.duration_minutes:
        violations.append(
            Violation(
                "warning",
                "under_allocated",
                f"phases total {total} minutes of {invitation.duration_minutes} available",
            )
        )

    for idx, phase in enumerate(plan.phases):
        if phase.priority not in _PRIORITY_VALUES:
            violations.append(
                Violation(
                    "error",
                    "invalid_priority",
                    f"phase {idx} ({phase.title!r}) has priority {phase.priority!r}",
                )
            )
        if phase.directionality not in _DIRECTIONALITY_VALUES:
            violations.append(
                Violation(
                    "error",
                    "invalid_directionality",
                    f"phase {idx} ({phase.title!r}) has directionality {phase.directionality!r}",
                )
            )

    if not any(
        "conclusion" in p.title.lower() or "next step" in p.title.lower() for p in plan.phases
    ):
        violations.append(
            Violation("warning", "missing_conclusion", "plan has no closing phase")
        )

    return ValidationReport(tuple(violations))


def _parse_phase(raw: Any, idx: int) -> Phase:
    if not isinstance(raw, dict):
        raise ParseFailure(f"phase {idx} is not an object", code="bad_type")
    for key in _PHASE_KEYS:
        if key not in raw:
            raise ParseFailure(
                f'phase {idx} is missing required key "{key}"', code="missing_key"
            )
    title, desc = raw["pt"], raw["pd"]
    if not isinstance(title, str):
        raise ParseFailure(f'phase {idx} key "pt" must be a string', code="bad_type")
    if not isinstance(desc, str):
        raise ParseFailure(f'phase {idx} key "pd" must be a string', code="bad_type")
    behaviors: dict[str, tuple[str, ...]] = {}
    for key in ("be", "bd"):
        items = raw[key]
        if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
            raise ParseFailure(
                f'phase {idx} key "{key}" must be a list of strings', code="bad_type"
            )
        behaviors[key] = tuple(items)
    minutes = raw["t"]
    if isinstance(minutes, bool) or not isinstance(minutes, (int, float)):
        raise ParseFailure(f'phase {idx} key "t" must be a number', code="bad_type")
    for key in ("p", "d"):
        if not isinstance(raw[key], str):
            raise ParseFailure(f'phase {idx} key "{key}" must be a string', code="bad_type")
    try:
        return Phase(
            title=title,
            description=desc,
            encouraged=behaviors["be"],
            discouraged=behaviors["bd"],
            priority=raw["p"],
            allotted_minutes=int(minutes),
            directionality=raw["d"],
        )
    except InvariantViolation as exc:
        raise ParseFailure(f"phase {idx}: {exc}", code="bad_value") from exc


def parse_compact_plan(text: str) -> PhasePlan:
    """Parse a model response into a PhasePlan at revision 0.

    The first well-formed JSON object in the text is used, so surrounding
    prose and code fences are tolerated. Unknown keys are ignored; missing
    required keys fail with the key named in the message. Minutes arriving
    as non-integral numbers are truncated.
    """
    value = extract_first_json(text)
    if not isinstance(value, dict):
        raise ParseFailure("top-level JSON value must be an object", code="bad_type")
    for key in ("goal", "pi", "exp"):
        if key not in value:
            raise ParseFailure(f'response is missing required key "{key}"', code="missing_key")
    if not isinstance(value["goal"], str):
        raise ParseFailure('key "goal" must be a string', code="bad_type")
    if not isinstance(value["exp"], str):
        raise ParseFailure('key "exp" must be a string', code="bad_type")
    if not isinstance(value["pi"], list):
        raise ParseFailure('key "pi" must be a list of phases', code="bad_type")
    phases = tuple(_parse_phase(raw, idx) for idx, raw in enumerate(value["pi"]))
    return PhasePlan(goal=value["goal"], explanation=value["exp"], phases=phases, revision=0)
