"""Pre-meeting focus tool: candidate features, private votes, divergence.

Before the meeting, every attendee marks each candidate feature as include
or exclude. Votes stay private; only aggregate counts ever leave the server.
Divergence over the collected responses picks out the features the group
disagrees on, ranked by how evenly split the group is, and those features
drive the plan refinement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .errors import (
    IncompleteSelection,
    InsufficientResponses,
    InvariantViolation,
    ParseFailure,
    StructuredOutputExhausted,
    ToolInvalid,
)
from .gateway import GenAiGateway, PromptRequest
from .jsontext import extract_first_json
from .model import Invitation
from .prompts import PromptLibrary

INCLUDE = "include"
EXCLUDE = "exclude"

DEFAULT_MIN_FEATURES = 30

_SLUG_RE = re.compile(r"^[a-z0-9]+(-[a-z0-9]+)*$")
_GENERIC_NAME_RE = re.compile(r"^\s*feature\s*#?\s*\d+\s*$", re.IGNORECASE)


def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug


@dataclass(frozen=True)
class FeatureItem:
    """One candidate feature with its implementation price."""

    id: str
    name: str
    price: float

    def __post_init__(self):
        if not _SLUG_RE.match(self.id):
            raise InvariantViolation(f"feature id must be a slug, got {self.id!r}")
        if not self.name or not self.name.strip():
            raise InvariantViolation("feature name must be non-empty")
        if _GENERIC_NAME_RE.match(self.name):
            raise InvariantViolation(f"feature name {self.name!r} is a generic placeholder")
        if isinstance(self.price, bool) or not isinstance(self.price, (int, float)):
            raise InvariantViolation("feature price must be a number")
        if self.price < 0:
            raise InvariantViolation("feature price must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "name": self.name, "price": self.price}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FeatureItem":
        return cls(id=data["id"], name=data["name"], price=data["price"])


@dataclass(frozen=True)
class FocusTool:
    """The survey shown to attendees: scenario text plus the feature list."""

    scenario_text: str
    features: tuple[FeatureItem, ...]
    min_features: int = DEFAULT_MIN_FEATURES

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if len(self.features) < self.min_features:
            raise InvariantViolation(
                f"focus tool needs at least {self.min_features} features, got {len(self.features)}"
            )
        seen = set()
        for feature in self.features:
            if feature.id in seen:
                raise InvariantViolation(f"duplicate feature id {feature.id!r}")
            seen.add(feature.id)

    @property
    def feature_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.features)

    def feature_by_id(self, feature_id: str) -> FeatureItem:
        for feature in self.features:
            if feature.id == feature_id:
                return feature
        raise KeyError(feature_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario_text": self.scenario_text,
            "min_features": self.min_features,
            "features": [f.to_dict() for f in self.features],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FocusTool":
        return cls(
            scenario_text=data["scenario_text"],
            min_features=data.get("min_features", DEFAULT_MIN_FEATURES),
            features=tuple(FeatureItem.from_dict(f) for f in data["features"]),
        )


@dataclass(frozen=True)
class FocusResponse:
    """One attendee's complete private vote. Total is computed server-side."""

    participant_id: str
    role: str
    selections: Mapping[str, str]  # feature id -> include | exclude
    total_price: float
    submitted_at: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "participant_id": self.participant_id,
            "role": self.role,
            "selections": dict(sorted(self.selections.items())),
            "total_price": self.total_price,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FocusResponse":
        return cls(
            participant_id=data["participant_id"],
            role=data["role"],
            selections=dict(data["selections"]),
            total_price=data["total_price"],
            submitted_at=data["submitted_at"],
        )


def build_response(
    tool: FocusTool,
    participant_id: str,
    role: str,
    selections: Mapping[str, str],
    submitted_at: float,
) -> FocusResponse:
    """Validate a raw vote against the tool and price it.

    The vote must cover every feature exactly once; IncompleteSelection
    names what is missing and what is unrecognized.
    """
    tool_ids = set(tool.feature_ids)
    given = set(selections)
    missing = sorted(tool_ids - given)
    unknown = sorted(given - tool_ids)
    if missing or unknown:
        raise IncompleteSelection(missing, unknown)
    for feature_id, choice in selections.items():
        if choice not in (INCLUDE, EXCLUDE):
            raise InvariantViolation(
                f"selection for {feature_id!r} must be {INCLUDE!r} or {EXCLUDE!r}, got {choice!r}"
            )
    total = sum(f.price for f in tool.features if selections[f.id] == INCLUDE)
    return FocusResponse(
        participant_id=participant_id,
        role=role,
        selections=dict(selections),
        total_price=total,
        submitted_at=submitted_at,
    )


@dataclass(frozen=True)
class FeatureTally:
    feature_id: str
    include_count: int
    exclude_count: int

    @property
    def divergent(self) -> bool:
        return self.include_count >= 1 and self.exclude_count >= 1

    @property
    def minority_size(self) -> int:
        return min(self.include_count, self.exclude_count)

    @property
    def total(self) -> int:
        return self.include_count + self.exclude_count

    def to_dict(self) -> dict[str, Any]:
        return {
            "feature_id": self.feature_id,
            "include_count": self.include_count,
            "exclude_count": self.exclude_count,
            "divergent": self.divergent,
        }


@dataclass(frozen=True)
class DivergenceReport:
    """Aggregate vote counts and the ranked list of contested features."""

    tallies: tuple[FeatureTally, ...]
    divergent_ids_ranked: tuple[str, ...]
    response_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "tallies": [t.to_dict() for t in self.tallies],
            "divergent_ids_ranked": list(self.divergent_ids_ranked),
            "response_count": self.response_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DivergenceReport":
        return cls(
            tallies=tuple(
                FeatureTally(
                    feature_id=t["feature_id"],
                    include_count=t["include_count"],
                    exclude_count=t["exclude_count"],
                )
                for t in data["tallies"]
            ),
            divergent_ids_ranked=tuple(data["divergent_ids_ranked"]),
            response_count=data["response_count"],
        )


def compute_divergence(tool: FocusTool, responses: Iterable[FocusResponse]) -> DivergenceReport:
    """Tally votes per feature and rank the contested ones.

    A feature is divergent when at least one attendee includes it and at
    least one excludes it. Ranking: most evenly split first (larger minority
    side), then more total votes, then feature id as the final tiebreak.
    """
    responses = list(responses)
    if len(responses) < 2:
        raise InsufficientResponses(
            f"divergence needs at least 2 responses, got {len(responses)}"
        )
    tallies = []
    for feature in tool.features:
        include = sum(1 for r in responses if r.selections.get(feature.id) == INCLUDE)
        exclude = sum(1 for r in responses if r.selections.get(feature.id) == EXCLUDE)
        tallies.append(FeatureTally(feature.id, include, exclude))
    ranked = sorted(
        (t for t in tallies if t.divergent),
        key=lambda t: (-t.minority_size, -t.total, t.feature_id),
    )
    return DivergenceReport(
        tallies=tuple(tallies),
        divergent_ids_ranked=tuple(t.feature_id for t in ranked),
        response_count=len(responses),
    )


# --- parsing and generation -----------------------------------------------------

def parse_features(text: str, min_features: int) -> tuple[FeatureItem, ...]:
    """Parse the model's feature list, enforcing count, names, and prices."""
    value = extract_first_json(text)
    if not isinstance(value, list):
        raise ParseFailure("top-level JSON value must be an array", code="bad_type")
    features: list[FeatureItem] = []
    seen: dict[str, str] = {}
    for idx, raw in enumerate(value):
        if not isinstance(raw, dict):
            raise ParseFailure(f"item {idx} is not an object", code="bad_type")
        for key in ("name", "price"):
            if key not in raw:
                raise ParseFailure(f'item {idx} is missing required key "{key}"', code="missing_key")
        name = raw["name"]
        if not isinstance(name, str) or not name.strip():
            raise ParseFailure(f"item {idx} name must be a non-empty string", code="bad_type")
        if _GENERIC_NAME_RE.match(name):
            raise ParseFailure(
                f"item {idx} name {name!r} is a generic placeholder, use descriptive names",
                code="generic_name",
            )
        price = raw["price"]
        if isinstance(price, bool) or not isinstance(price, (int, float)):
            raise ParseFailure(f"item {idx} price must be a number", code="bad_type")
        if price < 0:
            raise ParseFailure(f"item {idx} price must be non-negative", code="bad_price")
        slug = slugify(name)
        if not slug:
            raise ParseFailure(f"item {idx} name {name!r} yields an empty id", code="bad_type")
        if slug in seen:
            raise ParseFailure(
                f"duplicate feature name: {name!r} collides with {seen[slug]!r}",
                code="duplicate_names",
            )
        seen[slug] = name
        features.append(FeatureItem(id=slug, name=name, price=price))
    if len(features) < min_features:
        raise ParseFailure(
            f"only {len(features)} features given, at least {min_features} are required",
            code="cardinality",
        )
    return tuple(features)


def build_focus_request(
    library: PromptLibrary,
    invitation: Invitation,
    min_features: int = DEFAULT_MIN_FEATURES,
    max_attempts: int = 3,
) -> PromptRequest:
    system, user = library.render(
        "focus_tool_generation",
        min_features=min_features,
        roles=", ".join(invitation.attendee_roles) or "unspecified",
        invitation=invitation.text,
    )
    return PromptRequest(
        purpose_tag="focus_tool_generation",
        system_prompt=system,
        user_prompt=user,
        max_attempts=max_attempts,
    )


def generate_focus_tool(
    gateway: GenAiGateway,
    library: PromptLibrary,
    invitation: Invitation,
    min_features: int = DEFAULT_MIN_FEATURES,
    max_attempts: int = 3,
) -> FocusTool:
    """Generate the survey's feature list with corrective retries.

    Too few features triggers the normal corrective retry; a model that
    keeps producing duplicate names is reported as ToolInvalid.
    """
    request = build_focus_request(library, invitation, min_features, max_attempts)
    try:
        done = gateway.complete_structured(
            request, lambda text: parse_features(text, min_features)
        )
    except StructuredOutputExhausted as exc:
        if exc.last_failure is not None and exc.last_failure.code == "duplicate_names":
            raise ToolInvalid(str(exc.last_failure)) from exc
        raise
    return FocusTool(
        scenario_text=invitation.text,
        features=done.value,
        min_features=min_features,
    )
