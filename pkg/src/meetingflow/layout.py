"""Tiled workspace layouts: fixed geometry, model-chosen programs.

The screen is a unit square. For a pane count of 1 to 5 the geometry is
fixed, and panes are always listed clockwise starting from the top-left
tile:

    1 pane          2 panes         3 panes
    +-------+       +---+---+       +---+---+
    |       |       |   |   |       |   | 2 |
    |   1   |       | 1 | 2 |       | 1 +---+
    |       |       |   |   |       |   | 3 |
    +-------+       +---+---+       +---+---+

    4 panes         5 panes
    +---+---+       +---+---+
    | 1 | 2 |       | 1 | 2 |
    +---+---+       +-+--+--+
    | 4 | 3 |       |5 |4 |3 |
    +---+---+       +--+--+--+

Which programs go in the panes for each phase comes from one structured
model call over the whole plan; the geometry never does.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence
from urllib.parse import urlparse

from .errors import CountOutOfRange, InvariantViolation, ParseFailure
from .gateway import GenAiGateway, PromptRequest, StructuredCompletion
from .jsontext import extract_first_json
from .model import PhasePlan
from .prompts import PromptLibrary

AREA_TOLERANCE = 1e-9

MIN_PROGRAMS = 1
MAX_PROGRAMS = 5


def is_url(value: str) -> bool:
    parsed = urlparse(value)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


@dataclass(frozen=True)
class Tile:
    """An axis-aligned rectangle inside the unit square."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise InvariantViolation("tile origin must lie in the unit square")
        if self.w <= 0.0 or self.h <= 0.0:
            raise InvariantViolation("tile width and height must be positive")
        if self.x + self.w > 1.0 + AREA_TOLERANCE or self.y + self.h > 1.0 + AREA_TOLERANCE:
            raise InvariantViolation("tile must not extend past the unit square")

    @property
    def area(self) -> float:
        return self.w * self.h

    def overlaps(self, other: "Tile") -> bool:
        overlap_w = min(self.x + self.w, other.x + other.w) - max(self.x, other.x)
        overlap_h = min(self.y + self.h, other.y + other.h) - max(self.y, other.y)
        return overlap_w > AREA_TOLERANCE and overlap_h > AREA_TOLERANCE

    def to_dict(self) -> dict[str, float]:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "Tile":
        return cls(x=data["x"], y=data["y"], w=data["w"], h=data["h"])


_LAYOUTS: dict[int, tuple[tuple[float, float, float, float], ...]] = {
    1: ((0.0, 0.0, 1.0, 1.0),),
    2: (
        (0.0, 0.0, 0.5, 1.0),
        (0.5, 0.0, 0.5, 1.0),
    ),
    3: (
        (0.0, 0.0, 0.5, 1.0),
        (0.5, 0.0, 0.5, 0.5),
        (0.5, 0.5, 0.5, 0.5),
    ),
    4: (
        (0.0, 0.0, 0.5, 0.5),
        (0.5, 0.0, 0.5, 0.5),
        (0.5, 0.5, 0.5, 0.5),
        (0.0, 0.5, 0.5, 0.5),
    ),
    5: (
        (0.0, 0.0, 0.5, 0.5),
        (0.5, 0.0, 0.5, 0.5),
        (2 / 3, 0.5, 1 / 3, 0.5),
        (1 / 3, 0.5, 1 / 3, 0.5),
        (0.0, 0.5, 1 / 3, 0.5),
    ),
}


def tile(count: int) -> tuple[Tile, ...]:
    """The fixed tile geometry for ``count`` panes, clockwise from top-left."""
    if not isinstance(count, int) or isinstance(count, bool) or count not in _LAYOUTS:
        raise CountOutOfRange(f"pane count must be 1..5, got {count!r}")
    return tuple(Tile(*rect) for rect in _LAYOUTS[count])


@dataclass(frozen=True)
class ProgramAssignment:
    """One thing on screen: a locally available program or a URL."""

    name_or_url: str
    rationale: str = ""

    def __post_init__(self):
        if not self.name_or_url or not self.name_or_url.strip():
            raise InvariantViolation("program name or URL must be non-empty")

    @property
    def is_web(self) -> bool:
        return is_url(self.name_or_url)

    def to_dict(self) -> dict[str, str]:
        return {"name_or_url": self.name_or_url, "rationale": self.rationale}

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "ProgramAssignment":
        return cls(name_or_url=data["name_or_url"], rationale=data.get("rationale", ""))


@dataclass(frozen=True)
class PhaseLayout:
    """The programs chosen for one phase, before geometry is attached."""

    phase_title: str
    timer_minutes: int
    programs: tuple[ProgramAssignment, ...]

    def __post_init__(self):
        if not self.phase_title or not self.phase_title.strip():
            raise InvariantViolation("phase title must be non-empty")
        object.__setattr__(self, "programs", tuple(self.programs))
        if not MIN_PROGRAMS <= len(self.programs) <= MAX_PROGRAMS:
            raise InvariantViolation(
                f"a phase layout holds {MIN_PROGRAMS}..{MAX_PROGRAMS} programs, got {len(self.programs)}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "phase_title": self.phase_title,
            "timer_minutes": self.timer_minutes,
            "programs": [p.to_dict() for p in self.programs],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PhaseLayout":
        return cls(
            phase_title=data["phase_title"],
            timer_minutes=data["timer_minutes"],
            programs=tuple(ProgramAssignment.from_dict(p) for p in data["programs"]),
        )


@dataclass(frozen=True)
class Pane:
    program: ProgramAssignment
    tile: Tile

    def to_dict(self) -> dict[str, Any]:
        return {"program": self.program.to_dict(), "tile": self.tile.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Pane":
        return cls(
            program=ProgramAssignment.from_dict(data["program"]),
            tile=Tile.from_dict(data["tile"]),
        )


@dataclass(frozen=True)
class PlacedLayout:
    """A phase layout with geometry attached: what goes exactly where."""

    phase_title: str
    timer_minutes: int
    panes: tuple[Pane, ...]

    def __post_init__(self):
        object.__setattr__(self, "panes", tuple(self.panes))
        tiles = [p.tile for p in self.panes]
        for i, a in enumerate(tiles):
            for b in tiles[i + 1:]:
                if a.overlaps(b):
                    raise InvariantViolation("placed tiles must not overlap")
        total = sum(t.area for t in tiles)
        if abs(total - 1.0) > AREA_TOLERANCE:
            raise InvariantViolation(f"placed tiles must cover the screen, area sum {total}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "phase_title": self.phase_title,
            "timer_minutes": self.timer_minutes,
            "panes": [p.to_dict() for p in self.panes],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PlacedLayout":
        return cls(
            phase_title=data["phase_title"],
            timer_minutes=data["timer_minutes"],
            panes=tuple(Pane.from_dict(p) for p in data["panes"]),
        )


def place(layout: PhaseLayout) -> PlacedLayout:
    """Attach the fixed geometry to a phase layout, preserving program order."""
    tiles = tile(len(layout.programs))
    return PlacedLayout(
        phase_title=layout.phase_title,
        timer_minutes=layout.timer_minutes,
        panes=tuple(Pane(program=p, tile=t) for p, t in zip(layout.programs, tiles)),
    )


# --- parsing and generation ---------------------------------------------------

def _check_name(name: Any, available: Sequence[str], where: str) -> str:
    if not isinstance(name, str) or not name.strip():
        raise ParseFailure(f"{where}: program name must be a non-empty string", code="bad_type")
    if name in available or is_url(name):
        return name
    raise ParseFailure(
        f"{where}: {name!r} is not an available program and is not a URL",
        code="unknown_program",
    )


def parse_layout_response(text: str, plan: PhasePlan, available: Sequence[str]) -> list[PhaseLayout]:
    """Parse the model's per-phase program choices for ``plan``.

    Enforces: one entry per phase with matching titles in order, one to five
    programs per phase, names drawn from ``available`` or URLs, and at least
    one URL across the whole result.
    """
    value = extract_first_json(text)
    if not isinstance(value, list):
        raise ParseFailure("top-level JSON value must be an array", code="bad_type")
    if len(value) != len(plan.phases):
        raise ParseFailure(
            f"expected one entry per phase ({len(plan.phases)}), got {len(value)}",
            code="phase_count",
        )

    layouts: list[PhaseLayout] = []
    saw_url = False
    for idx, (raw, phase) in enumerate(zip(value, plan.phases)):
        where = f"entry {idx}"
        if not isinstance(raw, dict):
            raise ParseFailure(f"{where} is not an object", code="bad_type")
        for key in ("PhaseTitle", "timer", "programList"):
            if key not in raw:
                raise ParseFailure(f'{where} is missing required key "{key}"', code="missing_key")
        title = raw["PhaseTitle"]
        if not isinstance(title, str) or title.strip().lower() != phase.title.strip().lower():
            raise ParseFailure(
                f"{where}: PhaseTitle {title!r} does not match phase {phase.title!r}",
                code="title_mismatch",
            )
        timer = raw["timer"]
        if isinstance(timer, bool) or not isinstance(timer, (int, float)):
            raise ParseFailure(f'{where}: "timer" must be a number', code="bad_type")
        programs_raw = raw["programList"]
        if not isinstance(programs_raw, list):
            raise ParseFailure(f'{where}: "programList" must be an array', code="bad_type")
        if not MIN_PROGRAMS <= len(programs_raw) <= MAX_PROGRAMS:
            raise ParseFailure(
                f"{where}: programList must hold {MIN_PROGRAMS}..{MAX_PROGRAMS} programs, "
                f"got {len(programs_raw)}",
                code="program_count",
            )
        programs = []
        for pidx, item in enumerate(programs_raw):
            if not isinstance(item, dict) or "name" not in item:
                raise ParseFailure(
                    f'{where} program {pidx} must be an object with a "name"', code="bad_type"
                )
            name = _check_name(item["name"], available, f"{where} program {pidx}")
            if is_url(name):
                saw_url = True
            programs.append(
                ProgramAssignment(name_or_url=name, rationale=str(item.get("description", "")))
            )
        layouts.append(
            PhaseLayout(phase_title=phase.title, timer_minutes=int(timer), programs=tuple(programs))
        )

    if not saw_url:
        raise ParseFailure(
            "the result must include at least one URL across all phases", code="url_required"
        )
    return layouts


# ParseFailure codes that mean the model broke a layout rule rather than the
# response format; exhaustion on these surfaces as LayoutInvalid upstream.
CONSTRAINT_CODES = frozenset({"program_count", "unknown_program", "url_required", "phase_count", "title_mismatch"})


def build_layout_request(
    library: PromptLibrary,
    plan: PhasePlan,
    available: Sequence[str],
    max_attempts: int = 3,
) -> PromptRequest:
    system, user = library.render(
        "layout_generation",
        available_programs=", ".join(available),
        plan=json.dumps(plan.to_compact_dict(), ensure_ascii=False),
    )
    return PromptRequest(
        purpose_tag="layout_generation",
        system_prompt=system,
        user_prompt=user,
        max_attempts=max_attempts,
    )


def generate_phase_layouts(
    gateway: GenAiGateway,
    library: PromptLibrary,
    plan: PhasePlan,
    available: Sequence[str],
    max_attempts: int = 3,
) -> list[PhaseLayout]:
    """One structured call producing one PhaseLayout per phase of ``plan``."""
    from .errors import LayoutInvalid, StructuredOutputExhausted

    request = build_layout_request(library, plan, available, max_attempts)
    try:
        done: StructuredCompletion = gateway.complete_structured(
            request, lambda text: parse_layout_response(text, plan, available)
        )
    except StructuredOutputExhausted as exc:
        if exc.last_failure is not None and exc.last_failure.code in CONSTRAINT_CODES:
            raise LayoutInvalid(str(exc.last_failure)) from exc
        raise
    return done.value
