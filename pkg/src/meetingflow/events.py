"""Event records, the append-only log store, and wire messages.

A session IS its event log: every observable change is one appended record,
and the log replays to exactly the live state. Records are one JSON object
per line, UTF-8, with gapless sequence numbers starting at 1.

Wire messages use the same vocabulary: every broadcast a client receives is
an event record (sometimes with a redacted payload), and client commands are
a small closed set of types.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import InvariantViolation, ProtocolError, UnknownEventKind
from .jsontext import canonical_json

EVENT_KINDS = (
    "session_created",
    "member_joined",
    "plan_generated",
    "focus_tool_ready",
    "focus_response_submitted",
    "divergence_published",
    "plan_refined",
    "layouts_generated",
    "meeting_started",
    "utterance_ingested",
    "transition_proposed",
    "transition_aborted",
    "transition_committed",
    "layout_applied",
    "meeting_ended",
)

COMMAND_TYPES = (
    "join",
    "submit_focus_response",
    "submit_utterance",
    "abort_transition",
    "start_meeting",
    "end_meeting",
)

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]{0,63}$")


def check_session_id(session_id: str) -> str:
    if not isinstance(session_id, str) or not _SESSION_ID_RE.match(session_id):
        raise InvariantViolation(f"session id must be a short slug, got {session_id!r}")
    return session_id


@dataclass(frozen=True)
class EventRecord:
    seq: int
    at: float
    kind: str
    payload: dict[str, Any]

    def __post_init__(self):
        if not isinstance(self.seq, int) or self.seq < 1:
            raise InvariantViolation("event seq must be a positive integer")
        if self.kind not in EVENT_KINDS:
            raise InvariantViolation(f"unknown event kind {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"seq": self.seq, "at": self.at, "kind": self.kind, "payload": self.payload}

    def to_line(self) -> str:
        return canonical_json(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EventRecord":
        return cls(seq=data["seq"], at=data["at"], kind=data["kind"], payload=data["payload"])


class EventLogStore:
    """One append-only log file per session under a data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self.data_dir / f"{check_session_id(session_id)}.log"

    def exists(self, session_id: str) -> bool:
        return self.path(session_id).is_file()

    def append(self, session_id: str, record: EventRecord) -> None:
        with open(self.path(session_id), "a", encoding="utf-8") as fh:
            fh.write(record.to_line())
            fh.flush()

    def read(self, session_id: str) -> list[EventRecord]:
        return read_log(self.path(session_id))

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.log"))


def read_log(path: str | Path) -> list[EventRecord]:
    """Load raw records from a log file; structural checks only."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except ValueError as exc:
                raise ProtocolError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if data.get("kind") not in EVENT_KINDS:
                raise UnknownEventKind(f"{path}:{lineno}: unknown event kind {data.get('kind')!r}")
            records.append(EventRecord.from_dict(data))
    return records


@dataclass(frozen=True)
class WireMessage:
    """Everything that crosses the socket, both directions."""

    type: str
    session_id: str
    payload: dict[str, Any]
    seq: int | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "type": self.type,
            "session_id": self.session_id,
            "payload": self.payload,
        }
        if self.seq is not None:
            data["seq"] = self.seq
        return data

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WireMessage":
        """Parse an incoming message. Unknown extra fields are ignored;
        missing required fields and non-object payloads are rejected."""
        if not isinstance(data, Mapping):
            raise ProtocolError("wire message must be a JSON object")
        for key in ("type", "session_id"):
            if key not in data or not isinstance(data[key], str):
                raise ProtocolError(f'wire message needs a string "{key}"')
        payload = data.get("payload", {})
        if not isinstance(payload, Mapping):
            raise ProtocolError('wire message "payload" must be an object')
        seq = data.get("seq")
        if seq is not None and (isinstance(seq, bool) or not isinstance(seq, int)):
            raise ProtocolError('wire message "seq" must be an integer')
        return cls(type=data["type"], session_id=data["session_id"], payload=dict(payload), seq=seq)
