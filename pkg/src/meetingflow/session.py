"""The session engine: commands in, events out, state as a fold.

Every mutation funnels through ``apply_event``. Command handlers only
validate, call generators, and append records; they never touch state
directly. That single choke point is what makes ``replay`` trustworthy:
folding a session's log reproduces the live state bit for bit.

Timing is caller-supplied. ``handle_command`` and ``tick`` take ``now`` as
a parameter, so a scenario can drive a session on a virtual clock and the
server can drive it on the real one, through the same code.

Callers are expected to ``tick`` before delivering a command, so that a
proposal whose abort window elapsed at 40.0 is committed before an
utterance arriving at 41.0 is ingested.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import (
    ConfigInvalid,
    GapDetected,
    InvariantViolation,
    LifecycleViolation,
    PermissionDenied,
    ProtocolError,
    UnknownEventKind,
    UnknownParticipant,
    UnknownSession,
)
from .events import (
    COMMAND_TYPES,
    EventLogStore,
    EventRecord,
    WireMessage,
    check_session_id,
)
from .focus import (
    DivergenceReport,
    FocusResponse,
    FocusTool,
    build_response,
    compute_divergence,
    generate_focus_tool,
)
from .gateway import GenAiGateway
from .hotl import (
    HotlConfig,
    TransitionProposal,
    due_for_commit,
    mark_aborted,
    mark_committed,
    open_proposal,
    validate_abort,
)
from .layout import PlacedLayout, generate_phase_layouts, place
from .model import DEFAULT_ROLES, Invitation, PhasePlan, ensure_known_roles
from .pipeline import DEFAULT_REFINEMENT_TOP_K, generate_initial_plan, refine_plan
from .prompts import PromptLibrary
from .tracker import (
    ClassifierVerdict,
    TrackerState,
    Utterance,
    make_classifier,
    observe,
)

LIFECYCLE_CREATED = "created"
LIFECYCLE_PRE_MEETING = "pre_meeting"
LIFECYCLE_REFINING = "refining"
LIFECYCLE_READY = "ready"
LIFECYCLE_IN_MEETING = "in_meeting"
LIFECYCLE_ENDED = "ended"

LIFECYCLES = (
    LIFECYCLE_CREATED,
    LIFECYCLE_PRE_MEETING,
    LIFECYCLE_REFINING,
    LIFECYCLE_READY,
    LIFECYCLE_IN_MEETING,
    LIFECYCLE_ENDED,
)

DEFAULT_PROGRAMS = ("PowerPoint", "Excel", "Word", "Notepad", "Calculator", "Whiteboard")


@dataclass(frozen=True)
class SessionConfig:
    """Per-session knobs, persisted inside the session_created event.

    Everything replay needs to re-derive state transitions lives here, so a
    log is self-describing: no out-of-band configuration can change what a
    recorded session means.
    """

    roles: tuple[str, ...] = DEFAULT_ROLES
    min_features: int = 30
    refinement_top_k: int = DEFAULT_REFINEMENT_TOP_K
    response_deadline_seconds: float | None = None
    classifier_mode: str = "keyword_fallback"
    scripted_verdicts: tuple[int, ...] = ()
    available_programs: tuple[str, ...] = DEFAULT_PROGRAMS
    hotl: HotlConfig = field(default_factory=HotlConfig)

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "scripted_verdicts", tuple(self.scripted_verdicts))
        object.__setattr__(self, "available_programs", tuple(self.available_programs))
        if not self.roles:
            raise InvariantViolation("config needs at least one role")
        if self.min_features < 1:
            raise InvariantViolation("min_features must be positive")
        if self.refinement_top_k < 1:
            raise InvariantViolation("refinement_top_k must be positive")
        if self.response_deadline_seconds is not None and self.response_deadline_seconds <= 0:
            raise InvariantViolation("response deadline must be positive when set")
        if not self.available_programs:
            raise InvariantViolation("config needs at least one available program")

    def to_dict(self) -> dict[str, Any]:
        return {
            "roles": list(self.roles),
            "min_features": self.min_features,
            "refinement_top_k": self.refinement_top_k,
            "response_deadline_seconds": self.response_deadline_seconds,
            "classifier_mode": self.classifier_mode,
            "scripted_verdicts": list(self.scripted_verdicts),
            "available_programs": list(self.available_programs),
            "hotl": self.hotl.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SessionConfig":
        return cls(
            roles=tuple(data["roles"]),
            min_features=data["min_features"],
            refinement_top_k=data["refinement_top_k"],
            response_deadline_seconds=data["response_deadline_seconds"],
            classifier_mode=data["classifier_mode"],
            scripted_verdicts=tuple(data["scripted_verdicts"]),
            available_programs=tuple(data["available_programs"]),
            hotl=HotlConfig.from_dict(data["hotl"]),
        )


def merge_session_config(base: SessionConfig, overrides: Mapping[str, Any]) -> SessionConfig:
    """Apply a partial plain-dict config on top of ``base``."""
    data = base.to_dict()
    for key, value in overrides.items():
        if key not in data:
            raise ConfigInvalid(f"unknown config key {key!r}")
        if key == "hotl":
            if not isinstance(value, Mapping):
                raise ConfigInvalid('"hotl" must be an object')
            hotl = dict(data["hotl"])
            for hk, hv in value.items():
                if hk not in hotl:
                    raise ConfigInvalid(f"unknown hotl key {hk!r}")
                hotl[hk] = hv
            data["hotl"] = hotl
        else:
            data[key] = value
    return SessionConfig.from_dict(data)


@dataclass
class SessionState:
    """Everything a session knows, reconstructible from its log."""

    session_id: str
    lifecycle: str = LIFECYCLE_CREATED
    invitation: Invitation | None = None
    config: SessionConfig | None = None
    members: dict[str, str] = field(default_factory=dict)
    plan: PhasePlan | None = None
    focus_tool: FocusTool | None = None
    responses: dict[str, FocusResponse] = field(default_factory=dict)
    divergence: DivergenceReport | None = None
    layouts: tuple[PlacedLayout, ...] | None = None
    tracker: TrackerState | None = None
    proposal: TransitionProposal | None = None
    proposal_count: int = 0
    applied_layout_index: int | None = None
    created_at: float | None = None
    ended_at: float | None = None
    last_seq: int = 0

    def snapshot(self) -> dict[str, Any]:
        """A plain-data view of the whole state, for equality checks."""
        return {
            "session_id": self.session_id,
            "lifecycle": self.lifecycle,
            "invitation": self.invitation.to_dict() if self.invitation else None,
            "config": self.config.to_dict() if self.config else None,
            "members": dict(self.members),
            "plan": self.plan.to_dict() if self.plan else None,
            "focus_tool": self.focus_tool.to_dict() if self.focus_tool else None,
            "responses": {pid: r.to_dict() for pid, r in self.responses.items()},
            "divergence": self.divergence.to_dict() if self.divergence else None,
            "layouts": [l.to_dict() for l in self.layouts] if self.layouts is not None else None,
            "tracker": self.tracker.to_dict() if self.tracker else None,
            "proposal": self.proposal.to_dict() if self.proposal else None,
            "proposal_count": self.proposal_count,
            "applied_layout_index": self.applied_layout_index,
            "created_at": self.created_at,
            "ended_at": self.ended_at,
            "last_seq": self.last_seq,
        }


def apply_event(state: SessionState, record: EventRecord) -> None:
    """Fold one record into the state. The only place state mutates."""
    if record.seq != state.last_seq + 1:
        raise GapDetected(expected=state.last_seq + 1, found=record.seq)
    payload = record.payload
    kind = record.kind

    if kind == "session_created":
        state.invitation = Invitation.from_dict(payload["invitation"])
        state.config = SessionConfig.from_dict(payload["config"])
        state.created_at = record.at
        state.lifecycle = LIFECYCLE_CREATED
    elif kind == "member_joined":
        state.members[payload["participant_id"]] = payload["role"]
    elif kind == "plan_generated":
        state.plan = PhasePlan.from_dict(payload["plan"])
    elif kind == "focus_tool_ready":
        state.focus_tool = FocusTool.from_dict(payload["tool"])
        state.lifecycle = LIFECYCLE_PRE_MEETING
    elif kind == "focus_response_submitted":
        response = FocusResponse.from_dict(payload)
        state.responses[response.participant_id] = response
    elif kind == "divergence_published":
        state.divergence = DivergenceReport.from_dict(payload["report"])
        state.lifecycle = LIFECYCLE_REFINING
    elif kind == "plan_refined":
        state.plan = PhasePlan.from_dict(payload["plan"])
    elif kind == "layouts_generated":
        state.layouts = tuple(PlacedLayout.from_dict(l) for l in payload["layouts"])
        state.lifecycle = LIFECYCLE_READY
    elif kind == "meeting_started":
        state.lifecycle = LIFECYCLE_IN_MEETING
        state.tracker = TrackerState()
    elif kind == "utterance_ingested":
        state.tracker.note_utterance(payload["utterance"]["at"])
    elif kind == "transition_proposed":
        state.proposal = TransitionProposal.from_dict(payload["proposal"])
        state.proposal_count += 1
    elif kind == "transition_aborted":
        state.proposal = mark_aborted(state.proposal, payload["aborted_by"])
        state.tracker.install_cooldown(
            payload["to_index"],
            record.at,
            state.config.hotl.abort_cooldown_seconds,
            state.config.hotl.abort_cooldown_utterances,
        )
    elif kind == "transition_committed":
        committed = TransitionProposal.from_dict(payload["proposal"])
        state.proposal = committed
        state.tracker.enter(committed.to_index)
    elif kind == "layout_applied":
        state.applied_layout_index = payload["phase_index"]
    elif kind == "meeting_ended":
        state.lifecycle = LIFECYCLE_ENDED
        state.ended_at = record.at
    else:  # pragma: no cover - EventRecord already rejects unknown kinds
        raise UnknownEventKind(f"unknown event kind {kind!r}")

    state.last_seq = record.seq


def replay(records: Sequence[EventRecord]) -> SessionState:
    """Rebuild a session from its log records."""
    if not records:
        raise ProtocolError("cannot replay an empty log")
    first = records[0]
    if first.kind != "session_created":
        raise ProtocolError(f"log must start with session_created, got {first.kind!r}")
    state = SessionState(session_id=first.payload["session_id"])
    for record in records:
        apply_event(state, record)
    return state


# --- wire helpers ---------------------------------------------------------------

_PRIVATE_RESPONSE_KEYS = ("participant_id", "submitted_at")


def redact_for(record: EventRecord, recipient_id: str | None) -> dict[str, Any]:
    """The payload as one recipient may see it.

    Focus responses are private: everyone learns that someone answered and
    when, but selections and totals go only to the submitter (and the log).
    ``recipient_id=None`` means a broadcast to the whole room.
    """
    if record.kind != "focus_response_submitted":
        return record.payload
    if recipient_id is not None and record.payload.get("participant_id") == recipient_id:
        return record.payload
    return {key: record.payload[key] for key in _PRIVATE_RESPONSE_KEYS}


def event_message(session_id: str, record: EventRecord, recipient_id: str | None = None) -> WireMessage:
    payload = dict(redact_for(record, recipient_id))
    payload["at"] = record.at
    return WireMessage(
        type=record.kind, session_id=session_id, payload=payload, seq=record.seq
    )


@dataclass
class CommandResult:
    """What one command produced: sender-only replies plus room broadcasts."""

    reply: list[WireMessage] = field(default_factory=list)
    broadcasts: list[WireMessage] = field(default_factory=list)


# --- the engine -------------------------------------------------------------------

class SessionEngine:
    """Holds live sessions, appends their logs, and serves commands.

    Thread-safe: a per-session lock serializes command handling and ticks,
    so sequence numbers stay gapless no matter how callers interleave.
    """

    def __init__(
        self,
        gateway: GenAiGateway,
        library: PromptLibrary,
        store: EventLogStore,
        default_config: SessionConfig | None = None,
    ):
        self.gateway = gateway
        self.library = library
        self.store = store
        self.default_config = default_config or SessionConfig()
        self._sessions: dict[str, SessionState] = {}
        self._classifiers: dict[str, Any] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    # -- lookup ---------------------------------------------------------------

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    def state(self, session_id: str) -> SessionState:
        with self._registry_lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(f"no session with id {session_id!r}") from None

    def _lock(self, session_id: str) -> threading.RLock:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise UnknownSession(f"no session with id {session_id!r}")
            return self._locks[session_id]

    # -- creation -------------------------------------------------------------

    def create_session(
        self,
        invitation: Invitation,
        now: float,
        session_id: str | None = None,
        config: SessionConfig | None = None,
    ) -> SessionState:
        """Generate the plan and focus tool, then open the session.

        Creation is atomic: the generators run first, and only when both
        succeed is anything registered or written to disk. A failed
        generation leaves no trace.
        """
        sid = check_session_id(session_id or uuid.uuid4().hex[:12])
        cfg = config or self.default_config
        ensure_known_roles(invitation.attendee_roles, cfg.roles)

        with self._registry_lock:
            if sid in self._sessions or self.store.exists(sid):
                raise InvariantViolation(f"session id {sid!r} is already in use")

        plan = generate_initial_plan(self.gateway, self.library, invitation)
        tool = generate_focus_tool(self.gateway, self.library, invitation, cfg.min_features)

        state = SessionState(session_id=sid)
        with self._registry_lock:
            if sid in self._sessions or self.store.exists(sid):
                raise InvariantViolation(f"session id {sid!r} is already in use")
            self._sessions[sid] = state
            self._locks[sid] = threading.RLock()
            self._classifiers[sid] = make_classifier(
                cfg.classifier_mode, self.gateway, self.library, cfg.scripted_verdicts
            )

        with self._locks[sid]:
            self._emit(
                state,
                "session_created",
                {"session_id": sid, "invitation": invitation.to_dict(), "config": cfg.to_dict()},
                now,
            )
            self._emit(state, "plan_generated", {"plan": plan.to_dict()}, now)
            self._emit(state, "focus_tool_ready", {"tool": tool.to_dict()}, now)
        return state

    # -- event plumbing ---------------------------------------------------------

    def _emit(self, state: SessionState, kind: str, payload: dict[str, Any], at: float) -> EventRecord:
        record = EventRecord(seq=state.last_seq + 1, at=at, kind=kind, payload=payload)
        self.store.append(state.session_id, record)
        apply_event(state, record)
        return record

    def catch_up(self, session_id: str, recipient_id: str) -> list[WireMessage]:
        """Every event so far, redacted for one recipient."""
        with self._lock(session_id):
            records = self.store.read(session_id)
        return [event_message(session_id, r, recipient_id) for r in records]

    # -- the clock --------------------------------------------------------------

    def tick(self, session_id: str, now: float) -> list[WireMessage]:
        """Advance time-driven behavior; returns broadcasts.

        Two things happen on ticks: a pre-meeting response deadline fires
        the refinement stage, and an open proposal whose window has elapsed
        commits. Commit records carry ``at = deadline`` regardless of when
        the tick lands, so logs are identical however often a caller polls.
        """
        with self._lock(session_id):
            state = self.state(session_id)
            out: list[EventRecord] = []
            if state.lifecycle in (LIFECYCLE_PRE_MEETING, LIFECYCLE_REFINING):
                out.extend(self._maybe_advance(state, now))
            if state.lifecycle == LIFECYCLE_IN_MEETING and due_for_commit(state.proposal, now):
                out.extend(self._commit_due(state))
            return [event_message(session_id, r) for r in out]

    def _commit_due(self, state: SessionState) -> list[EventRecord]:
        proposal = state.proposal
        committed = mark_committed(proposal)
        records = [
            self._emit(
                state,
                "transition_committed",
                {"proposal": committed.to_dict()},
                proposal.deadline,
            ),
            self._emit(
                state,
                "layout_applied",
                {"phase_index": committed.to_index},
                proposal.deadline,
            ),
        ]
        return records

    def _deadline_passed(self, state: SessionState, now: float) -> bool:
        deadline = state.config.response_deadline_seconds
        return deadline is not None and now >= state.created_at + deadline

    def _maybe_advance(self, state: SessionState, now: float) -> list[EventRecord]:
        """Run the between-meetings stage once its trigger is met.

        Trigger: every joined member has responded, or the response deadline
        elapsed. Each step is guarded by "is it still missing", so a failure
        partway (say, a refinement fixture absent) leaves a log that a later
        tick resumes cleanly instead of double-publishing.
        """
        all_responded = bool(state.members) and all(
            pid in state.responses for pid in state.members
        )
        if not (all_responded or self._deadline_passed(state, now)):
            return []

        out = []
        if state.divergence is None and len(state.responses) >= 2:
            report = compute_divergence(state.focus_tool, state.responses.values())
            out.append(
                self._emit(state, "divergence_published", {"report": report.to_dict()}, now)
            )
        if (
            state.divergence is not None
            and state.divergence.divergent_ids_ranked
            and state.plan.revision == 0
        ):
            refined = refine_plan(
                self.gateway,
                self.library,
                state.invitation,
                state.plan,
                state.focus_tool,
                state.divergence,
                state.config.refinement_top_k,
            )
            out.append(self._emit(state, "plan_refined", {"plan": refined.to_dict()}, now))
        if state.layouts is None:
            layouts = generate_phase_layouts(
                self.gateway, self.library, state.plan, state.config.available_programs
            )
            placed = [place(l) for l in layouts]
            out.append(
                self._emit(
                    state,
                    "layouts_generated",
                    {"layouts": [p.to_dict() for p in placed]},
                    now,
                )
            )
        return out

    # -- commands ----------------------------------------------------------------

    def handle_command(
        self, message: WireMessage, participant_id: str, now: float
    ) -> CommandResult:
        """Validate and execute one client command.

        Raises typed errors; nothing is appended unless the command is
        accepted, so a rejected command never dirties the log.
        """
        if message.type not in COMMAND_TYPES:
            raise ProtocolError(f"unknown command type {message.type!r}")
        if not participant_id or not participant_id.strip():
            raise ProtocolError("commands need a participant id")
        with self._lock(message.session_id):
            state = self.state(message.session_id)
            handler = getattr(self, f"_cmd_{message.type}")
            return handler(state, participant_id, message.payload, now)

    def _require_member(self, state: SessionState, participant_id: str) -> None:
        if participant_id not in state.members:
            raise UnknownParticipant(f"{participant_id!r} has not joined this session")

    def _require_organizer(self, state: SessionState, participant_id: str) -> None:
        self._require_member(state, participant_id)
        if participant_id != state.invitation.organizer_id:
            raise PermissionDenied("only the organizer may do this")

    def _require_lifecycle(self, state: SessionState, *allowed: str) -> None:
        if state.lifecycle not in allowed:
            raise LifecycleViolation(
                f"command not allowed while session is {state.lifecycle!r}"
            )

    def _cmd_join(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_lifecycle(
            state, LIFECYCLE_PRE_MEETING, LIFECYCLE_REFINING, LIFECYCLE_READY, LIFECYCLE_IN_MEETING
        )
        role = payload.get("role")
        if not isinstance(role, str) or not role.strip():
            raise ProtocolError('join needs a string "role"')
        ensure_known_roles([role], state.config.roles)

        result = CommandResult()
        result.reply = [
            event_message(state.session_id, r, participant_id)
            for r in self.store.read(state.session_id)
        ]
        if participant_id in state.members:
            if state.members[participant_id] != role:
                raise InvariantViolation(
                    f"{participant_id!r} already joined as {state.members[participant_id]!r}"
                )
            return result  # rejoin: catch-up only, no new event
        record = self._emit(
            state, "member_joined", {"participant_id": participant_id, "role": role}, now
        )
        result.broadcasts = [event_message(state.session_id, record)]
        return result

    def _cmd_submit_focus_response(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_member(state, participant_id)
        self._require_lifecycle(state, LIFECYCLE_PRE_MEETING)
        selections = payload.get("selections")
        if not isinstance(selections, Mapping):
            raise ProtocolError('submit_focus_response needs a "selections" object')
        response = build_response(
            state.focus_tool,
            participant_id,
            state.members[participant_id],
            selections,
            submitted_at=now,
        )
        record = self._emit(state, "focus_response_submitted", response.to_dict(), now)
        result = CommandResult(
            reply=[event_message(state.session_id, record, participant_id)],
            broadcasts=[event_message(state.session_id, record)],
        )
        for extra in self._maybe_advance(state, now):
            result.broadcasts.append(event_message(state.session_id, extra))
        return result

    def _cmd_start_meeting(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_organizer(state, participant_id)
        self._require_lifecycle(state, LIFECYCLE_READY)
        records = [
            self._emit(state, "meeting_started", {"phase_count": len(state.plan.phases)}, now),
            self._emit(state, "layout_applied", {"phase_index": 0}, now),
        ]
        return CommandResult(
            broadcasts=[event_message(state.session_id, r) for r in records]
        )

    def _cmd_submit_utterance(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_member(state, participant_id)
        self._require_lifecycle(state, LIFECYCLE_IN_MEETING)
        text = payload.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ProtocolError('submit_utterance needs a non-empty "text"')

        # Arrival order is the order: a racing caller's clock may lag the
        # last accepted utterance, so the effective timestamp is clamped.
        at = now
        if state.tracker.last_utterance_at is not None:
            at = max(at, state.tracker.last_utterance_at)
        utterance = Utterance(speaker_id=participant_id, at=at, text=text)
        verdict = self._classifiers[state.session_id].classify(
            utterance, state.plan, state.tracker.current_phase_index
        )
        records = [
            self._emit(
                state,
                "utterance_ingested",
                {"utterance": utterance.to_dict(), "verdict": verdict.to_dict()},
                at,
            )
        ]
        candidate = observe(state.tracker, state.plan, verdict)
        if candidate is not None and (state.proposal is None or not state.proposal.is_open):
            proposal = open_proposal(
                state.proposal,
                f"p{state.proposal_count + 1}",
                state.tracker.current_phase_index,
                candidate,
                at,
                state.config.hotl,
            )
            records.append(
                self._emit(state, "transition_proposed", {"proposal": proposal.to_dict()}, at)
            )
        return CommandResult(
            broadcasts=[event_message(state.session_id, r) for r in records]
        )

    def _cmd_abort_transition(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_lifecycle(state, LIFECYCLE_IN_MEETING)
        proposal_id = payload.get("proposal_id")
        if not isinstance(proposal_id, str):
            raise ProtocolError('abort_transition needs a string "proposal_id"')
        validate_abort(state.proposal, proposal_id, participant_id, state.members, now)
        record = self._emit(
            state,
            "transition_aborted",
            {
                "proposal_id": proposal_id,
                "aborted_by": participant_id,
                "from_index": state.proposal.from_index,
                "to_index": state.proposal.to_index,
            },
            now,
        )
        return CommandResult(broadcasts=[event_message(state.session_id, record)])

    def _cmd_end_meeting(
        self, state: SessionState, participant_id: str, payload: Mapping[str, Any], now: float
    ) -> CommandResult:
        self._require_organizer(state, participant_id)
        self._require_lifecycle(state, LIFECYCLE_IN_MEETING)
        record = self._emit(state, "meeting_ended", {}, now)
        return CommandResult(broadcasts=[event_message(state.session_id, record)])
