"""Scripted end-to-end meetings on a virtual clock.

A scenario file is a JSON script: who joins when, how everyone votes, what
gets said at which second, and which proposals get vetoed. The runner
drives a real engine through the same command path the server uses, but
with scripted time, so a run is exactly reproducible: same script, same
fixtures, same bytes in the event log.

Aborts are scheduled by proposal ordinal ("veto the third proposal"),
since proposal ids do not exist until the meeting produces them. The
scheduled veto fires one second after the proposal opens.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import ScenarioInvalid
from .events import EventRecord, WireMessage
from .focus import EXCLUDE, INCLUDE
from .model import Invitation
from .session import SessionEngine, merge_session_config

ABORT_DELAY_SECONDS = 1.0


@dataclass(frozen=True)
class ScenarioMember:
    id: str
    role: str
    joins_at: float


@dataclass(frozen=True)
class ScenarioUtterance:
    speaker: str
    at: float
    text: str


@dataclass(frozen=True)
class ScenarioAbort:
    proposal_ordinal: int
    by: str


@dataclass(frozen=True)
class ScenarioScript:
    session_id: str
    invitation: Invitation
    members: tuple[ScenarioMember, ...]
    vote_default: str
    vote_overrides: Mapping[str, Mapping[str, str]]
    vote_submit_at: Mapping[str, float]
    utterances: tuple[ScenarioUtterance, ...]
    aborts: tuple[ScenarioAbort, ...]
    start_meeting_at: float | None
    end_meeting_at: float | None
    config_overrides: Mapping[str, Any]

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioScript":
        known = {
            "session_id", "invitation", "members", "focus_votes", "utterances",
            "aborts", "start_meeting_at", "end_meeting_at", "config",
        }
        unknown = set(data) - known
        if unknown:
            raise ScenarioInvalid(f"unknown scenario keys: {sorted(unknown)}")
        for required in ("session_id", "invitation", "members"):
            if required not in data:
                raise ScenarioInvalid(f'scenario needs "{required}"')

        try:
            invitation = Invitation.from_dict(data["invitation"])
        except (KeyError, TypeError) as exc:
            raise ScenarioInvalid(f"bad invitation: {exc}") from exc

        members = []
        ids = set()
        for raw in data["members"]:
            member = ScenarioMember(
                id=raw["id"], role=raw["role"], joins_at=float(raw.get("joins_at", 0.0))
            )
            if member.id in ids:
                raise ScenarioInvalid(f"duplicate member id {member.id!r}")
            ids.add(member.id)
            members.append(member)
        if not members:
            raise ScenarioInvalid("scenario needs at least one member")

        votes = data.get("focus_votes", {})
        default = votes.get("default", INCLUDE)
        if default not in (INCLUDE, EXCLUDE):
            raise ScenarioInvalid(f"vote default must be include or exclude, got {default!r}")
        overrides = votes.get("overrides", {})
        submit_at = {pid: float(t) for pid, t in votes.get("submit_at", {}).items()}
        for pid in list(overrides) + list(submit_at):
            if pid not in ids:
                raise ScenarioInvalid(f"votes reference unknown member {pid!r}")
        for pid, per_feature in overrides.items():
            for fid, choice in per_feature.items():
                if choice not in (INCLUDE, EXCLUDE):
                    raise ScenarioInvalid(
                        f"override for {pid!r}/{fid!r} must be include or exclude"
                    )

        utterances = []
        for raw in data.get("utterances", ()):
            utt = ScenarioUtterance(
                speaker=raw["speaker"], at=float(raw["at"]), text=raw["text"]
            )
            if utt.speaker not in ids:
                raise ScenarioInvalid(f"utterance speaker {utt.speaker!r} is not a member")
            utterances.append(utt)

        aborts = []
        seen_ordinals = set()
        for raw in data.get("aborts", ()):
            ordinal = raw["proposal_ordinal"]
            if not isinstance(ordinal, int) or ordinal < 1:
                raise ScenarioInvalid("abort proposal_ordinal must be a positive integer")
            if ordinal in seen_ordinals:
                raise ScenarioInvalid(f"duplicate abort for proposal {ordinal}")
            seen_ordinals.add(ordinal)
            if raw["by"] not in ids:
                raise ScenarioInvalid(f"abort actor {raw['by']!r} is not a member")
            aborts.append(ScenarioAbort(proposal_ordinal=ordinal, by=raw["by"]))

        start_at = data.get("start_meeting_at")
        end_at = data.get("end_meeting_at")
        return cls(
            session_id=data["session_id"],
            invitation=invitation,
            members=tuple(members),
            vote_default=default,
            vote_overrides=overrides,
            vote_submit_at=submit_at,
            utterances=tuple(utterances),
            aborts=tuple(aborts),
            start_meeting_at=None if start_at is None else float(start_at),
            end_meeting_at=None if end_at is None else float(end_at),
            config_overrides=data.get("config", {}),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioScript":
        p = Path(path)
        if not p.is_file():
            raise ScenarioInvalid(f"scenario file not found: {p}")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ScenarioInvalid(f"{p} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class ScenarioOutcome:
    session_id: str
    event_count: int
    committed_transitions: int
    aborted_transitions: int
    final_lifecycle: str
    log_path: Path
    timeline_path: Path | None


def _summary(record: EventRecord) -> str:
    p = record.payload
    kind = record.kind
    if kind == "session_created":
        inv = p["invitation"]
        return f"organizer={inv['organizer_id']} duration={inv['duration_minutes']}m"
    if kind == "member_joined":
        return f"{p['participant_id']} joined as {p['role']}"
    if kind == "plan_generated":
        plan = p["plan"]
        total = sum(ph["allotted_minutes"] for ph in plan["phases"])
        return f"rev {plan['revision']}: {len(plan['phases'])} phases, {total} minutes"
    if kind == "focus_tool_ready":
        return f"{len(p['tool']['features'])} features to vote on"
    if kind == "focus_response_submitted":
        return f"response from {p['participant_id']}"
    if kind == "divergence_published":
        ranked = p["report"]["divergent_ids_ranked"]
        listing = ", ".join(ranked) if ranked else "none"
        return f"{p['report']['response_count']} responses, contested: {listing}"
    if kind == "plan_refined":
        plan = p["plan"]
        return f"rev {plan['revision']}: {len(plan['phases'])} phases"
    if kind == "layouts_generated":
        return f"{len(p['layouts'])} phase layouts"
    if kind == "meeting_started":
        return f"{p['phase_count']} phases on the clock"
    if kind == "utterance_ingested":
        u, v = p["utterance"], p["verdict"]
        return (
            f"{u['speaker_id']}: {u['text']!r} -> phase "
            f"{v['predicted_phase_index']} ({v['classifier_id']})"
        )
    if kind == "transition_proposed":
        pr = p["proposal"]
        return (
            f"{pr['proposal_id']}: phase {pr['from_index']} -> {pr['to_index']}, "
            f"abort window closes {pr['deadline']:g}"
        )
    if kind == "transition_aborted":
        return f"{p['proposal_id']} vetoed by {p['aborted_by']}"
    if kind == "transition_committed":
        pr = p["proposal"]
        return f"{pr['proposal_id']}: now in phase {pr['to_index']}"
    if kind == "layout_applied":
        return f"screen set for phase {p['phase_index']}"
    if kind == "meeting_ended":
        return "meeting ended"
    return ""


def format_timeline(records: list[EventRecord]) -> str:
    lines = [
        f"[{r.at:9.1f}] #{r.seq:<4d} {r.kind:<26} {_summary(r)}".rstrip()
        for r in records
    ]
    return "\n".join(lines) + "\n"


def run_scenario(
    script: ScenarioScript,
    engine: SessionEngine,
    timeline_path: str | Path | None = None,
) -> ScenarioOutcome:
    """Execute a script against an engine; raises on the first failure."""
    sid = script.session_id
    config = None
    if script.config_overrides:
        config = merge_session_config(engine.default_config, script.config_overrides)
    engine.create_session(script.invitation, now=0.0, session_id=sid, config=config)

    counter = 0
    queue: list[tuple[float, int, Callable[[float], None]]] = []

    def push(at: float, fn: Callable[[float], None]) -> None:
        nonlocal counter
        counter += 1
        heapq.heappush(queue, (at, counter, fn))

    def command(type_: str, who: str, payload: dict) -> Callable[[float], None]:
        def run(at: float) -> None:
            engine.handle_command(
                WireMessage(type=type_, session_id=sid, payload=payload), who, at
            )
        return run

    for member in script.members:
        push(member.joins_at, command("join", member.id, {"role": member.role}))

    def vote(member_id: str) -> Callable[[float], None]:
        def run(at: float) -> None:
            tool = engine.state(sid).focus_tool
            selections = {fid: script.vote_default for fid in tool.feature_ids}
            selections.update(script.vote_overrides.get(member_id, {}))
            engine.handle_command(
                WireMessage(
                    type="submit_focus_response",
                    session_id=sid,
                    payload={"selections": selections},
                ),
                member_id,
                at,
            )
        return run

    for pid, at in sorted(script.vote_submit_at.items(), key=lambda kv: (kv[1], kv[0])):
        push(at, vote(pid))

    if script.start_meeting_at is not None:
        push(
            script.start_meeting_at,
            command("start_meeting", script.invitation.organizer_id, {}),
        )

    for utt in script.utterances:
        push(utt.at, command("submit_utterance", utt.speaker, {"text": utt.text}))

    if script.end_meeting_at is not None:
        push(
            script.end_meeting_at,
            command("end_meeting", script.invitation.organizer_id, {}),
        )

    # Vetoes wait until their proposal actually exists.
    pending_aborts = {a.proposal_ordinal: a.by for a in script.aborts}

    def watch_proposals(seen: int) -> int:
        state = engine.state(sid)
        if state.proposal_count > seen and state.proposal is not None:
            ordinal = state.proposal_count
            actor = pending_aborts.pop(ordinal, None)
            if actor is not None:
                proposal_id = state.proposal.proposal_id
                push(
                    state.proposal.opened_at + ABORT_DELAY_SECONDS,
                    command("abort_transition", actor, {"proposal_id": proposal_id}),
                )
        return state.proposal_count

    seen_proposals = 0
    while queue:
        at, _, fn = heapq.heappop(queue)
        engine.tick(sid, at)
        fn(at)
        seen_proposals = watch_proposals(seen_proposals)

    records = engine.store.read(sid)
    timeline = None
    if timeline_path is not None:
        timeline = Path(timeline_path)
        timeline.parent.mkdir(parents=True, exist_ok=True)
        timeline.write_text(format_timeline(records), encoding="utf-8")

    kinds = [r.kind for r in records]
    return ScenarioOutcome(
        session_id=sid,
        event_count=len(records),
        committed_transitions=kinds.count("transition_committed"),
        aborted_transitions=kinds.count("transition_aborted"),
        final_lifecycle=engine.state(sid).lifecycle,
        log_path=engine.store.path(sid),
        timeline_path=timeline,
    )
