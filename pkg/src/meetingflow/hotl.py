"""Human-on-the-loop phase transitions.

The engine never moves the meeting on its own say-so. A transition candidate
opens a proposal with a short abort window; the proposal is visible to every
participant, and any single participant can veto it before the deadline. If
nobody objects, the next tick at or after the deadline commits it. A veto
installs a cooldown on the target phase so the same suggestion does not
immediately come back.

Only one proposal can be open per session at a time. All timing comes from
an injected clock value, never from the wall directly, so simulations and
replays are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Collection, Mapping

from .errors import (
    DeadlinePassed,
    InvariantViolation,
    ProposalAlreadyOpen,
    ProposalNotOpen,
    UnknownParticipant,
)

PROPOSAL_OPEN = "open"
PROPOSAL_ABORTED = "aborted"
PROPOSAL_COMMITTED = "committed"

_STATUSES = (PROPOSAL_OPEN, PROPOSAL_ABORTED, PROPOSAL_COMMITTED)


@dataclass(frozen=True)
class HotlConfig:
    proposal_window_seconds: float = 10.0
    abort_cooldown_seconds: float = 60.0
    abort_cooldown_utterances: int = 5

    def __post_init__(self):
        if self.proposal_window_seconds <= 0:
            raise InvariantViolation("proposal window must be positive")
        if self.abort_cooldown_seconds <= 0 or self.abort_cooldown_utterances <= 0:
            raise InvariantViolation("abort cooldown bounds must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "proposal_window_seconds": self.proposal_window_seconds,
            "abort_cooldown_seconds": self.abort_cooldown_seconds,
            "abort_cooldown_utterances": self.abort_cooldown_utterances,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HotlConfig":
        return cls(
            proposal_window_seconds=data["proposal_window_seconds"],
            abort_cooldown_seconds=data["abort_cooldown_seconds"],
            abort_cooldown_utterances=data["abort_cooldown_utterances"],
        )


@dataclass(frozen=True)
class TransitionProposal:
    proposal_id: str
    from_index: int
    to_index: int
    opened_at: float
    deadline: float
    status: str = PROPOSAL_OPEN
    aborted_by: str | None = None

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise InvariantViolation(f"unknown proposal status {self.status!r}")
        if self.deadline <= self.opened_at:
            raise InvariantViolation("proposal deadline must be after opened_at")
        if self.from_index == self.to_index:
            raise InvariantViolation("proposal must change the phase")
        if (self.status == PROPOSAL_ABORTED) != (self.aborted_by is not None):
            raise InvariantViolation("aborted_by is set exactly when status is aborted")

    @property
    def is_open(self) -> bool:
        return self.status == PROPOSAL_OPEN

    def to_dict(self) -> dict[str, Any]:
        return {
            "proposal_id": self.proposal_id,
            "from_index": self.from_index,
            "to_index": self.to_index,
            "opened_at": self.opened_at,
            "deadline": self.deadline,
            "status": self.status,
            "aborted_by": self.aborted_by,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TransitionProposal":
        return cls(
            proposal_id=data["proposal_id"],
            from_index=data["from_index"],
            to_index=data["to_index"],
            opened_at=data["opened_at"],
            deadline=data["deadline"],
            status=data["status"],
            aborted_by=data.get("aborted_by"),
        )


def open_proposal(
    existing: TransitionProposal | None,
    proposal_id: str,
    from_index: int,
    to_index: int,
    now: float,
    config: HotlConfig,
) -> TransitionProposal:
    """Open a new proposal; at most one may be open at a time."""
    if existing is not None and existing.is_open:
        raise ProposalAlreadyOpen(
            f"proposal {existing.proposal_id} is still open until {existing.deadline}"
        )
    return TransitionProposal(
        proposal_id=proposal_id,
        from_index=from_index,
        to_index=to_index,
        opened_at=now,
        deadline=now + config.proposal_window_seconds,
    )


def validate_abort(
    proposal: TransitionProposal | None,
    proposal_id: str,
    participant_id: str,
    members: Collection[str],
    now: float,
) -> None:
    """Check an abort request; raises when it cannot proceed.

    Aborting is first come, first served: the window is open strictly
    before the deadline, and membership is required.
    """
    if participant_id not in members:
        raise UnknownParticipant(f"{participant_id!r} is not a member of this session")
    if proposal is None or not proposal.is_open or proposal.proposal_id != proposal_id:
        raise ProposalNotOpen(f"no open proposal with id {proposal_id!r}")
    if now >= proposal.deadline:
        raise DeadlinePassed(
            f"proposal {proposal_id} deadline {proposal.deadline} has passed (now {now})"
        )


def mark_aborted(proposal: TransitionProposal, participant_id: str) -> TransitionProposal:
    return replace(proposal, status=PROPOSAL_ABORTED, aborted_by=participant_id)


def mark_committed(proposal: TransitionProposal) -> TransitionProposal:
    return replace(proposal, status=PROPOSAL_COMMITTED)


def due_for_commit(proposal: TransitionProposal | None, now: float) -> bool:
    """True when an open proposal's abort window has fully elapsed."""
    return proposal is not None and proposal.is_open and now >= proposal.deadline
