import pytest

from meetingflow.errors import (
    DeadlinePassed,
    InvariantViolation,
    ProposalAlreadyOpen,
    ProposalNotOpen,
    UnknownParticipant,
)
from meetingflow.hotl import (
    PROPOSAL_ABORTED,
    PROPOSAL_COMMITTED,
    HotlConfig,
    TransitionProposal,
    due_for_commit,
    mark_aborted,
    mark_committed,
    open_proposal,
    validate_abort,
)

MEMBERS = {"amara", "bo", "chen"}


def open_at(now=100.0, existing=None, window=10.0):
    return open_proposal(
        existing,
        proposal_id="p1",
        from_index=0,
        to_index=2,
        now=now,
        config=HotlConfig(proposal_window_seconds=window),
    )


def test_open_proposal_sets_deadline_from_window():
    proposal = open_at(now=100.0, window=10.0)
    assert proposal.opened_at == 100.0
    assert proposal.deadline == 110.0
    assert proposal.is_open


def test_single_open_proposal_rule():
    first = open_at()
    with pytest.raises(ProposalAlreadyOpen):
        open_proposal(first, "p2", 0, 3, 101.0, HotlConfig())


def test_closed_proposals_do_not_block_new_ones():
    first = mark_aborted(open_at(), "bo")
    second = open_proposal(first, "p2", 0, 3, 150.0, HotlConfig())
    assert second.proposal_id == "p2"
    third = open_proposal(mark_committed(second), "p3", 3, 1, 200.0, HotlConfig())
    assert third.is_open


def test_proposal_invariants():
    with pytest.raises(InvariantViolation):
        TransitionProposal("p1", 1, 1, 10.0, 20.0)  # no-op move
    with pytest.raises(InvariantViolation):
        TransitionProposal("p1", 0, 1, 10.0, 10.0)  # empty window
    with pytest.raises(InvariantViolation):
        TransitionProposal("p1", 0, 1, 10.0, 20.0, status="aborted")  # nobody aborted it
    with pytest.raises(InvariantViolation):
        TransitionProposal("p1", 0, 1, 10.0, 20.0, status="open", aborted_by="bo")


def test_abort_inside_window_passes_validation():
    proposal = open_at(now=100.0)
    validate_abort(proposal, "p1", "bo", MEMBERS, now=109.9)


def test_abort_at_deadline_is_too_late():
    proposal = open_at(now=100.0)
    with pytest.raises(DeadlinePassed):
        validate_abort(proposal, "p1", "bo", MEMBERS, now=110.0)


def test_abort_needs_membership():
    proposal = open_at()
    with pytest.raises(UnknownParticipant):
        validate_abort(proposal, "p1", "mallory", MEMBERS, now=105.0)


def test_abort_needs_an_open_matching_proposal():
    with pytest.raises(ProposalNotOpen):
        validate_abort(None, "p1", "bo", MEMBERS, now=105.0)
    proposal = open_at()
    with pytest.raises(ProposalNotOpen):
        validate_abort(proposal, "p9", "bo", MEMBERS, now=105.0)
    with pytest.raises(ProposalNotOpen):
        validate_abort(mark_aborted(proposal, "chen"), "p1", "bo", MEMBERS, now=105.0)


def test_mark_aborted_and_committed():
    proposal = open_at()
    aborted = mark_aborted(proposal, "chen")
    assert aborted.status == PROPOSAL_ABORTED
    assert aborted.aborted_by == "chen"
    committed = mark_committed(proposal)
    assert committed.status == PROPOSAL_COMMITTED
    assert committed.aborted_by is None


def test_due_for_commit_boundary():
    proposal = open_at(now=100.0)
    assert not due_for_commit(proposal, 109.999)
    assert due_for_commit(proposal, 110.0)  # exactly at the deadline
    assert due_for_commit(proposal, 200.0)
    assert not due_for_commit(mark_aborted(proposal, "bo"), 200.0)
    assert not due_for_commit(None, 200.0)


def test_round_trip():
    proposal = mark_aborted(open_at(), "bo")
    assert TransitionProposal.from_dict(proposal.to_dict()) == proposal


def test_config_bounds():
    with pytest.raises(InvariantViolation):
        HotlConfig(proposal_window_seconds=0)
    with pytest.raises(InvariantViolation):
        HotlConfig(abort_cooldown_utterances=0)
    cfg = HotlConfig()
    assert cfg.proposal_window_seconds == 10.0
    assert cfg.abort_cooldown_seconds == 60.0
    assert cfg.abort_cooldown_utterances == 5
