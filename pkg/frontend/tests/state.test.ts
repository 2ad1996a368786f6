import { describe, expect, it } from "vitest";

import { applyEvent, currentLayout, emptyView } from "../src/state.js";
import {
  event,
  meetingUnderway,
  openProposal,
  samplePlan,
  threePaneLayout,
  twoPaneLayout,
} from "./helpers.js";

const LAYOUTS = [
  twoPaneLayout("Introduction", 5),
  threePaneLayout("Discussing Budget", 45),
  twoPaneLayout("Conclusion and Next Steps", 10),
];

function viewAfter(messages: ReturnType<typeof event>[], me = "bo") {
  const view = emptyView();
  for (const message of messages) {
    applyEvent(view, message, me);
  }
  return view;
}

describe("event folding", () => {
  it("replays a whole meeting into the expected projection", () => {
    const view = viewAfter(meetingUnderway(LAYOUTS));
    expect(view.lifecycle).toBe("in_meeting");
    expect(view.organizerId).toBe("amara");
    expect(view.plan?.phases).toHaveLength(3);
    expect(view.members).toEqual({ amara: "program_manager", bo: "software_engineer" });
    expect(view.appliedLayoutIndex).toBe(0);
    expect(currentLayout(view)?.phase_title).toBe("Introduction");
    expect(view.lastSeq).toBe(8);
    expect(view.clock).toBe(10);
  });

  it("tracks lifecycle through ready and ended", () => {
    const view = emptyView();
    applyEvent(view, event("session_created", 1, 0, { session_id: "demo", invitation: {} }), "bo");
    expect(view.lifecycle).toBe("pre_meeting");
    applyEvent(view, event("layouts_generated", 2, 5, { layouts: LAYOUTS }), "bo");
    expect(view.lifecycle).toBe("ready");
    applyEvent(view, event("meeting_started", 3, 9, { phase_count: 3 }), "bo");
    applyEvent(view, event("meeting_ended", 4, 60, {}), "bo");
    expect(view.lifecycle).toBe("ended");
    expect(view.proposal).toBeNull();
  });

  it("keeps my total only from my own acknowledged response", () => {
    const view = emptyView();
    applyEvent(
      view,
      event("focus_response_submitted", 4, 5, { participant_id: "amara", submitted_at: 5 }),
      "bo",
    );
    expect(view.myTotal).toBeNull();
    expect(view.submissions).toEqual([{ participantId: "amara", submittedAt: 5 }]);

    applyEvent(
      view,
      event("focus_response_submitted", 5, 6, {
        participant_id: "bo",
        role: "software_engineer",
        selections: { "noise-cancelling": "include" },
        total_price: 10,
        submitted_at: 6,
      }),
      "bo",
    );
    expect(view.myTotal).toBe(10);
    expect(view.mySubmittedAt).toBe(6);
  });

  it("updates the plan in place when a refinement lands", () => {
    const view = viewAfter([event("plan_generated", 1, 0, { plan: samplePlan() })]);
    expect(view.plan?.revision).toBe(0);
    applyEvent(view, event("plan_refined", 2, 7, { plan: samplePlan(1) }), "bo");
    expect(view.plan?.revision).toBe(1);
  });

  it("marks the open proposal aborted only when the ids match", () => {
    const view = viewAfter([
      event("transition_proposed", 9, 20, { proposal: openProposal("p1", 0, 1, 20) }),
    ]);
    applyEvent(
      view,
      event("transition_aborted", 10, 23, {
        proposal_id: "p9",
        aborted_by: "bo",
        from_index: 0,
        to_index: 1,
      }),
      "bo",
    );
    expect(view.proposal?.status).toBe("open");

    applyEvent(
      view,
      event("transition_aborted", 11, 24, {
        proposal_id: "p1",
        aborted_by: "bo",
        from_index: 0,
        to_index: 1,
      }),
      "bo",
    );
    expect(view.proposal?.status).toBe("aborted");
    expect(view.proposal?.aborted_by).toBe("bo");
  });

  it("moves the applied layout only on layout_applied", () => {
    const view = viewAfter(meetingUnderway(LAYOUTS));
    const committed = { ...openProposal("p1", 0, 1, 20), status: "committed" as const };
    applyEvent(view, event("transition_committed", 9, 30, { proposal: committed }), "bo");
    expect(view.appliedLayoutIndex).toBe(0);
    applyEvent(view, event("layout_applied", 10, 30, { phase_index: 1 }), "bo");
    expect(view.appliedLayoutIndex).toBe(1);
    expect(currentLayout(view)?.phase_title).toBe("Discussing Budget");
  });

  it("collects the transcript and ignores unknown kinds", () => {
    const view = viewAfter(meetingUnderway(LAYOUTS));
    applyEvent(
      view,
      event("utterance_ingested", 9, 12, {
        utterance: { speaker_id: "bo", at: 12, text: "Shall we talk numbers?" },
        verdict: { phase_index: 1, confidence: 0.4, source: "keyword" },
      }),
      "bo",
    );
    expect(view.transcript).toEqual([{ speakerId: "bo", at: 12, text: "Shall we talk numbers?" }]);

    const before = JSON.stringify(view);
    applyEvent(view, event("something_new", 10, 13, { whatever: true }), "bo");
    const after = { ...JSON.parse(before), lastSeq: 10, clock: 13 };
    expect(JSON.parse(JSON.stringify(view))).toEqual(after);
  });
});
