// The client-side projection of a session. Every visible change flows
// through applyEvent, and applyEvent only reads server broadcasts: the
// client never guesses at a commit or advances a phase on its own.

import type {
  DivergenceReport,
  FocusTool,
  PhasePlan,
  PlacedLayout,
  TransitionProposal,
  WireMessage,
} from "./protocol.js";

export type Lifecycle = "pre_meeting" | "ready" | "in_meeting" | "ended";

export interface SubmissionNote {
  participantId: string;
  submittedAt: number;
}

export interface UtteranceNote {
  speakerId: string;
  at: number;
  text: string;
}

export interface ClientView {
  lifecycle: Lifecycle;
  clock: number;
  lastSeq: number;
  organizerId: string | null;
  plan: PhasePlan | null;
  tool: FocusTool | null;
  divergence: DivergenceReport | null;
  layouts: PlacedLayout[];
  appliedLayoutIndex: number | null;
  proposal: TransitionProposal | null;
  members: Record<string, string>;
  submissions: SubmissionNote[];
  transcript: UtteranceNote[];
  myTotal: number | null;
  mySubmittedAt: number | null;
}

export function emptyView(): ClientView {
  return {
    lifecycle: "pre_meeting",
    clock: 0,
    lastSeq: 0,
    organizerId: null,
    plan: null,
    tool: null,
    divergence: null,
    layouts: [],
    appliedLayoutIndex: null,
    proposal: null,
    members: {},
    submissions: [],
    transcript: [],
    myTotal: null,
    mySubmittedAt: null,
  };
}

export function applyEvent(view: ClientView, message: WireMessage, me: string): void {
  if (typeof message.seq === "number") {
    view.lastSeq = message.seq;
  }
  const p = message.payload as Record<string, any>;
  if (typeof p.at === "number") {
    view.clock = p.at;
  }

  switch (message.type) {
    case "session_created":
      view.lifecycle = "pre_meeting";
      view.organizerId = p.invitation?.organizer_id ?? null;
      break;
    case "plan_generated":
    case "plan_refined":
      view.plan = p.plan as PhasePlan;
      break;
    case "focus_tool_ready":
      view.tool = p.tool as FocusTool;
      break;
    case "member_joined":
      view.members[p.participant_id] = p.role;
      break;
    case "focus_response_submitted":
      // Broadcasts to the room are redacted down to who and when; only
      // the submitter's own copy carries selections and the total.
      view.submissions.push({
        participantId: p.participant_id,
        submittedAt: p.submitted_at,
      });
      if (p.participant_id === me && typeof p.total_price === "number") {
        view.myTotal = p.total_price;
        view.mySubmittedAt = p.submitted_at;
      }
      break;
    case "divergence_published":
      view.divergence = p.report as DivergenceReport;
      break;
    case "layouts_generated":
      view.layouts = p.layouts as PlacedLayout[];
      view.lifecycle = "ready";
      break;
    case "meeting_started":
      view.lifecycle = "in_meeting";
      break;
    case "layout_applied":
      view.appliedLayoutIndex = p.phase_index;
      break;
    case "utterance_ingested":
      view.transcript.push({
        speakerId: p.utterance.speaker_id,
        at: p.utterance.at,
        text: p.utterance.text,
      });
      break;
    case "transition_proposed":
      view.proposal = p.proposal as TransitionProposal;
      break;
    case "transition_aborted":
      if (view.proposal !== null && view.proposal.proposal_id === p.proposal_id) {
        view.proposal = { ...view.proposal, status: "aborted", aborted_by: p.aborted_by };
      }
      break;
    case "transition_committed":
      view.proposal = p.proposal as TransitionProposal;
      break;
    case "meeting_ended":
      view.lifecycle = "ended";
      view.proposal = null;
      break;
    default:
      // an event kind this client does not know yet; ignore it
      break;
  }
}

export function currentLayout(view: ClientView): PlacedLayout | null {
  if (view.appliedLayoutIndex === null) {
    return null;
  }
  return view.layouts[view.appliedLayoutIndex] ?? null;
}
