// Wire types shared with the session server. Field names match the JSON
// on the socket exactly, so parsed payloads can be used as-is.

export interface WireMessage {
  type: string;
  session_id: string;
  payload: Record<string, unknown>;
  seq?: number;
}

export interface Tile {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface ProgramAssignment {
  name_or_url: string;
  rationale: string;
}

export interface Pane {
  program: ProgramAssignment;
  tile: Tile;
}

export interface PlacedLayout {
  phase_title: string;
  timer_minutes: number;
  panes: Pane[];
}

export interface Phase {
  title: string;
  description: string;
  encouraged: string[];
  discouraged: string[];
  priority: "high" | "medium" | "low";
  allotted_minutes: number;
  directionality: "directional" | "iterative";
}

export interface PhasePlan {
  goal: string;
  explanation: string;
  revision: number;
  phases: Phase[];
}

export interface FeatureItem {
  id: string;
  name: string;
  price: number;
}

export interface FocusTool {
  scenario_text: string;
  min_features: number;
  features: FeatureItem[];
}

export type Selection = "include" | "exclude";

export type ProposalStatus = "open" | "committed" | "aborted";

export interface TransitionProposal {
  proposal_id: string;
  from_index: number;
  to_index: number;
  opened_at: number;
  deadline: number;
  status: ProposalStatus;
  aborted_by: string | null;
}

export interface FeatureTally {
  feature_id: string;
  include_count: number;
  exclude_count: number;
  divergent: boolean;
}

export interface DivergenceReport {
  tallies: FeatureTally[];
  divergent_ids_ranked: string[];
  response_count: number;
}

export interface ErrorPayload {
  kind: string;
  message: string;
}

export function parseWireMessage(raw: string): WireMessage {
  const data: unknown = JSON.parse(raw);
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new Error("wire message must be a JSON object");
  }
  const rec = data as Record<string, unknown>;
  if (typeof rec.type !== "string" || typeof rec.session_id !== "string") {
    throw new Error('wire message needs a string "type" and "session_id"');
  }
  const payload = rec.payload ?? {};
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new Error("wire message payload must be an object");
  }
  return {
    type: rec.type,
    session_id: rec.session_id,
    payload: payload as Record<string, unknown>,
    seq: typeof rec.seq === "number" ? rec.seq : undefined,
  };
}

function command(type: string, sessionId: string, payload: Record<string, unknown>): WireMessage {
  return { type, session_id: sessionId, payload };
}

export function joinCommand(sessionId: string, participantId: string, role: string): WireMessage {
  return command("join", sessionId, { participant_id: participantId, role });
}

export function focusResponseCommand(
  sessionId: string,
  selections: Record<string, Selection>,
): WireMessage {
  return command("submit_focus_response", sessionId, { selections });
}

export function utteranceCommand(sessionId: string, text: string): WireMessage {
  return command("submit_utterance", sessionId, { text });
}

export function abortCommand(sessionId: string, proposalId: string): WireMessage {
  return command("abort_transition", sessionId, { proposal_id: proposalId });
}

export function startMeetingCommand(sessionId: string): WireMessage {
  return command("start_meeting", sessionId, {});
}

export function endMeetingCommand(sessionId: string): WireMessage {
  return command("end_meeting", sessionId, {});
}
