// Shared fixtures: a small session's worth of wire events, shaped exactly
// like the server broadcasts them (payload carries "at", envelope carries
// the log seq).

import type {
  FocusTool,
  Pane,
  PhasePlan,
  PlacedLayout,
  Tile,
  TransitionProposal,
  WireMessage,
} from "../src/protocol.js";

export const SESSION = "demo";

export function event(
  type: string,
  seq: number,
  at: number,
  payload: Record<string, unknown>,
): WireMessage {
  return { type, session_id: SESSION, payload: { ...payload, at }, seq };
}

export function errorReply(kind: string, message: string): WireMessage {
  return { type: "error", session_id: SESSION, payload: { kind, message } };
}

export function samplePlan(revision = 0): PhasePlan {
  return {
    goal: "Pick the feature set for the next revision",
    explanation: "Budget talk first, then the contested features",
    revision,
    phases: [
      {
        title: "Introduction",
        description: "Welcome and goal setting",
        encouraged: ["Introduce yourself"],
        discouraged: ["Deep detail"],
        priority: "high",
        allotted_minutes: 5,
        directionality: "directional",
      },
      {
        title: "Discussing Budget",
        description: "Settle the overall price ceiling",
        encouraged: ["Name a number"],
        discouraged: ["Feature wish lists"],
        priority: "high",
        allotted_minutes: 45,
        directionality: "iterative",
      },
      {
        title: "Conclusion and Next Steps",
        description: "Wrap up and assign actions",
        encouraged: ["Assign owners"],
        discouraged: ["New topics"],
        priority: "medium",
        allotted_minutes: 10,
        directionality: "directional",
      },
    ],
  };
}

export function sampleTool(): FocusTool {
  return {
    scenario_text: "Choose which features earn their price",
    min_features: 3,
    features: [
      { id: "noise-cancelling", name: "Noise Cancelling", price: 10 },
      { id: "wireless-charging", name: "Wireless Charging", price: 20 },
      { id: "voice-assistant", name: "Voice Assistant", price: 40 },
    ],
  };
}

function pane(name: string, rect: [number, number, number, number]): Pane {
  const [x, y, w, h] = rect;
  const tile: Tile = { x, y, w, h };
  return { program: { name_or_url: name, rationale: `${name} for this phase` }, tile };
}

export function twoPaneLayout(title: string, minutes: number): PlacedLayout {
  return {
    phase_title: title,
    timer_minutes: minutes,
    panes: [
      pane("PowerPoint", [0, 0, 0.5, 1]),
      pane("Notepad", [0.5, 0, 0.5, 1]),
    ],
  };
}

export function threePaneLayout(title: string, minutes: number): PlacedLayout {
  return {
    phase_title: title,
    timer_minutes: minutes,
    panes: [
      pane("Excel", [0, 0, 0.5, 1]),
      pane("https://example.com/research", [0.5, 0, 0.5, 0.5]),
      pane("Notepad", [0.5, 0.5, 0.5, 0.5]),
    ],
  };
}

export function fivePaneLayout(title: string, minutes: number): PlacedLayout {
  return {
    phase_title: title,
    timer_minutes: minutes,
    panes: [
      pane("PowerPoint", [0, 0, 0.5, 0.5]),
      pane("Excel", [0.5, 0, 0.5, 0.5]),
      pane("Calculator", [2 / 3, 0.5, 1 / 3, 0.5]),
      pane("Whiteboard", [1 / 3, 0.5, 1 / 3, 0.5]),
      pane("Notepad", [0, 0.5, 1 / 3, 0.5]),
    ],
  };
}

export function openProposal(
  id: string,
  fromIndex: number,
  toIndex: number,
  openedAt: number,
): TransitionProposal {
  return {
    proposal_id: id,
    from_index: fromIndex,
    to_index: toIndex,
    opened_at: openedAt,
    deadline: openedAt + 10,
    status: "open",
    aborted_by: null,
  };
}

// Everything up to a started meeting showing the phase 0 layout.
export function meetingUnderway(layouts: PlacedLayout[]): WireMessage[] {
  return [
    event("session_created", 1, 0, {
      session_id: SESSION,
      invitation: {
        text: "Feature planning",
        duration_minutes: 60,
        organizer_id: "amara",
        attendee_roles: ["program_manager", "software_engineer"],
      },
      config: {},
    }),
    event("plan_generated", 2, 0, { plan: samplePlan() }),
    event("focus_tool_ready", 3, 0, { tool: sampleTool() }),
    event("member_joined", 4, 1, { participant_id: "amara", role: "program_manager" }),
    event("member_joined", 5, 2, { participant_id: "bo", role: "software_engineer" }),
    event("layouts_generated", 6, 8, { layouts }),
    event("meeting_started", 7, 10, { phase_count: layouts.length }),
    event("layout_applied", 8, 10, { phase_index: 0 }),
  ];
}
