// Wires the panels to one session socket. All state lives in a ClientView
// that only server events mutate; every render pass reads from it.

import { SocketLink, type ConnectionStatus } from "./connection.js";
import { FocusToolPanel, missingIdsFromError } from "./focusTool.js";
import { LayoutStage } from "./layout.js";
import {
  abortCommand,
  endMeetingCommand,
  focusResponseCommand,
  joinCommand,
  startMeetingCommand,
  utteranceCommand,
  type WireMessage,
} from "./protocol.js";
import { ProposalBanner } from "./proposal.js";
import { applyEvent, currentLayout, emptyView, type ClientView } from "./state.js";
import { UtteranceBox } from "./utterance.js";

export interface Sender {
  send(message: WireMessage): void;
}

export class MeetingApp {
  readonly view: ClientView = emptyView();
  private sessionId = "";
  private me = "";
  private status: ConnectionStatus = "closed";

  private statusLine: HTMLElement;
  private planPanel: HTMLElement;
  private notices: HTMLElement;
  private controls: HTMLElement;
  private stage: LayoutStage;
  private focusPanel: FocusToolPanel;
  private banner: ProposalBanner;
  private utteranceBox: UtteranceBox;

  constructor(
    root: HTMLElement,
    private sender: Sender,
  ) {
    this.statusLine = mustFind(root, ".status-line");
    this.planPanel = mustFind(root, ".plan-panel");
    this.notices = mustFind(root, ".notices");
    this.controls = mustFind(root, ".organizer-controls");
    this.stage = new LayoutStage(mustFind(root, ".layout-stage"));
    this.focusPanel = new FocusToolPanel(mustFind(root, ".focus-panel"), (selections) => {
      this.sender.send(focusResponseCommand(this.sessionId, selections));
    });
    this.banner = new ProposalBanner(mustFind(root, ".proposal-banner"), (proposalId) => {
      this.sender.send(abortCommand(this.sessionId, proposalId));
    });
    this.utteranceBox = new UtteranceBox(mustFind(root, ".utterance-bar"), (text) => {
      this.sender.send(utteranceCommand(this.sessionId, text));
    });
  }

  join(sessionId: string, participantId: string, role: string): void {
    this.sessionId = sessionId;
    this.me = participantId;
    this.sender.send(joinCommand(sessionId, participantId, role));
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.renderStatus();
  }

  receive(message: WireMessage): void {
    if (message.type === "error") {
      this.showError(message.payload as { kind?: string; message?: string });
      return;
    }
    applyEvent(this.view, message, this.me);
    this.render();
  }

  resize(width: number, height: number): void {
    this.stage.resize(width, height);
    this.render();
  }

  tick(now: number): void {
    this.banner.tick(now);
  }

  render(): void {
    this.renderStatus();
    this.renderPlan();
    this.renderControls();
    this.stage.render(currentLayout(this.view), Object.keys(this.view.members));
    this.focusPanel.render(this.view);
    this.banner.render(this.view, this.view.clock);
    this.utteranceBox.render(this.view.lifecycle);
  }

  private showError(payload: { kind?: string; message?: string }): void {
    const kind = payload.kind ?? "Error";
    const message = payload.message ?? "";
    if (kind === "IncompleteSelection") {
      this.focusPanel.markMissing(missingIdsFromError(message));
    }
    const note = document.createElement("div");
    note.className = "notice";
    note.dataset.kind = kind;
    note.textContent = kind === "DeadlinePassed" ? `Too late to abort: ${message}` : message;
    this.notices.appendChild(note);
    while (this.notices.childElementCount > 4) {
      this.notices.firstElementChild?.remove();
    }
  }

  private renderStatus(): void {
    this.statusLine.textContent = `${this.status} · ${this.view.lifecycle}`;
  }

  private renderPlan(): void {
    this.planPanel.textContent = "";
    const plan = this.view.plan;
    if (plan === null) {
      return;
    }
    const goal = document.createElement("div");
    goal.className = "plan-goal";
    goal.textContent = plan.goal;
    this.planPanel.appendChild(goal);
    if (plan.revision > 0) {
      const badge = document.createElement("span");
      badge.className = "plan-revision";
      badge.textContent = `revised ×${plan.revision}`;
      this.planPanel.appendChild(badge);
    }
    const list = document.createElement("ol");
    list.className = "plan-phases";
    plan.phases.forEach((phase, index) => {
      const item = document.createElement("li");
      item.textContent = `${phase.title} (${phase.allotted_minutes} min)`;
      if (index === this.view.appliedLayoutIndex) {
        item.classList.add("current");
      }
      list.appendChild(item);
    });
    this.planPanel.appendChild(list);
  }

  private renderControls(): void {
    this.controls.textContent = "";
    if (this.me !== this.view.organizerId) {
      return;
    }
    if (this.view.lifecycle === "ready") {
      this.controls.appendChild(
        this.controlButton("Start meeting", () => {
          this.sender.send(startMeetingCommand(this.sessionId));
        }),
      );
    } else if (this.view.lifecycle === "in_meeting") {
      this.controls.appendChild(
        this.controlButton("End meeting", () => {
          this.sender.send(endMeetingCommand(this.sessionId));
        }),
      );
    }
  }

  private controlButton(label: string, onClick: () => void): HTMLButtonElement {
    const button = document.createElement("button");
    button.textContent = label;
    button.addEventListener("click", onClick);
    return button;
  }
}

function mustFind(root: HTMLElement, selector: string): HTMLElement {
  const found = root.querySelector<HTMLElement>(selector);
  if (found === null) {
    throw new Error(`page is missing ${selector}`);
  }
  return found;
}

function boot(): void {
  const root = document.getElementById("app");
  if (root === null) {
    return;
  }
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  const link = new SocketLink(`${scheme}://${location.host}/ws`);
  const app = new MeetingApp(root, link);
  link.onMessage = (message) => {
    app.receive(message);
  };
  link.onStatus = (status) => {
    app.setStatus(status);
  };
  link.connect();

  const form = document.getElementById("join-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const field = (name: string) =>
      (form.querySelector(`[name=${name}]`) as HTMLInputElement).value.trim();
    const sessionId = field("session");
    const participantId = field("participant");
    const role = field("role");
    if (sessionId && participantId && role) {
      app.join(sessionId, participantId, role);
      form.classList.add("joined");
    }
  });

  const measure = () => {
    const stage = root.querySelector<HTMLElement>(".layout-stage .pane-area");
    if (stage !== null) {
      app.resize(stage.clientWidth, stage.clientHeight);
    }
  };
  window.addEventListener("resize", measure);
  measure();
  window.setInterval(() => {
    app.tick(Date.now() / 1000);
  }, 250);
}

if (typeof document !== "undefined") {
  boot();
}
