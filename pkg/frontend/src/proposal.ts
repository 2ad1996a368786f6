// The transition prompt. An open proposal shows a banner naming the target
// phase with a countdown and an Abort control; the banner changes only on
// server events, so a click never clears it locally.

import type { TransitionProposal } from "./protocol.js";
import type { ClientView } from "./state.js";

export class ProposalBanner {
  private shownId: string | null = null;
  private countdown: HTMLElement | null = null;
  private deadline = 0;

  constructor(
    private root: HTMLElement,
    private onAbort: (proposalId: string) => void,
  ) {}

  render(view: ClientView, now: number): void {
    const proposal = view.proposal;
    if (proposal === null || proposal.status === "committed") {
      this.clear();
      return;
    }
    if (proposal.status === "aborted") {
      this.renderAborted(proposal);
      return;
    }
    if (this.shownId !== proposal.proposal_id) {
      this.renderOpen(proposal, view);
    }
    this.tick(now);
  }

  tick(now: number): void {
    if (this.countdown !== null) {
      const left = Math.max(0, this.deadline - now);
      this.countdown.textContent = `${Math.ceil(left)}s`;
    }
  }

  private renderOpen(proposal: TransitionProposal, view: ClientView): void {
    this.root.textContent = "";
    this.shownId = proposal.proposal_id;
    this.deadline = proposal.deadline;
    this.root.classList.add("open");
    this.root.classList.remove("aborted");

    const text = document.createElement("span");
    text.className = "proposal-text";
    const target = view.plan?.phases[proposal.to_index]?.title ?? `phase ${proposal.to_index + 1}`;
    text.textContent = `Moving on to ${target} in `;
    this.countdown = document.createElement("span");
    this.countdown.className = "proposal-countdown";
    text.appendChild(this.countdown);

    const abort = document.createElement("button");
    abort.className = "proposal-abort";
    abort.textContent = "Abort";
    abort.addEventListener("click", () => {
      this.onAbort(proposal.proposal_id);
    });

    this.root.append(text, abort);
  }

  private renderAborted(proposal: TransitionProposal): void {
    if (this.shownId === proposal.proposal_id && this.root.classList.contains("aborted")) {
      return;
    }
    this.shownId = proposal.proposal_id;
    this.countdown = null;
    this.root.textContent = "";
    this.root.classList.remove("open");
    this.root.classList.add("aborted");
    const note = document.createElement("span");
    note.className = "proposal-text";
    note.textContent = `Transition aborted by ${proposal.aborted_by}`;
    this.root.appendChild(note);
  }

  private clear(): void {
    this.shownId = null;
    this.countdown = null;
    this.root.textContent = "";
    this.root.classList.remove("open", "aborted");
  }
}
