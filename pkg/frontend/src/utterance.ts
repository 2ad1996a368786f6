// A text box standing in for speech capture. Enabled only while the
// meeting runs; empty input never leaves the client.

import type { Lifecycle } from "./state.js";

export class UtteranceBox {
  private input: HTMLInputElement;
  private button: HTMLButtonElement;

  constructor(root: HTMLElement, onSend: (text: string) => void) {
    this.input = document.createElement("input");
    this.input.type = "text";
    this.input.className = "utterance-input";
    this.input.placeholder = "Say something…";
    this.button = document.createElement("button");
    this.button.className = "utterance-send";
    this.button.textContent = "Send";

    const send = () => {
      const text = this.input.value.trim();
      if (text.length === 0 || this.input.disabled) {
        return;
      }
      onSend(text);
      this.input.value = "";
    };
    this.button.addEventListener("click", send);
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        send();
      }
    });
    root.append(this.input, this.button);
    this.render("pre_meeting");
  }

  render(lifecycle: Lifecycle): void {
    const enabled = lifecycle === "in_meeting";
    this.input.disabled = !enabled;
    this.button.disabled = !enabled;
  }
}
