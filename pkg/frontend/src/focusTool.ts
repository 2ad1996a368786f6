// The pre-meeting survey. Each feature gets an include / exclude toggle;
// prices stay hidden until the server acknowledges the submission, and the
// total shown afterwards is the server's, never a local sum.

import type { Selection } from "./protocol.js";
import type { ClientView } from "./state.js";

export function missingIdsFromError(message: string): string[] {
  const match = /missing: ([^;)]+)/.exec(message);
  if (match === null || match[1] === undefined) {
    return [];
  }
  return match[1].split(",").map((part) => part.trim()).filter((part) => part.length > 0);
}

export class FocusToolPanel {
  private pending = new Map<string, Selection>();

  constructor(
    private root: HTMLElement,
    private onSubmit: (selections: Record<string, Selection>) => void,
  ) {}

  selections(): Record<string, Selection> {
    return Object.fromEntries(this.pending);
  }

  render(view: ClientView): void {
    this.root.textContent = "";
    const tool = view.tool;
    if (tool === null) {
      return;
    }
    const submitted = view.myTotal !== null;

    const intro = document.createElement("p");
    intro.className = "focus-scenario";
    intro.textContent = tool.scenario_text;
    this.root.appendChild(intro);

    if (submitted) {
      const total = document.createElement("div");
      total.className = "focus-total";
      total.textContent = `Total: $${view.myTotal}`;
      this.root.appendChild(total);
    }

    const list = document.createElement("ul");
    list.className = "focus-list";
    for (const feature of tool.features) {
      const row = document.createElement("li");
      row.className = "focus-row";
      row.dataset.featureId = feature.id;

      const name = document.createElement("span");
      name.className = "focus-name";
      name.textContent = feature.name;
      row.appendChild(name);

      if (submitted) {
        const price = document.createElement("span");
        price.className = "focus-price";
        price.textContent = `$${feature.price}`;
        row.appendChild(price);
        const choice = this.pending.get(feature.id);
        if (choice !== undefined) {
          row.classList.add(`chose-${choice}`);
        }
      } else {
        row.appendChild(this.toggle(feature.id, "include", "✓", row));
        row.appendChild(this.toggle(feature.id, "exclude", "✗", row));
      }
      list.appendChild(row);
    }
    this.root.appendChild(list);

    if (!submitted) {
      const submit = document.createElement("button");
      submit.className = "focus-submit";
      submit.textContent = "Submit";
      submit.addEventListener("click", () => {
        this.onSubmit(this.selections());
      });
      this.root.appendChild(submit);
    }
  }

  markMissing(featureIds: string[]): void {
    const wanted = new Set(featureIds);
    for (const row of this.root.querySelectorAll<HTMLElement>(".focus-row")) {
      row.classList.toggle("missing", wanted.has(row.dataset.featureId ?? ""));
    }
  }

  private toggle(
    featureId: string,
    choice: Selection,
    glyph: string,
    row: HTMLElement,
  ): HTMLButtonElement {
    const button = document.createElement("button");
    button.className = `focus-toggle toggle-${choice}`;
    button.textContent = glyph;
    button.addEventListener("click", () => {
      this.pending.set(featureId, choice);
      row.classList.remove("chose-include", "chose-exclude", "missing");
      row.classList.add(`chose-${choice}`);
      for (const sibling of row.querySelectorAll(".focus-toggle")) {
        sibling.classList.toggle("active", sibling === button);
      }
    });
    return button;
  }
}
