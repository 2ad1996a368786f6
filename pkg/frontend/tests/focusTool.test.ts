import { beforeEach, describe, expect, it } from "vitest";

import { FocusToolPanel, missingIdsFromError } from "../src/focusTool.js";
import type { Selection } from "../src/protocol.js";
import { applyEvent, emptyView, type ClientView } from "../src/state.js";
import { event, sampleTool } from "./helpers.js";

function panelWithView(): {
  root: HTMLElement;
  panel: FocusToolPanel;
  view: ClientView;
  submitted: Record<string, Selection>[];
} {
  const root = document.createElement("div");
  const submitted: Record<string, Selection>[] = [];
  const panel = new FocusToolPanel(root, (selections) => submitted.push(selections));
  const view = emptyView();
  view.tool = sampleTool();
  return { root, panel, view, submitted };
}

function click(el: Element | null): void {
  (el as HTMLElement).dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

describe("FocusToolPanel", () => {
  beforeEach(() => {
    document.body.textContent = "";
  });

  it("shows no prices before the submission is acknowledged", () => {
    const { root, panel, view } = panelWithView();
    panel.render(view);
    expect(root.querySelector(".focus-total")).toBeNull();
    expect(root.querySelectorAll(".focus-price")).toHaveLength(0);
    expect(root.textContent).not.toContain("$");
    expect(root.querySelectorAll(".focus-row")).toHaveLength(3);
  });

  it("collects toggles and submits them as one selections map", () => {
    const { root, panel, view, submitted } = panelWithView();
    panel.render(view);
    const rows = root.querySelectorAll(".focus-row");
    click(rows[0]!.querySelector(".toggle-include"));
    click(rows[1]!.querySelector(".toggle-exclude"));
    click(rows[2]!.querySelector(".toggle-include"));
    click(root.querySelector(".focus-submit"));
    expect(submitted).toEqual([
      {
        "noise-cancelling": "include",
        "wireless-charging": "exclude",
        "voice-assistant": "include",
      },
    ]);
  });

  it("highlights exactly the rows the server called missing", () => {
    const { root, panel, view } = panelWithView();
    panel.render(view);
    panel.markMissing(
      missingIdsFromError(
        "selection does not cover the feature list (missing: wireless-charging, voice-assistant)",
      ),
    );
    const missing = [...root.querySelectorAll(".focus-row.missing")].map(
      (row) => (row as HTMLElement).dataset.featureId,
    );
    expect(missing).toEqual(["wireless-charging", "voice-assistant"]);
  });

  it("parses missing ids out of mixed missing/unknown messages", () => {
    expect(missingIdsFromError("selection does not cover the feature list (missing: a, b; unknown: z)"))
      .toEqual(["a", "b"]);
    expect(missingIdsFromError("selection does not cover the feature list (unknown: z)")).toEqual([]);
    expect(missingIdsFromError("no selection clause here")).toEqual([]);
  });

  it("reveals the acknowledged total and the itemized prices after submit", () => {
    const { root, panel, view } = panelWithView();
    panel.render(view);
    applyEvent(
      view,
      event("focus_response_submitted", 6, 5, {
        participant_id: "bo",
        role: "software_engineer",
        selections: { "noise-cancelling": "include", "voice-assistant": "include", "wireless-charging": "exclude" },
        total_price: 50,
        submitted_at: 5,
      }),
      "bo",
    );
    panel.render(view);
    expect(root.querySelector(".focus-total")?.textContent).toBe("Total: $50");
    const prices = [...root.querySelectorAll(".focus-price")].map((el) => el.textContent);
    expect(prices).toEqual(["$10", "$20", "$40"]);
    expect(root.querySelector(".focus-submit")).toBeNull();
    expect(root.querySelectorAll(".focus-toggle")).toHaveLength(0);
  });

  it("never renders from a local sum: the total is whatever the server said", () => {
    const { root, panel, view } = panelWithView();
    applyEvent(
      view,
      event("focus_response_submitted", 6, 5, {
        participant_id: "bo",
        role: "software_engineer",
        selections: { "noise-cancelling": "include", "voice-assistant": "exclude", "wireless-charging": "exclude" },
        total_price: 10,
        submitted_at: 5,
      }),
      "bo",
    );
    panel.render(view);
    expect(root.querySelector(".focus-total")?.textContent).toBe("Total: $10");
  });
});
