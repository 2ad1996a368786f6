// Draws the tiled workspace for the current phase: one labeled placeholder
// pane per program, positioned at its tile's scaled rectangle, plus a video
// strip that minimizes whenever work panes are on screen.

import type { PlacedLayout, Tile } from "./protocol.js";

export interface PixelRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function scaleTile(tile: Tile, stageWidth: number, stageHeight: number): PixelRect {
  return {
    left: Math.round(tile.x * stageWidth),
    top: Math.round(tile.y * stageHeight),
    width: Math.round(tile.w * stageWidth),
    height: Math.round(tile.h * stageHeight),
  };
}

const PROGRAM_KINDS: Record<string, string> = {
  powerpoint: "slides",
  whiteboard: "board",
  notepad: "notes",
  excel: "sheet",
  calculator: "calc",
  "web browser": "web",
};

export function isUrl(nameOrUrl: string): boolean {
  return /^https?:\/\//i.test(nameOrUrl);
}

export function paneKind(nameOrUrl: string): string {
  if (isUrl(nameOrUrl)) {
    return "web";
  }
  return PROGRAM_KINDS[nameOrUrl.toLowerCase()] ?? "generic";
}

export class LayoutStage {
  private width = 960;
  private height = 540;
  private videoStrip: HTMLElement;
  private paneArea: HTMLElement;
  private header: HTMLElement;

  constructor(private root: HTMLElement) {
    this.header = document.createElement("div");
    this.header.className = "stage-header";
    this.videoStrip = document.createElement("div");
    this.videoStrip.className = "video-strip";
    this.paneArea = document.createElement("div");
    this.paneArea.className = "pane-area";
    root.append(this.header, this.videoStrip, this.paneArea);
  }

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  render(layout: PlacedLayout | null, memberIds: string[]): void {
    this.renderVideos(memberIds, layout !== null && layout.panes.length > 0);
    this.paneArea.textContent = "";
    if (layout === null) {
      this.header.textContent = "";
      return;
    }
    this.header.textContent = `${layout.phase_title} · ${layout.timer_minutes} min`;
    for (const pane of layout.panes) {
      const rect = scaleTile(pane.tile, this.width, this.height);
      const el = document.createElement("div");
      el.className = `pane pane-${paneKind(pane.program.name_or_url)}`;
      el.dataset.program = pane.program.name_or_url;
      el.style.left = `${rect.left}px`;
      el.style.top = `${rect.top}px`;
      el.style.width = `${rect.width}px`;
      el.style.height = `${rect.height}px`;

      const label = document.createElement("div");
      label.className = "pane-label";
      label.textContent = pane.program.name_or_url;
      el.appendChild(label);
      if (pane.program.rationale) {
        const why = document.createElement("div");
        why.className = "pane-rationale";
        why.textContent = pane.program.rationale;
        el.appendChild(why);
      }
      this.paneArea.appendChild(el);
    }
  }

  private renderVideos(memberIds: string[], minimized: boolean): void {
    this.videoStrip.textContent = "";
    this.videoStrip.classList.toggle("minimized", minimized);
    for (const id of memberIds) {
      const chip = document.createElement("div");
      chip.className = "video-chip";
      chip.textContent = id;
      this.videoStrip.appendChild(chip);
    }
  }
}
