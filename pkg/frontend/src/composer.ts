// Two-click move composition: first click selects candidate A (the default
// p1), second selects candidate B, a toggle swaps the designation, confirm
// produces the protocol message.  Illegal selections are blocked here and
// re-checked authoritatively by the server.

import { ClientMessage, SessionViewData, fromLabel, placeMessage } from "./protocol.js";

export type ClickOutcome = "selected" | "deselected" | "blocked" | "disabled";

export class MoveComposer {
  clicks: string[] = [];
  p1Index: 0 | 1 = 0;

  reset(): void {
    this.clicks = [];
    this.p1Index = 0;
  }

  private occupied(view: SessionViewData, label: string): boolean {
    const { col, row } = fromLabel(label, view.size);
    for (const stone of view.stones) {
      if (stone.state === "quantum" && stone.cells) {
        for (const cell of stone.cells) {
          const c = fromLabel(cell, view.size);
          if (c.col === col && c.row === row) return true;
        }
      } else if (stone.state === "classical" && stone.pos) {
        const c = fromLabel(stone.pos, view.size);
        if (c.col === col && c.row === row) return true;
      }
    }
    return false;
  }

  click(view: SessionViewData, label: string): ClickOutcome {
    if (!view.your_turn) {
      return "disabled";
    }
    const index = this.clicks.indexOf(label);
    if (index >= 0) {
      this.clicks.splice(index, 1);  // clicking a selection removes it
      this.p1Index = 0;
      return "deselected";
    }
    if (this.clicks.length >= 2 || this.occupied(view, label)) {
      return "blocked";
    }
    try {
      fromLabel(label, view.size);
    } catch {
      return "blocked";
    }
    this.clicks.push(label);
    return "selected";
  }

  /** Swap which selected cell is p1 (default: the first click). */
  toggleP1(): void {
    if (this.clicks.length === 2) {
      this.p1Index = this.p1Index === 0 ? 1 : 0;
    }
  }

  get p1(): string | undefined {
    return this.clicks.length === 2 ? this.clicks[this.p1Index] : this.clicks[0];
  }

  get ready(): boolean {
    return this.clicks.length === 2;
  }

  message(): ClientMessage {
    if (this.clicks.length !== 2) {
      throw new Error("select two intersections first");
    }
    const p1 = this.clicks[this.p1Index];
    const p2 = this.clicks[1 - this.p1Index];
    return placeMessage(p1, p2);
  }
}
