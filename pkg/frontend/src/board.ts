// Board rendering model, built strictly from the redacted view the server
// sent: whatever is absent from the view cannot be rendered.

import { SessionViewData, StoneView, fromLabel, toLabel } from "./protocol.js";

export interface CellModel {
  label: string;
  kind: "empty" | "candidate" | "stone";
  color?: "B" | "W";
  stoneId?: number;
  /** true on the cell the viewer designated p1 (own quantum stones only) */
  ownP1: boolean;
  /** id linking the two half-stones of one quantum stone */
  pairId?: number;
}

export function boardModel(view: SessionViewData): CellModel[][] {
  const size = view.size;
  const rows: CellModel[][] = [];
  for (let row = 0; row < size; row++) {
    const cells: CellModel[] = [];
    for (let col = 0; col < size; col++) {
      cells.push({ label: toLabel(col, row), kind: "empty", ownP1: false });
    }
    rows.push(cells);
  }
  const put = (label: string, patch: Partial<CellModel>) => {
    const { col, row } = fromLabel(label, size);
    Object.assign(rows[row][col], patch);
  };
  for (const stone of view.stones) {
    if (stone.state === "quantum" && stone.cells) {
      for (const cell of stone.cells) {
        put(cell, {
          kind: "candidate",
          color: stone.color,
          stoneId: stone.id,
          pairId: stone.id,
        });
      }
      if (stone.p1 !== undefined) {
        put(stone.p1, { ownP1: true });
      }
    } else if (stone.state === "classical" && stone.pos) {
      put(stone.pos, { kind: "stone", color: stone.color, stoneId: stone.id });
    }
  }
  return rows;
}

const GLYPHS: Record<string, string> = {
  "candidate:B": "X",
  "candidate:W": "O",
  "stone:B": "x",
  "stone:W": "o",
};

/**
 * Text rendering in the same format as the service and kifu tooling:
 * X/O quantum candidates, x/o classical stones, dots for empty cells,
 * row numbers and column letters on the margins.
 */
export function renderText(view: SessionViewData): string {
  const size = view.size;
  const model = boardModel(view);
  const width = String(size).length;
  const lines: string[] = [];
  for (let row = size - 1; row >= 0; row--) {
    const glyphs = model[row].map((cell) =>
      cell.kind === "empty" ? "." : GLYPHS[`${cell.kind}:${cell.color}`]);
    lines.push(`${String(row + 1).padStart(width)} ${glyphs.join(" ")}`);
  }
  const letters = model[0].map((cell) => cell.label[0]).join(" ");
  lines.push(`${" ".repeat(width + 1)}${letters}`);
  return lines.join("\n");
}

/** Quantum stones of the viewer, with their designations when known. */
export function ownQuantumStones(view: SessionViewData): StoneView[] {
  const mine = view.role === "black" ? "B" : view.role === "white" ? "W" : null;
  return view.stones.filter((s) => s.state === "quantum" && s.color === mine);
}
