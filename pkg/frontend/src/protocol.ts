// Wire protocol of the qgo game service: JSON messages over a WebSocket.

export type Color = "B" | "W";
export type Role = "black" | "white" | "spectator";

export interface StoneView {
  id: number;
  color: Color;
  state: "quantum" | "classical" | "captured";
  /** unordered candidate pair, present while quantum */
  cells?: [string, string];
  /** p1 designation: present only in the owner's view of a quantum stone */
  p1?: string;
  /** settled position, present when classical */
  pos?: string;
}

export interface SessionViewData {
  session: string;
  role: Role;
  size: number;
  komi: number;
  status: "playing" | "finished";
  to_move: Color;
  move_count: number;
  consecutive_passes: number;
  your_turn: boolean;
  /** advisory: whether any legal placement remains (exact near the end) */
  has_placement?: boolean;
  board: string;
  stones: StoneView[];
  ais: number;
  result?: { winner: string; margin: number };
}

export type ServerMessage =
  | { type: "created"; session: string; black_token: string;
      white_token: string; deterministic: boolean }
  | { type: "state"; revision: number; view: SessionViewData }
  | { type: "collapse"; revision: number; stone: number; pos: string }
  | { type: "result"; revision: number; winner: string; margin: number }
  | { type: "error"; code: string; message: string };

export type ClientMessage =
  | { type: "create"; [key: string]: unknown }
  | { type: "join"; session: string; token?: string }
  | { type: "move"; move: "pass" }
  | { type: "move"; move: "place"; p1: string; p2: string };

const SERVER_TYPES = new Set(["created", "state", "collapse", "result", "error"]);

export function parseServerMessage(text: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new Error(`malformed server message: ${text.slice(0, 80)}`);
  }
  if (typeof data !== "object" || data === null) {
    throw new Error("server message is not an object");
  }
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
    throw new Error(`unknown server message type: ${String(type)}`);
  }
  return data as ServerMessage;
}

export function passMessage(): ClientMessage {
  return { type: "move", move: "pass" };
}

export function placeMessage(p1: string, p2: string): ClientMessage {
  return { type: "move", move: "place", p1, p2 };
}

// Column lettering matches the server: the letter I is skipped.
export const COLUMN_LETTERS = "ABCDEFGHJKLMNOPQRSTUVWXYZ";

export function toLabel(col: number, row: number): string {
  return `${COLUMN_LETTERS[col]}${row + 1}`;
}

export function fromLabel(label: string, size: number): { col: number; row: number } {
  const col = COLUMN_LETTERS.indexOf(label[0].toUpperCase());
  const row = parseInt(label.slice(1), 10) - 1;
  if (col < 0 || col >= size || !(row >= 0 && row < size)) {
    throw new Error(`bad coordinate ${label} for size ${size}`);
  }
  return { col, row };
}
