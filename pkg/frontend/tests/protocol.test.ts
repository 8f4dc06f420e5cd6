import { describe, expect, it } from "vitest";

import {
  COLUMN_LETTERS,
  fromLabel,
  parseServerMessage,
  placeMessage,
  toLabel,
} from "../src/protocol.js";

describe("coordinates", () => {
  it("skips the letter I", () => {
    expect(COLUMN_LETTERS.includes("I")).toBe(false);
    expect(toLabel(8, 9)).toBe("J10");
  });

  it("round trips", () => {
    for (const size of [3, 7, 19]) {
      for (let col = 0; col < size; col++) {
        for (let row = 0; row < size; row++) {
          expect(fromLabel(toLabel(col, row), size)).toEqual({ col, row });
        }
      }
    }
  });

  it("rejects out-of-range labels", () => {
    expect(() => fromLabel("H8", 7)).toThrow();
    expect(() => fromLabel("A9", 7)).toThrow();
  });
});

describe("messages", () => {
  it("parses known server messages", () => {
    const msg = parseServerMessage(
      '{"type":"collapse","revision":3,"stone":2,"pos":"B6"}');
    expect(msg).toEqual({ type: "collapse", revision: 3, stone: 2, pos: "B6" });
  });

  it("rejects junk", () => {
    expect(() => parseServerMessage("not json")).toThrow();
    expect(() => parseServerMessage('{"type":"telepathy"}')).toThrow();
    expect(() => parseServerMessage("42")).toThrow();
  });

  it("builds placement messages with designation order", () => {
    expect(placeMessage("F2", "F5")).toEqual(
      { type: "move", move: "place", p1: "F2", p2: "F5" });
  });
});
