// End-to-end: two clients complete a scripted 7x7 game against the live
// Python service; redaction is checked on every received frame; the final
// rendered board must equal the board of the replayed kifu.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { renderText } from "../src/board.js";
import { GameClient } from "../src/client.js";
import { MoveComposer } from "../src/composer.js";
import { parseServerMessage, SessionViewData } from "../src/protocol.js";

const PORT = 18000 + Math.floor(Math.random() * 10000);
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;
const workdir = mkdtempSync(join(tmpdir(), "qgo-e2e-"));

async function serverUp(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const res = await fetch(`${BASE}/sessions/none`);
      if (res.status === 404) return;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("game service did not come up");
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "qgo.cli", "serve",
                             "--host", "127.0.0.1", "--port", String(PORT),
                             "--persist-dir", workdir],
                 { stdio: ["ignore", "pipe", "pipe"] });
  await serverUp();
}, 30000);

afterAll(() => {
  server?.kill();
});

function assertRedacted(view: SessionViewData): void {
  const mine = view.role === "black" ? "B" : view.role === "white" ? "W" : null;
  for (const stone of view.stones) {
    if (stone.state === "quantum" && stone.color !== mine) {
      expect(stone.p1).toBeUndefined();
    }
  }
}

describe("live scripted game", () => {
  it("plays to the end with redacted views and a matching final board", async () => {
    const createRes = await fetch(`${BASE}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ size: 7, komi: 0, source: "scripted:00000" }),
    });
    expect(createRes.ok).toBe(true);
    const created = await createRes.json();

    const url = `ws://127.0.0.1:${PORT}/ws`;
    const black = new GameClient(url, WebSocket as any);
    const white = new GameClient(url, WebSocket as any);
    const spectator = new GameClient(url, WebSocket as any);
    const rawFrames: Record<string, string[]> = { black: [], white: [], spectator: [] };
    const animationOrder: number[] = [];
    black.on({ raw: (t) => rawFrames.black.push(t) });
    white.on({
      raw: (t) => rawFrames.white.push(t),
      animation: (stone) => animationOrder.push(stone),
    });
    spectator.on({ raw: (t) => rawFrames.spectator.push(t) });
    await Promise.all([black.connect(), white.connect(), spectator.connect()]);
    await black.join(created.session, created.black_token);
    await white.join(created.session, created.white_token);
    await spectator.join(created.session);

    // every state frame any client receives must be correctly redacted
    const checkAll = () => {
      for (const frames of Object.values(rawFrames)) {
        for (const text of frames) {
          const message = parseServerMessage(text);
          if (message.type === "state") assertRedacted(message.view);
        }
      }
      for (const text of rawFrames.spectator) {
        expect(text.includes('"p1"')).toBe(false); // snapshot grep
      }
    };

    const script: Array<[GameClient, string, string]> = [
      [black, "B2", "B6"],
      [white, "F2", "F6"],
      [black, "C3", "E3"],
      [white, "C5", "E5"],
      [black, "D3", "A1"], // adjacent to stone 3: triggers [3, 5]
    ];
    for (const [player, a, b] of script) {
      const view = await player.untilTurn();
      const composer = new MoveComposer();
      expect(composer.click(view, a)).toBe("selected");
      expect(composer.click(view, b)).toBe("selected");
      await player.play(composer.message());
      checkAll();
    }
    await white.untilTurn();
    await white.pass();
    await black.untilTurn();
    await black.pass();

    const finished = await black.untilFinished();
    await white.untilFinished();
    await spectator.untilFinished();
    checkAll();

    // collapse animations arrive in the recorded measurement order:
    // move 5 measures [3, 5]; the end measurement settles [1, 2, 4]
    expect(animationOrder).toEqual([3, 5, 1, 2, 4]);

    expect(finished.result).toEqual({ winner: "B", margin: 1 });

    // final rendered board equals render_board of the replayed kifu
    const kifuText = await (await fetch(`${BASE}/sessions/${created.session}/kifu`)).text();
    const kifuPath = join(workdir, "final.kifu");
    writeFileSync(kifuPath, kifuText);
    const replay = spawnSync("python3", ["-m", "qgo.cli", "replay", kifuPath, "--render"],
                             { encoding: "utf8" });
    expect(replay.status).toBe(0);
    const lines = replay.stdout.trimEnd().split("\n");
    const boardFromReplay = lines.slice(-(7 + 1)).join("\n");
    const clientRender = renderText(black.store.view as SessionViewData);
    expect(clientRender).toBe(boardFromReplay);

    // all three final views agree on the classical board
    for (const client of [white, spectator]) {
      expect(renderText(client.store.view as SessionViewData)).toBe(boardFromReplay);
    }

    black.close();
    white.close();
    spectator.close();
  }, 30000);
});
