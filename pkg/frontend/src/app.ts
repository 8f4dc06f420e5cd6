// Browser UI: join a session, click two intersections, designate p1,
// watch collapses resolve in order, read the AIS panel.

import { boardModel } from "./board.js";
import { GameClient } from "./client.js";
import { MoveComposer } from "./composer.js";
import { SessionViewData } from "./protocol.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

let client: GameClient | null = null;
const composer = new MoveComposer();
let view: SessionViewData | null = null;
let animating = false;
const animationQueue: Array<{ stone: number; pos: string }> = [];
const flashes = new Map<string, number>();

function setStatus(text: string, isError = false): void {
  const node = $("status");
  node.textContent = text;
  node.className = isError ? "error" : "";
}

function describeTurn(v: SessionViewData): string {
  if (v.status === "finished") {
    const r = v.result;
    return r ? `game over: ${r.winner === "draw" ? "draw" : `${r.winner}+${r.margin}`}`
             : "game over";
  }
  const mover = v.to_move === "B" ? "black" : "white";
  if (v.your_turn && v.has_placement === false) {
    return "no placements remain: pass to finish";
  }
  return v.your_turn ? `your move (${mover})` : `waiting for ${mover}`;
}

function renderBoard(): void {
  if (!view) return;
  const table = $("board");
  table.innerHTML = "";
  const model = boardModel(view);
  for (let row = view.size - 1; row >= 0; row--) {
    const tr = document.createElement("tr");
    for (const cell of model[row]) {
      const td = document.createElement("td");
      td.dataset.label = cell.label;
      const classes = ["cell"];
      if (cell.kind === "candidate") classes.push("candidate", cell.color === "B" ? "black" : "white");
      if (cell.kind === "stone") classes.push("stone", cell.color === "B" ? "black" : "white");
      if (cell.ownP1) classes.push("p1");
      if (composer.clicks.includes(cell.label)) {
        classes.push("selected");
        if (composer.p1 === cell.label) classes.push("p1-pick");
      }
      if (flashes.has(cell.label)) classes.push("flash");
      td.className = classes.join(" ");
      td.title = cell.label + (cell.ownP1 ? " (your p1)" : "");
      td.addEventListener("click", () => onCellClick(cell.label));
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  $("ais").textContent = `AIS facing the player to move: ${view.ais.toFixed(2)}`;
  $("meta").textContent =
    `${view.size}x${view.size}, komi ${view.komi}, move ${view.move_count}, ` +
    `you are ${view.role}`;
  setStatus(describeTurn(view));
  ($("confirm") as HTMLButtonElement).disabled = !composer.ready || !view.your_turn;
  ($("pass") as HTMLButtonElement).disabled = !view.your_turn;
  ($("toggle") as HTMLButtonElement).disabled = composer.clicks.length !== 2;
}

function onCellClick(label: string): void {
  if (!view || animating) return;
  const outcome = composer.click(view, label);
  if (outcome === "blocked") setStatus("that intersection is occupied", true);
  if (outcome === "disabled") setStatus("not your turn", true);
  renderBoard();
}

function playAnimations(): void {
  if (animating) return;
  const next = animationQueue.shift();
  if (!next || !view) return;
  animating = true;
  flashes.set(next.pos, next.stone);
  setStatus(`stone ${next.stone} collapses to ${next.pos}`);
  renderBoard();
  setTimeout(() => {
    flashes.delete(next.pos);
    animating = false;
    renderBoard();
    playAnimations();
  }, 400);
}

async function join(): Promise<void> {
  const host = (($("server") as HTMLInputElement).value || location.host);
  const session = ($("session") as HTMLInputElement).value.trim();
  const token = ($("token") as HTMLInputElement).value.trim();
  client = new GameClient(`ws://${host}/ws`);
  client.on({
    state: (v) => {
      view = v;
      if (!v.your_turn) composer.reset();
      renderBoard();
      playAnimations();
    },
    animation: (stone, pos) => {
      animationQueue.push({ stone, pos });
      playAnimations();
    },
    error: (_code, message) => setStatus(message, true),
    result: (winner, margin) =>
      setStatus(winner === "draw" ? "draw" : `${winner} wins by ${margin}`),
  });
  await client.connect();
  if (session) {
    await client.join(session, token || undefined);
  } else {
    const created = await client.create({ size: 7, komi: 0 });
    ($("session") as HTMLInputElement).value = created.session;
    setStatus(
      `created ${created.session}; black token ${created.black_token}, ` +
      `white token ${created.white_token} — join with one of them`);
  }
}

export function init(): void {
  $("join").addEventListener("click", () => {
    join().catch((error) => setStatus(String(error), true));
  });
  $("confirm").addEventListener("click", () => {
    if (!client || !view) return;
    try {
      client.send(composer.message());
      composer.reset();
    } catch (error) {
      setStatus(String(error), true);
    }
  });
  $("pass").addEventListener("click", () => client?.pass());
  $("toggle").addEventListener("click", () => {
    composer.toggleP1();
    renderBoard();
  });
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  init();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", init);
}
