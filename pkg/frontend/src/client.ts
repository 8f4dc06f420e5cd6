// WebSocket game client.  The constructor takes the WebSocket
// implementation so the same code runs in browsers (native) and under
// node-based tests (the `ws` package).

import {
  ClientMessage,
  ServerMessage,
  SessionViewData,
  parseServerMessage,
  passMessage,
} from "./protocol.js";
import { ApplyResult, GameStore } from "./state.js";

type MinimalSocket = {
  send(data: string): void;
  close(): void;
  addEventListener(event: string, handler: (event: any) => void): void;
};

type SocketCtor = new (url: string) => MinimalSocket;

export interface ClientEvents {
  state?: (view: SessionViewData, revision: number) => void;
  animation?: (stone: number, pos: string) => void;
  result?: (winner: string, margin: number) => void;
  error?: (code: string, message: string) => void;
  raw?: (text: string) => void;
}

export class GameClient {
  store = new GameStore();
  private socket: MinimalSocket | null = null;
  private events: ClientEvents = {};
  private waiters: Array<(message: ServerMessage) => boolean> = [];

  constructor(private url: string,
              private socketCtor: SocketCtor =
                  (globalThis as any).WebSocket as SocketCtor) {
    if (!this.socketCtor) {
      throw new Error("no WebSocket implementation available");
    }
  }

  on(events: ClientEvents): void {
    Object.assign(this.events, events);
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = new this.socketCtor(this.url);
      socket.addEventListener("open", () => resolve());
      socket.addEventListener("error", (event: any) =>
        reject(new Error(`websocket error: ${event?.message ?? "unknown"}`)));
      socket.addEventListener("message", (event: any) =>
        this.handle(String(event.data)));
      this.socket = socket;
    });
  }

  close(): void {
    this.socket?.close();
  }

  private handle(text: string): void {
    this.events.raw?.(text);
    const message = parseServerMessage(text);
    const outcome: ApplyResult = this.store.apply(message);
    if (outcome.stateChanged && this.store.view) {
      this.events.state?.(this.store.view, this.store.revision);
    }
    for (const animation of outcome.animations) {
      this.events.animation?.(animation.stone, animation.pos);
    }
    if (outcome.result) {
      this.events.result?.(outcome.result.winner, outcome.result.margin);
    }
    if (outcome.error) {
      this.events.error?.(outcome.error.code, outcome.error.message);
    }
    this.waiters = this.waiters.filter((accept) => !accept(message));
  }

  send(message: ClientMessage): void {
    if (!this.socket) {
      throw new Error("not connected");
    }
    this.socket.send(JSON.stringify(message));
  }

  /** Resolve on the next message matching the predicate. */
  waitFor<T extends ServerMessage>(predicate: (m: ServerMessage) => m is T,
                                   timeoutMs = 5000): Promise<T> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("timed out waiting for server message")),
        timeoutMs);
      this.waiters.push((message) => {
        if (predicate(message)) {
          clearTimeout(timer);
          resolve(message);
          return true;
        }
        return false;
      });
    });
  }

  async create(config: Record<string, unknown>): Promise<
      Extract<ServerMessage, { type: "created" }>> {
    const reply = this.waitFor(
      (m): m is Extract<ServerMessage, { type: "created" }> => m.type === "created");
    this.send({ type: "create", ...config });
    return reply;
  }

  async join(session: string, token?: string): Promise<SessionViewData> {
    const reply = this.waitFor(
      (m): m is Extract<ServerMessage, { type: "state" }> => m.type === "state");
    this.send(token === undefined
      ? { type: "join", session }
      : { type: "join", session, token });
    await reply;
    return this.store.view as SessionViewData;
  }

  /** Wait until it's this client's turn (or the game finished). */
  async untilTurn(timeoutMs = 5000): Promise<SessionViewData> {
    const current = this.store.view;
    if (current && (current.your_turn || current.status === "finished")) {
      return current;
    }
    await this.waitFor(
      (m): m is Extract<ServerMessage, { type: "state" }> =>
        m.type === "state" && (m.view.your_turn || m.view.status === "finished"),
      timeoutMs);
    return this.store.view as SessionViewData;
  }

  /** Wait until the game is over (the finished state may already be here). */
  async untilFinished(timeoutMs = 5000): Promise<SessionViewData> {
    const current = this.store.view;
    if (current && current.status === "finished") {
      return current;
    }
    await this.waitFor(
      (m): m is Extract<ServerMessage, { type: "state" }> =>
        m.type === "state" && m.view.status === "finished",
      timeoutMs);
    return this.store.view as SessionViewData;
  }

  /**
   * Send a move and wait until the server acknowledged it: while it is our
   * turn only our own move can advance move_count (the session serializes
   * moves), so the first state with a higher count proves the move applied;
   * a rejection arrives as an error message instead.  Prevents a client
   * from acting on a stale view of its own pending move.
   */
  async play(message: ClientMessage, timeoutMs = 5000): Promise<SessionViewData> {
    const view = this.store.view;
    if (!view) {
      throw new Error("join a session first");
    }
    const before = view.move_count;
    const reply = this.waitFor(
      (m): m is ServerMessage =>
        (m.type === "state" && m.view.move_count > before) || m.type === "error",
      timeoutMs);
    this.send(message);
    const message2 = await reply;
    if (message2.type === "error") {
      throw new Error(`${message2.code}: ${message2.message}`);
    }
    return this.store.view as SessionViewData;
  }

  place(p1: string, p2: string): Promise<SessionViewData> {
    return this.play({ type: "move", move: "place", p1, p2 });
  }

  pass(): Promise<SessionViewData> {
    return this.play(passMessage());
  }
}
