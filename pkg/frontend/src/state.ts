// Client-side game state: revision-ordered views plus the animation queue.

import { ServerMessage, SessionViewData } from "./protocol.js";

export interface CollapseAnimation {
  revision: number;
  stone: number;
  pos: string;
}

export interface ApplyResult {
  stateChanged: boolean;
  animations: CollapseAnimation[];
  error?: { code: string; message: string };
  result?: { winner: string; margin: number };
}

/**
 * Holds the latest view and orders incoming messages: state messages are
 * full snapshots, so any revision above the cursor is rendered and stale or
 * duplicate deliveries are dropped (the server promises at-least-once
 * delivery with monotonically increasing revisions).  Collapse events are
 * queued exactly once each, in recorded order, for sequential animation.
 */
export class GameStore {
  revision = -1;
  view: SessionViewData | null = null;
  private seenCollapses = new Set<string>();
  pendingAnimations: CollapseAnimation[] = [];
  lastResult: { winner: string; margin: number } | null = null;

  apply(message: ServerMessage): ApplyResult {
    const out: ApplyResult = { stateChanged: false, animations: [] };
    switch (message.type) {
      case "state": {
        if (message.revision >= this.revision) {
          this.revision = message.revision;
          this.view = message.view;
          out.stateChanged = true;
        }
        break;
      }
      case "collapse": {
        const key = `${message.revision}:${message.stone}`;
        if (!this.seenCollapses.has(key)) {
          this.seenCollapses.add(key);
          const animation = {
            revision: message.revision,
            stone: message.stone,
            pos: message.pos,
          };
          this.pendingAnimations.push(animation);
          out.animations.push(animation);
        }
        break;
      }
      case "result": {
        this.lastResult = { winner: message.winner, margin: message.margin };
        out.result = this.lastResult;
        break;
      }
      case "error": {
        out.error = { code: message.code, message: message.message };
        break;
      }
      case "created":
        break;
    }
    return out;
  }

  /** Pop the next collapse animation, in recorded order. */
  nextAnimation(): CollapseAnimation | undefined {
    return this.pendingAnimations.shift();
  }
}
