"""Live two-player game service with per-player information redaction.

The server is the referee: it holds every stone's p1/p2 designation, draws
collapse bits at measurement time, and sends each viewer only what their
role may see.  A quantum stone appears to everyone as an unordered candidate
pair; the p1 designation is included only in its owner's view.

Wire protocol (JSON over a WebSocket at ``/ws``, messages framed by the
socket layer):

    -> {"type": "create", "size": 19, "komi": 0, ...}
    <- {"type": "created", "session": id, "black_token": t1, "white_token": t2}
    -> {"type": "join", "session": id, "token": t}      # or no token: spectator
    <- {"type": "state", "revision": r, "view": {...}}
    -> {"type": "move", "move": "pass"}
    -> {"type": "move", "move": "place", "p1": "B6", "p2": "B2"}
    <- {"type": "collapse", "revision": r, "stone": id, "pos": "B6"}
    <- {"type": "result", "revision": r, "winner": "B", "margin": 50}
    <- {"type": "error", "code": "...", "message": "..."}

HTTP endpoints: ``POST /sessions`` (create), ``GET /sessions/{id}``,
``GET /sessions/{id}/kifu`` and ``GET /sessions/{id}/report``.
"""

from __future__ import annotations

import asyncio
import logging
import math
import secrets
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from . import analytics, rules
from .kifu import KifuRecorder, render_board, serialize
from .rules import BLACK, WHITE, PASS, BoardConfig, IllegalMoveError, Place
from .selfplay import random_bot_move
from .source import BitsExhausted, SimulatedBitSource, StateParams, open_bitsource

ROLE_NAMES = {BLACK: "black", WHITE: "white"}

logger = logging.getLogger("qgo.server")


@dataclass
class ServerSettings:
    persist_dir: Path | None = None
    default_theta: float = math.pi / 4
    default_phi: float = 0.0


@dataclass
class Session:
    id: str
    config: BoardConfig
    state: rules.GameState
    bits: object
    recorder: KifuRecorder
    tokens: dict[str, int]  # token -> color
    bots: dict[int, np.random.Generator] = field(default_factory=dict)
    revision: int = 0
    q_black: list[int] = field(default_factory=lambda: [0])
    q_white: list[int] = field(default_factory=lambda: [0])
    result: rules.ScoreResult | None = None
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    watchers: list[tuple[WebSocket, int | None]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "finished" if self.state.is_terminal else "playing"

    def deterministic(self) -> bool:
        thetas = {self.config.theta_for(BLACK), self.config.theta_for(WHITE)}
        return all(t < 1e-9 or abs(t - math.pi / 2) < 1e-9 for t in thetas)

    def record_counts(self) -> None:
        qb = qw = 0
        for stone in self.state.stones.values():
            if stone.is_quantum:
                if stone.color == BLACK:
                    qb += 1
                else:
                    qw += 1
        self.q_black.append(qb)
        self.q_white.append(qw)

    def ais_now(self) -> float:
        return analytics.ais_from_counts(self.q_black, self.q_white).s[-1]

    def trace(self) -> analytics.AISTrace:
        return analytics.ais_from_counts(self.q_black, self.q_white)


def _has_placement(state: rules.GameState) -> bool:
    """Placement availability for the UI's pass affordance: exact (every
    pair Ko-checked) once few cells remain, where it matters; with a wide
    open board a legal pair is taken as given."""
    if state.is_terminal:
        return False
    empties = state.empty_cells()
    if len(empties) < 2:
        return False
    if len(empties) > 12:
        return True
    return any(rules.is_legal(state, rules.Place(a, b))
               for i, a in enumerate(empties) for b in empties[i + 1:])


def session_view(session: Session, role: int | None) -> dict:
    """Build the per-viewer state: candidate pairs are always unordered; the
    p1 designation is attached only for the stone's owner while quantum."""
    state = session.state
    size = state.size
    stones = []
    for sid in sorted(state.stones):
        stone = state.stones[sid]
        entry = {"id": sid, "color": rules.COLOR_NAMES[stone.color]}
        if stone.is_quantum:
            entry["state"] = "quantum"
            cells = sorted((stone.p1, stone.p2))
            entry["cells"] = [rules.format_coord(p, size) for p in cells]
            if role == stone.color:
                entry["p1"] = rules.format_coord(stone.p1, size)
        elif stone.captured:
            entry["state"] = "captured"
        else:
            entry["state"] = "classical"
            entry["pos"] = rules.format_coord(stone.pos, size)
        stones.append(entry)
    view = {
        "session": session.id,
        "role": ROLE_NAMES.get(role, "spectator"),
        "size": size,
        "komi": state.config.komi,
        "status": session.status,
        "to_move": rules.COLOR_NAMES[state.to_move],
        "move_count": state.move_count,
        "consecutive_passes": state.consecutive_passes,
        "your_turn": role == state.to_move and not state.is_terminal,
        "has_placement": _has_placement(state),
        "board": render_board(state),
        "stones": stones,
        "ais": session.ais_now(),
    }
    if session.result is not None:
        view["result"] = {"winner": session.result.winner or "draw",
                          "margin": session.result.margin}
    return view


class GameServer:
    def __init__(self, settings: ServerSettings | None = None):
        self.settings = settings or ServerSettings()
        self.sessions: dict[str, Session] = {}

    # -- session management ------------------------------------------------

    def create_session(self, request: dict) -> dict:
        config = BoardConfig(
            size=int(request.get("size", 19)),
            komi=float(request.get("komi", 0.0)),
            detect_range=int(request.get("detect_range", 1)),
            measure_at_end=bool(request.get("measure_at_end", True)),
            theta=float(request.get("theta", self.settings.default_theta)),
            phi=float(request.get("phi", self.settings.default_phi)),
            theta_white=(float(request["theta_white"])
                         if "theta_white" in request else None),
            phi_white=(float(request["phi_white"])
                       if "phi_white" in request else None),
        )
        config.validate()
        seed = request.get("seed")
        source_spec = request.get("source")
        if source_spec is not None:
            bits = open_bitsource(source_spec)
            detail = source_spec if isinstance(source_spec, str) else str(source_spec)
            source_kind, source_detail = bits.kind, detail.partition(":")[2] or detail
        else:
            bits = SimulatedBitSource(
                StateParams(theta=config.theta, phi=config.phi),
                seed if seed is not None else secrets.randbits(63))
            source_kind, source_detail = "simulated", f"seed={bits.seed}"
        sid = secrets.token_hex(8)
        session = Session(
            id=sid,
            config=config,
            state=rules.new_game(config),
            bits=bits,
            recorder=KifuRecorder(config, source_kind, source_detail),
            tokens={secrets.token_hex(16): BLACK, secrets.token_hex(16): WHITE},
        )
        bot_seed = seed if seed is not None else secrets.randbits(63)
        for color, key in ((BLACK, "black_bot"), (WHITE, "white_bot")):
            if request.get(key):
                session.bots[color] = np.random.default_rng(
                    np.random.SeedSequence([bot_seed, color]))
        self.sessions[sid] = session
        tokens = {ROLE_NAMES[color]: token for token, color in session.tokens.items()}
        return {
            "session": sid,
            "black_token": tokens["black"],
            "white_token": tokens["white"],
            "deterministic": session.deterministic(),
        }

    def get_session(self, sid: str) -> Session:
        session = self.sessions.get(sid)
        if session is None:
            raise KeyError(f"unknown session {sid}")
        return session

    # -- move handling -----------------------------------------------------

    def _parse_move(self, session: Session, payload: dict):
        kind = payload.get("move")
        if kind == "pass":
            return PASS
        if kind == "place":
            size = session.state.size
            try:
                p1 = rules.parse_coord(str(payload.get("p1", "")), size)
                p2 = rules.parse_coord(str(payload.get("p2", "")), size)
            except ValueError as exc:
                raise IllegalMoveError(str(exc)) from None
            return Place(p1, p2)
        raise IllegalMoveError(f"unknown move kind {kind!r}")

    def apply(self, session: Session, color: int, move) -> list[dict]:
        """Apply one move; returns the broadcast event list (collapse events,
        optional result) excluding per-viewer state messages."""
        state = session.state
        if state.is_terminal:
            raise IllegalMoveError("game is over")
        if color != state.to_move:
            raise IllegalMoveError("not your turn")
        outcome = rules.apply_move(state, move, session.bits)
        session.recorder.record(outcome)
        session.record_counts()
        session.revision += 1
        events = [
            {"type": "collapse", "revision": session.revision,
             "stone": rec.stone_id,
             "pos": rules.format_coord(rec.pos, state.size)}
            for rec in outcome.collapses
        ]
        if state.is_terminal:
            if state.config.measure_at_end:
                records, captures = rules.end_measure(state, session.bits)
                if records:
                    session.recorder.record_end(records, captures)
                    events += [
                        {"type": "collapse", "revision": session.revision,
                         "stone": rec.stone_id,
                         "pos": rules.format_coord(rec.pos, state.size)}
                        for rec in records
                    ]
            session.result = rules.score(state)
            session.recorder.record_result(session.result)
            events.append({"type": "result", "revision": session.revision,
                           "winner": session.result.winner or "draw",
                           "margin": session.result.margin})
        self.persist(session)
        return events

    def run_bots(self, session: Session) -> list[dict]:
        events = []
        state = session.state
        while not state.is_terminal and state.to_move in session.bots:
            rng = session.bots[state.to_move]
            events += self.apply(session, state.to_move, random_bot_move(state, rng))
        return events

    def persist(self, session: Session) -> None:
        directory = self.settings.persist_dir
        if directory is None:
            return
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        text = serialize(session.recorder.kifu)
        if session.state.is_terminal:
            (directory / f"{session.id}.kifu").write_text(text)
            partial = directory / f"{session.id}.kifu.partial"
            if partial.exists():
                partial.unlink()
        else:
            (directory / f"{session.id}.kifu.partial").write_text(text)


def create_app(settings: ServerSettings | None = None) -> FastAPI:
    server = GameServer(settings)
    app = FastAPI(title="qgo")
    app.state.server = server

    @app.post("/sessions")
    async def create_session(request: dict):
        try:
            return server.create_session(request)
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/sessions/{sid}")
    async def session_info(sid: str):
        try:
            session = server.get_session(sid)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "session": sid,
            "size": session.config.size,
            "komi": session.config.komi,
            "status": session.status,
            "revision": session.revision,
            "move_count": session.state.move_count,
            "deterministic": session.deterministic(),
        }

    @app.get("/sessions/{sid}/kifu")
    async def session_kifu(sid: str):
        from fastapi.responses import PlainTextResponse
        try:
            session = server.get_session(sid)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return PlainTextResponse(serialize(session.recorder.kifu))

    @app.get("/sessions/{sid}/report")
    async def session_report(sid: str):
        try:
            session = server.get_session(sid)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        trace = session.trace()
        return {
            "session": sid,
            "moves": trace.moves,
            "q_black": trace.q_black,
            "q_white": trace.q_white,
            "s": trace.s,
            "mean_s": trace.mean_s(),
        }

    async def broadcast(session: Session, events: list[dict]) -> None:
        dead = []
        for sock, role in session.watchers:
            try:
                for event in events:
                    await sock.send_json(event)
                await sock.send_json({"type": "state",
                                      "revision": session.revision,
                                      "view": session_view(session, role)})
            except Exception as exc:
                logger.warning("dropping %s watcher of session %s: %r",
                               ROLE_NAMES.get(role, "spectator"), session.id, exc)
                dead.append((sock, role))
        for item in dead:
            if item in session.watchers:
                session.watchers.remove(item)

    @app.websocket("/ws")
    async def websocket_endpoint(sock: WebSocket):
        await sock.accept()
        session: Session | None = None
        role: int | None = None
        try:
            while True:
                message = await sock.receive_json()
                kind = message.get("type")
                if kind == "create":
                    try:
                        created = server.create_session(message)
                    except (ValueError, KeyError) as exc:
                        await sock.send_json({"type": "error", "code": "bad_config",
                                              "message": str(exc)})
                        continue
                    await sock.send_json({"type": "created", **created})
                elif kind == "join":
                    sid = message.get("session", "")
                    try:
                        session = server.get_session(sid)
                    except KeyError as exc:
                        await sock.send_json({"type": "error", "code": "unknown_session",
                                              "message": str(exc)})
                        continue
                    token = message.get("token")
                    if token is None:
                        role = None
                    elif token in session.tokens:
                        role = session.tokens[token]
                    else:
                        await sock.send_json({"type": "error", "code": "bad_token",
                                              "message": "invalid join token"})
                        continue
                    session.watchers.append((sock, role))
                    async with session.lock:
                        events = server.run_bots(session)
                        if events:
                            await broadcast(session, events)
                        await sock.send_json({"type": "state",
                                              "revision": session.revision,
                                              "view": session_view(session, role)})
                elif kind == "move":
                    if session is None or role is None:
                        await sock.send_json({"type": "error", "code": "not_joined",
                                              "message": "join a session with a player token first"})
                        continue
                    async with session.lock:
                        try:
                            move = server._parse_move(session, message)
                            events = server.apply(session, role, move)
                            events += server.run_bots(session)
                        except IllegalMoveError as exc:
                            await sock.send_json({"type": "error", "code": "illegal_move",
                                                  "message": str(exc)})
                            continue
                        except BitsExhausted as exc:
                            await sock.send_json({"type": "error", "code": "bits_exhausted",
                                                  "message": str(exc)})
                            continue
                        await broadcast(session, events)
                else:
                    await sock.send_json({"type": "error", "code": "bad_message",
                                          "message": f"unknown message type {kind!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if session is not None:
                session.watchers = [(s, r) for s, r in session.watchers if s is not sock]

    return app
