"""Kifu persistence: a line-oriented, bit-exact game record format.

Grammar (version tag on line 1):

    qgo-kifu v1
    size N
    komi R
    theta R [R]          # uniform, or black/white override
    phi R [R]
    source scripted|simulated|file <detail>
    <idx> <B|W> place <p1> <p2>
    <idx> <B|W> pass
    collapse <stone-id> bit=<0|1> -> <pos>
    capture <stone-id> at <pos>
    result <B|W>+<margin> | result draw
    # comments and blank lines are ignored

Collapse and capture lines attach to the move line above them.  Lines after
the final pass record the end-of-game measurement that precedes scoring.
Recorded collapse bits make every kifu replayable offline with no access to
the original bit source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import rules
from .rules import (BLACK, WHITE, PASS, BoardConfig, GameState, MoveOutcome,
                    Place, ScoreResult, format_coord, parse_coord)
from .source import BitsExhausted, ScriptedBitSource

VERSION_TAG = "qgo-kifu v1"


class KifuParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ReplayDivergenceError(ValueError):
    """The engine disagrees with a recorded move; names the first bad move."""

    def __init__(self, move_index: int, message: str):
        super().__init__(f"move {move_index}: {message}")
        self.move_index = move_index


@dataclass
class KifuCollapse:
    stone_id: int
    bit: int
    pos: str


@dataclass
class KifuMove:
    index: int
    color: str  # "B" or "W"
    place: tuple[str, str] | None  # (p1, p2) labels, None for a pass
    collapses: list[KifuCollapse] = field(default_factory=list)
    captures: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class Kifu:
    size: int
    komi: float = 0.0
    theta: float = 0.7853981633974483  # DEFAULT_THETA
    phi: float = 0.0
    theta_white: float | None = None
    phi_white: float | None = None
    source_kind: str = "scripted"
    source_detail: str = ""
    moves: list[KifuMove] = field(default_factory=list)
    end_collapses: list[KifuCollapse] = field(default_factory=list)
    end_captures: list[tuple[int, str]] = field(default_factory=list)
    result: tuple[str, float] | None = None  # ("B"|"W"|"draw", margin)

    def config(self) -> BoardConfig:
        return BoardConfig(size=self.size, komi=self.komi, theta=self.theta,
                           phi=self.phi, theta_white=self.theta_white,
                           phi_white=self.phi_white)

    def all_bits(self) -> list[int]:
        bits = [c.bit for mv in self.moves for c in mv.collapses]
        bits += [c.bit for c in self.end_collapses]
        return bits


def _fmt_num(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(float(value))


DEFAULT_THETA = 0.7853981633974483  # pi/4, the maximally entangled stone


def serialize(kifu: Kifu) -> str:
    """Canonical form; header lines whose values equal the defaults (komi 0,
    theta pi/4, phi 0, unspecified source) are omitted."""
    lines = [VERSION_TAG, f"size {kifu.size}"]
    if kifu.komi != 0:
        lines.append(f"komi {_fmt_num(kifu.komi)}")
    if kifu.theta != DEFAULT_THETA or (kifu.theta_white is not None
                                       and kifu.theta_white != kifu.theta):
        theta = _fmt_num(kifu.theta)
        if kifu.theta_white is not None and kifu.theta_white != kifu.theta:
            theta += f" {_fmt_num(kifu.theta_white)}"
        lines.append(f"theta {theta}")
    if kifu.phi != 0 or (kifu.phi_white is not None and kifu.phi_white != kifu.phi):
        phi = _fmt_num(kifu.phi)
        if kifu.phi_white is not None and kifu.phi_white != kifu.phi:
            phi += f" {_fmt_num(kifu.phi_white)}"
        lines.append(f"phi {phi}")
    if kifu.source_detail or kifu.source_kind != "scripted":
        detail = f" {kifu.source_detail}" if kifu.source_detail else ""
        lines.append(f"source {kifu.source_kind}{detail}")

    def emit_records(collapses, captures):
        for c in collapses:
            lines.append(f"collapse {c.stone_id} bit={c.bit} -> {c.pos}")
        for sid, pos in captures:
            lines.append(f"capture {sid} at {pos}")

    for mv in kifu.moves:
        if mv.place is None:
            lines.append(f"{mv.index} {mv.color} pass")
        else:
            lines.append(f"{mv.index} {mv.color} place {mv.place[0]} {mv.place[1]}")
        emit_records(mv.collapses, mv.captures)
    emit_records(kifu.end_collapses, kifu.end_captures)
    if kifu.result is not None:
        winner, margin = kifu.result
        if winner == "draw":
            lines.append("result draw")
        else:
            lines.append(f"result {winner}+{_fmt_num(abs(margin))}")
    return "\n".join(lines) + "\n"


def _parse_float_pair(parts: list[str], lineno: int, what: str) -> tuple[float, float | None]:
    try:
        first = float(parts[0])
        second = float(parts[1]) if len(parts) > 1 else None
    except (ValueError, IndexError):
        raise KifuParseError(f"malformed {what} value", lineno) from None
    if len(parts) > 2:
        raise KifuParseError(f"too many {what} values", lineno)
    return first, second


def parse(text: str) -> Kifu:
    lines = text.splitlines()
    if not lines or lines[0].strip() != VERSION_TAG:
        raise KifuParseError(f"expected version tag {VERSION_TAG!r}", 1)

    header: dict[str, tuple[list[str], int]] = {}
    body_start = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] in ("size", "komi", "theta", "phi", "source"):
            if parts[0] in header:
                raise KifuParseError(f"duplicate header {parts[0]!r}", lineno)
            header[parts[0]] = (parts[1:], lineno)
        else:
            body_start = lineno
            break
    for required in ("size",):
        if required not in header:
            raise KifuParseError(f"missing header {required!r}", body_start or len(lines))

    def header_num(name: str, default: float) -> tuple[float, float | None]:
        if name not in header:
            return default, None
        parts, lineno = header[name]
        return _parse_float_pair(parts, lineno, name)

    size_parts, size_line = header["size"]
    try:
        size = int(size_parts[0])
    except (ValueError, IndexError):
        raise KifuParseError("malformed size", size_line) from None
    komi = header_num("komi", 0.0)[0]
    theta, theta_white = header_num("theta", 0.7853981633974483)
    phi, phi_white = header_num("phi", 0.0)
    source_kind, source_detail = "scripted", ""
    if "source" in header:
        parts, lineno = header["source"]
        if not parts or parts[0] not in ("scripted", "simulated", "file"):
            raise KifuParseError("source must be scripted, simulated or file", lineno)
        source_kind = parts[0]
        source_detail = " ".join(parts[1:])

    kifu = Kifu(size=size, komi=komi, theta=theta, phi=phi,
                theta_white=theta_white, phi_white=phi_white,
                source_kind=source_kind, source_detail=source_detail)

    def check_coord(label: str, lineno: int) -> str:
        try:
            parse_coord(label, size)
        except ValueError as exc:
            raise KifuParseError(str(exc), lineno) from None
        return label.upper()

    placed_ids: set[int] = set()
    current: KifuMove | None = None
    after_final_pass = False
    start = (body_start - 1) if body_start else len(lines)
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "collapse":
            if len(parts) != 5 or not parts[2].startswith("bit=") or parts[3] != "->":
                raise KifuParseError("malformed collapse line", lineno)
            try:
                sid = int(parts[1])
                bit = int(parts[2][4:])
            except ValueError:
                raise KifuParseError("malformed collapse line", lineno) from None
            if bit not in (0, 1):
                raise KifuParseError(f"collapse bit must be 0 or 1, got {bit}", lineno)
            if sid not in placed_ids:
                raise KifuParseError(f"collapse cites unknown stone {sid}", lineno)
            record = KifuCollapse(sid, bit, check_coord(parts[4], lineno))
            if current is not None and current.place is None:
                after_final_pass = True
            if after_final_pass or current is None:
                if current is None:
                    raise KifuParseError("collapse before any move", lineno)
                kifu.end_collapses.append(record)
            else:
                current.collapses.append(record)
        elif head == "capture":
            if len(parts) != 4 or parts[2] != "at":
                raise KifuParseError("malformed capture line", lineno)
            try:
                sid = int(parts[1])
            except ValueError:
                raise KifuParseError("malformed capture line", lineno) from None
            if sid not in placed_ids:
                raise KifuParseError(f"capture cites unknown stone {sid}", lineno)
            entry = (sid, check_coord(parts[3], lineno))
            if current is not None and current.place is None:
                after_final_pass = True
            if after_final_pass or current is None:
                if current is None:
                    raise KifuParseError("capture before any move", lineno)
                kifu.end_captures.append(entry)
            else:
                current.captures.append(entry)
        elif head == "result":
            if len(parts) != 2:
                raise KifuParseError("malformed result line", lineno)
            if parts[1] == "draw":
                kifu.result = ("draw", 0.0)
            else:
                winner, _, margin = parts[1].partition("+")
                if winner not in ("B", "W") or not margin:
                    raise KifuParseError("result must be B+<margin>, W+<margin> or draw", lineno)
                try:
                    kifu.result = (winner, float(margin))
                except ValueError:
                    raise KifuParseError("malformed result margin", lineno) from None
        else:
            if after_final_pass and kifu.end_collapses:
                raise KifuParseError("move after end-of-game measurement", lineno)
            try:
                index = int(head)
            except ValueError:
                raise KifuParseError(f"unexpected line {head!r}", lineno) from None
            expected = len(kifu.moves) + 1
            if index != expected:
                raise KifuParseError(f"move {index}: expected index {expected}", lineno)
            if len(parts) < 3 or parts[1] not in ("B", "W"):
                raise KifuParseError(f"move {index}: malformed move line", lineno)
            expected_color = "B" if index % 2 == 1 else "W"
            if parts[1] != expected_color:
                raise KifuParseError(
                    f"move {index}: expected color {expected_color}, got {parts[1]}", lineno)
            if parts[2] == "pass":
                if len(parts) != 3:
                    raise KifuParseError(f"move {index}: malformed pass line", lineno)
                current = KifuMove(index, parts[1], None)
            elif parts[2] == "place":
                if len(parts) != 5:
                    raise KifuParseError(f"move {index}: place needs two coordinates", lineno)
                p1 = check_coord(parts[3], lineno)
                p2 = check_coord(parts[4], lineno)
                if p1 == p2:
                    raise KifuParseError(f"move {index}: candidates must differ", lineno)
                current = KifuMove(index, parts[1], (p1, p2))
                placed_ids.add(index)
            else:
                raise KifuParseError(f"move {index}: unknown action {parts[2]!r}", lineno)
            after_final_pass = False
            kifu.moves.append(current)
    return kifu


def load(path) -> Kifu:
    return parse(Path(path).read_text())


def load_bundled(name: str) -> Kifu:
    """Load one of the packaged demo kifus: fig4, figs1, figs2, selfplay0."""
    from importlib.resources import files

    return parse((files("qgo") / "data" / f"{name}.kifu").read_text())


def save(kifu: Kifu, path) -> None:
    Path(path).write_text(serialize(kifu))


# ---------------------------------------------------------------------------
# Replay


def _compare_records(index: int, got: list[rules.CollapseRecord],
                     expected: list[KifuCollapse], size: int) -> None:
    if len(got) != len(expected):
        raise ReplayDivergenceError(
            index, f"engine produced {len(got)} collapses, kifu records {len(expected)}")
    for rec, exp in zip(got, expected):
        pos = format_coord(rec.pos, size)
        if rec.stone_id != exp.stone_id or rec.bit != exp.bit or pos != exp.pos:
            raise ReplayDivergenceError(
                index,
                f"collapse mismatch: engine stone {rec.stone_id} bit={rec.bit} -> {pos}, "
                f"kifu stone {exp.stone_id} bit={exp.bit} -> {exp.pos}")


def _compare_captures(index: int, got: list[tuple[int, int]],
                      expected: list[tuple[int, str]], size: int) -> None:
    got_labels = sorted((sid, format_coord(pos, size)) for sid, pos in got)
    if got_labels != sorted(expected):
        raise ReplayDivergenceError(
            index, f"capture mismatch: engine {got_labels}, kifu {sorted(expected)}")


def _iter_replay(kifu: Kifu):
    state = rules.new_game(kifu.config())
    for mv in kifu.moves:
        if mv.place is None:
            if mv.collapses:
                raise ReplayDivergenceError(mv.index, "pass cannot collapse stones")
            rules.apply_move(state, PASS)
            yield mv, state
            continue
        p1 = parse_coord(mv.place[0], kifu.size)
        p2 = parse_coord(mv.place[1], kifu.size)
        script = ScriptedBitSource([c.bit for c in mv.collapses])
        try:
            outcome = rules.apply_move(state, Place(p1, p2), script)
        except rules.IllegalMoveError as exc:
            raise ReplayDivergenceError(mv.index, str(exc)) from None
        except BitsExhausted:
            raise ReplayDivergenceError(
                mv.index, "engine consumed more collapse bits than recorded") from None
        if script.remaining():
            raise ReplayDivergenceError(
                mv.index, "kifu records more collapses than the engine produced")
        _compare_records(mv.index, outcome.collapses, mv.collapses, kifu.size)
        _compare_captures(mv.index, outcome.captures, mv.captures, kifu.size)
        yield mv, state
    yield None, state


def replay_states(kifu: Kifu):
    """Yield (state, quantum stone counts by color) after each move."""
    for mv, state in _iter_replay(kifu):
        if mv is None:
            break
        counts = {BLACK: 0, WHITE: 0}
        for stone in state.stones.values():
            if stone.is_quantum:
                counts[stone.color] += 1
        yield state, counts


def replay(kifu: Kifu) -> GameState:
    """Re-execute every move through the rules engine, verifying each
    recorded collapse, capture and the final result; returns the final state
    (after the recorded end-of-game measurement, when present)."""
    state = None
    for _mv, state in _iter_replay(kifu):
        pass
    final_index = len(kifu.moves)
    needs_end = bool(kifu.end_collapses) or kifu.result is not None
    if needs_end and not state.is_terminal:
        raise ReplayDivergenceError(final_index, "kifu has an ending but game not over")
    if kifu.end_collapses or (state.is_terminal and kifu.result is not None
                              and state.config.measure_at_end
                              and any(s.is_quantum for s in state.stones.values())):
        script = ScriptedBitSource([c.bit for c in kifu.end_collapses])
        try:
            records, captures = rules.end_measure(state, script)
        except BitsExhausted:
            raise ReplayDivergenceError(
                final_index, "end measurement needs more bits than recorded") from None
        if script.remaining():
            raise ReplayDivergenceError(
                final_index, "kifu records more end collapses than the engine produced")
        _compare_records(final_index, records, kifu.end_collapses, kifu.size)
        _compare_captures(final_index, captures, kifu.end_captures, kifu.size)
    if kifu.result is not None:
        result = rules.score(state)
        winner = result.winner or "draw"
        margin = abs(result.margin) if winner != "draw" else 0.0
        rec_winner, rec_margin = kifu.result
        if winner != rec_winner or abs(margin - abs(rec_margin)) > 1e-9:
            raise ReplayDivergenceError(
                final_index,
                f"result mismatch: engine {winner}+{margin}, kifu {rec_winner}+{rec_margin}")
    return state


# ---------------------------------------------------------------------------
# Recording and rendering


class KifuRecorder:
    """Accumulates engine outcomes into a Kifu as a game is played."""

    def __init__(self, config: BoardConfig, source_kind: str = "scripted",
                 source_detail: str = ""):
        self.kifu = Kifu(size=config.size, komi=config.komi,
                         theta=config.theta, phi=config.phi,
                         theta_white=config.theta_white, phi_white=config.phi_white,
                         source_kind=source_kind, source_detail=source_detail)
        self._size = config.size

    def _label(self, pos: int) -> str:
        return format_coord(pos, self._size)

    def _collapses(self, records) -> list[KifuCollapse]:
        return [KifuCollapse(r.stone_id, r.bit, self._label(r.pos)) for r in records]

    def _captures(self, captures) -> list[tuple[int, str]]:
        return [(sid, self._label(pos)) for sid, pos in captures]

    def record(self, outcome: MoveOutcome) -> None:
        index = len(self.kifu.moves) + 1
        color = "B" if index % 2 == 1 else "W"
        if outcome.move is PASS:
            self.kifu.moves.append(KifuMove(index, color, None))
            return
        place = (self._label(outcome.move.p1), self._label(outcome.move.p2))
        self.kifu.moves.append(KifuMove(index, color, place,
                                        self._collapses(outcome.collapses),
                                        self._captures(outcome.captures)))

    def record_end(self, records, captures) -> None:
        self.kifu.end_collapses = self._collapses(records)
        self.kifu.end_captures = self._captures(captures)

    def record_result(self, result: ScoreResult) -> None:
        if result.winner is None:
            self.kifu.result = ("draw", 0.0)
        else:
            self.kifu.result = (result.winner, abs(result.margin))


_GLYPHS = {  # (color, classical)
    (BLACK, False): "X",
    (WHITE, False): "O",
    (BLACK, True): "x",
    (WHITE, True): "o",
}


def render_board(state: GameState) -> str:
    """Character-grid rendering: X/O quantum candidates, x/o classical
    stones, dots for empty cells, coordinates on the margins."""
    size = state.size
    label_width = len(str(size))
    out = []
    for row in range(size - 1, -1, -1):
        cells = []
        for col in range(size):
            v = state.grid[row * size + col]
            if v == 0:
                cells.append(".")
            else:
                stone = state.stones[abs(v)]
                cells.append(_GLYPHS[(stone.color, v > 0)])
        out.append(f"{row + 1:>{label_width}} " + " ".join(cells))
    letters = " ".join(rules.COLUMN_LETTERS[c] for c in range(size))
    out.append(" " * (label_width + 1) + letters)
    return "\n".join(out)
