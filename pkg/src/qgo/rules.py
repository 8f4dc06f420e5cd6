"""Quantum Go rules engine.

Stones are placed on two intersections at once and stay in superposition
until another stone enters their detectable area, at which point an ordered
collapse measurement settles them onto a single intersection.  Captures, Ko
and scoring follow area-scoring Go, with liberties extended so that quantum
candidates never fill a neighbor's liberty.

Board cells are flat indices ``pos = row * size + col`` with row 0 at the
bottom; the letter-number labels used by every interface skip the letter I.
The grid stores ``0`` for empty, ``+id`` for a settled (classical) stone and
``-id`` for a quantum candidate of stone ``id``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

BLACK = 1
WHITE = 2
COLOR_NAMES = {BLACK: "B", WHITE: "W"}
COLOR_BY_NAME = {"B": BLACK, "W": WHITE}

# Standard Go column lettering, I skipped.
COLUMN_LETTERS = "ABCDEFGHJKLMNOPQRSTUVWXYZ"

MAX_COORD_SIZE = len(COLUMN_LETTERS)


class IllegalMoveError(ValueError):
    """Raised for moves that violate the rules (occupied cells, Ko, game over)."""


def opponent(color: int) -> int:
    return BLACK + WHITE - color


def parse_coord(label: str, size: int) -> int:
    """Parse a letter-number label like ``B2`` into a flat cell index."""
    label = label.strip().upper()
    if len(label) < 2:
        raise ValueError(f"malformed coordinate {label!r}")
    col = COLUMN_LETTERS.find(label[0])
    if col < 0 or col >= size:
        raise ValueError(f"column {label[0]!r} out of range for size {size}")
    try:
        row = int(label[1:])
    except ValueError:
        raise ValueError(f"malformed coordinate {label!r}") from None
    if not 1 <= row <= size:
        raise ValueError(f"row {row} out of range for size {size}")
    return (row - 1) * size + col


def format_coord(pos: int, size: int) -> str:
    """Format a flat cell index as a letter-number label (I skipped)."""
    row, col = divmod(pos, size)
    return f"{COLUMN_LETTERS[col]}{row + 1}"


@dataclass
class BoardConfig:
    """Per-game configuration.

    ``theta``/``phi`` parameterize the entangled state backing every stone of
    the game (cos(theta), e^{i phi} sin(theta)); white may override them.
    ``phi`` is recorded on stones but has no effect on collapse outcomes in
    the computational-basis measurement used here.
    """

    size: int = 19
    komi: float = 0.0
    detect_range: int = 1
    measure_at_end: bool = True
    theta: float = math.pi / 4
    phi: float = 0.0
    theta_white: float | None = None
    phi_white: float | None = None

    def validate(self) -> None:
        if self.size < 2:
            raise ValueError(f"board size must be >= 2, got {self.size}")
        if self.size > MAX_COORD_SIZE:
            raise ValueError(f"board size must be <= {MAX_COORD_SIZE}, got {self.size}")
        if self.komi < 0:
            raise ValueError(f"komi must be >= 0, got {self.komi}")
        if self.detect_range < 1:
            raise ValueError(f"detect_range must be >= 1, got {self.detect_range}")
        for theta in (self.theta, self.theta_white):
            if theta is not None and not 0.0 <= theta <= math.pi / 2:
                raise ValueError(f"theta must be within [0, pi/2], got {theta}")

    def theta_for(self, color: int) -> float:
        if color == WHITE and self.theta_white is not None:
            return self.theta_white
        return self.theta

    def phi_for(self, color: int) -> float:
        if color == WHITE and self.phi_white is not None:
            return self.phi_white
        return self.phi


@dataclass
class QuantumStone:
    """A stone with an ordered candidate pair; ``pos`` is set once settled."""

    id: int
    color: int
    p1: int
    p2: int
    theta: float
    phi: float
    pos: int | None = None
    captured: bool = False

    @property
    def is_quantum(self) -> bool:
        return self.pos is None and not self.captured

    @property
    def is_classical(self) -> bool:
        return self.pos is not None and not self.captured

    def amplitudes(self) -> tuple[complex, complex]:
        """(a1, a2) with |a1|^2 the probability of settling on p1."""
        a1 = complex(math.cos(self.theta), 0.0)
        a2 = complex(math.cos(self.phi), math.sin(self.phi)) * math.sin(self.theta)
        return a1, a2

    def copy(self) -> "QuantumStone":
        return QuantumStone(self.id, self.color, self.p1, self.p2,
                            self.theta, self.phi, self.pos, self.captured)


class Place(NamedTuple):
    p1: int
    p2: int


class _Pass:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "Pass"


PASS = _Pass()

Move = Place | _Pass


@dataclass
class CollapseRecord:
    stone_id: int
    bit: int
    pos: int
    order_index: int


@dataclass
class MoveOutcome:
    move: Move
    collapses: list[CollapseRecord]
    captures: list[tuple[int, int]]  # (stone id, position it was removed from)
    state: "GameState"


@dataclass
class ScoreResult:
    black: int
    white: int
    margin: float
    winner: str | None  # "B", "W" or None for a draw

    @property
    def is_draw(self) -> bool:
        return self.winner is None


# Neighborhood caches keyed by board size / detection radius.
_NEIGHBORS: dict[int, list[tuple[int, ...]]] = {}
_DETECT: dict[tuple[int, int], list[tuple[int, ...]]] = {}


def neighbors(size: int) -> list[tuple[int, ...]]:
    """Per-cell orthogonal 4-neighborhoods (liberties, groups)."""
    cached = _NEIGHBORS.get(size)
    if cached is None:
        cached = []
        for pos in range(size * size):
            row, col = divmod(pos, size)
            cells = []
            if col > 0:
                cells.append(pos - 1)
            if col < size - 1:
                cells.append(pos + 1)
            if row > 0:
                cells.append(pos - size)
            if row < size - 1:
                cells.append(pos + size)
            cached.append(tuple(cells))
        _NEIGHBORS[size] = cached
    return cached


def detect_neighbors(size: int, detect_range: int) -> list[tuple[int, ...]]:
    """Per-cell detectable area: cells within Manhattan distance detect_range."""
    key = (size, detect_range)
    cached = _DETECT.get(key)
    if cached is None:
        cached = []
        for pos in range(size * size):
            row, col = divmod(pos, size)
            cells = []
            for dr in range(-detect_range, detect_range + 1):
                span = detect_range - abs(dr)
                for dc in range(-span, span + 1):
                    if dr == 0 and dc == 0:
                        continue
                    r, c = row + dr, col + dc
                    if 0 <= r < size and 0 <= c < size:
                        cells.append(r * size + c)
            cached.append(tuple(cells))
        _DETECT[key] = cached
    return cached


@dataclass
class GameState:
    config: BoardConfig
    grid: list[int]
    stones: dict[int, QuantumStone]
    to_move: int
    consecutive_passes: int
    move_count: int
    history: list[bytes]
    history_set: set[bytes]

    @property
    def size(self) -> int:
        return self.config.size

    @property
    def is_terminal(self) -> bool:
        return self.consecutive_passes >= 2

    def copy(self) -> "GameState":
        return GameState(
            config=self.config,
            grid=list(self.grid),
            stones={sid: s.copy() for sid, s in self.stones.items()},
            to_move=self.to_move,
            consecutive_passes=self.consecutive_passes,
            move_count=self.move_count,
            history=list(self.history),
            history_set=set(self.history_set),
        )

    def stone_at(self, pos: int) -> QuantumStone | None:
        v = self.grid[pos]
        return self.stones[abs(v)] if v else None

    def quantum_stones(self) -> list[QuantumStone]:
        return [s for s in self.stones.values() if s.is_quantum]

    def empty_cells(self) -> list[int]:
        return [pos for pos, v in enumerate(self.grid) if v == 0]

    def digest(self, extra_pair: tuple[int, int, int] | None = None) -> bytes:
        """Canonical encoding of the observable state: classical stones plus
        unordered candidate pairs.  ``extra_pair=(color, a, b)`` overlays a
        hypothetical new placement for Ko checks without mutating the state.
        """
        cells = bytearray(len(self.grid))
        pairs = []
        for pos, v in enumerate(self.grid):
            if v > 0:
                cells[pos] = self.stones[v].color
            elif v < 0:
                cells[pos] = self.stones[-v].color + 2
        for s in self.stones.values():
            if s.is_quantum:
                a, b = (s.p1, s.p2) if s.p1 < s.p2 else (s.p2, s.p1)
                pairs.append((s.color, a, b))
        if extra_pair is not None:
            color, a, b = extra_pair
            if a > b:
                a, b = b, a
            cells[a] = color + 2
            cells[b] = color + 2
            pairs.append((color, a, b))
        pairs.sort()
        out = bytearray()
        out.append(self.size)
        out += cells
        for color, a, b in pairs:
            out.append(color)
            out += a.to_bytes(2, "little")
            out += b.to_bytes(2, "little")
        return bytes(out)

    def fingerprint(self) -> bytes:
        """Full-state encoding used by replay-determinism checks."""
        parts = [self.digest(), bytes([self.to_move, self.consecutive_passes])]
        parts.append(self.move_count.to_bytes(4, "little"))
        for sid in sorted(self.stones):
            s = self.stones[sid]
            pos = -1 if s.pos is None else s.pos
            parts.append(
                f"{sid}:{s.color}:{s.p1}:{s.p2}:{pos}:{int(s.captured)}"
                f":{s.theta!r}:{s.phi!r}".encode()
            )
        parts.append(len(self.history).to_bytes(4, "little"))
        return b"|".join(parts)


def new_game(config: BoardConfig) -> GameState:
    config.validate()
    state = GameState(
        config=config,
        grid=[0] * (config.size * config.size),
        stones={},
        to_move=BLACK,
        consecutive_passes=0,
        move_count=0,
        history=[],
        history_set=set(),
    )
    first = state.digest()
    state.history.append(first)
    state.history_set.add(first)
    return state


def is_legal(state: GameState, move: Move) -> bool:
    if state.is_terminal:
        return False
    if move is PASS:
        return True
    p1, p2 = move
    n = len(state.grid)
    if p1 == p2 or not (0 <= p1 < n and 0 <= p2 < n):
        return False
    if state.grid[p1] != 0 or state.grid[p2] != 0:
        return False
    # Positional superko on the pre-collapse observable state.
    return state.digest(extra_pair=(state.to_move, p1, p2)) not in state.history_set


def legal_moves(state: GameState) -> list[Move]:
    """Pass plus every legal unordered candidate pair (canonical p1 < p2).

    Either ordering of a returned pair is playable; the p1 designation is the
    mover's choice and does not affect legality.
    """
    if state.is_terminal:
        raise IllegalMoveError("game is over")
    moves: list[Move] = [PASS]
    empties = state.empty_cells()
    for i, a in enumerate(empties):
        for b in empties[i + 1:]:
            if state.digest(extra_pair=(state.to_move, a, b)) not in state.history_set:
                moves.append(Place(a, b))
    return moves


def _collect_involved(state: GameState, cells: tuple[int, int],
                      mover_color: int) -> tuple[bool, list[int]]:
    """Stones inside the detectable area of a candidate pair.

    Returns (any stone adjacent at all, involved quantum stone ids ordered
    mover-color-first then ascending id).  Classical neighbors trigger the
    measurement but have nothing to measure.
    """
    detect = detect_neighbors(state.size, state.config.detect_range)
    own = set(cells)
    triggered = False
    quantum_ids: set[int] = set()
    for cell in cells:
        for nb in detect[cell]:
            if nb in own:
                continue
            v = state.grid[nb]
            if v == 0:
                continue
            triggered = True
            if v < 0:
                quantum_ids.add(-v)
    ordered = sorted(quantum_ids, key=lambda sid: (state.stones[sid].color != mover_color, sid))
    return triggered, ordered


def involved_stones(state: GameState, place: Place) -> list[int]:
    """Initial measurement order for a prospective placement.

    Empty when nothing is adjacent; otherwise mover-color quantum stones
    ascending, the other color ascending, then the new stone's id last.
    """
    triggered, ordered = _collect_involved(state, (place.p1, place.p2), state.to_move)
    if not triggered:
        return []
    return ordered + [state.move_count + 1]


def _bit_for(bits, color: int) -> int:
    source = bits[color] if isinstance(bits, dict) else bits
    return source.next_bit()


def resolve_collapse(state: GameState, order: list[int], bits) -> list[CollapseRecord]:
    """Measure the listed stones in order, cascading to fixpoint.

    Each settling stone consumes one bit (0 -> p1, 1 -> p2).  A newly settled
    position pulls any still-quantum stone inside its detectable area into the
    queue, ordered settling-stone's-color-first then ascending id.
    """
    detect = detect_neighbors(state.size, state.config.detect_range)
    queue = list(order)
    queued = set(order)
    records: list[CollapseRecord] = []
    i = 0
    while i < len(queue):
        sid = queue[i]
        i += 1
        stone = state.stones[sid]
        if not stone.is_quantum:
            continue
        bit = _bit_for(bits, stone.color)
        settled = stone.p1 if bit == 0 else stone.p2
        vacated = stone.p2 if bit == 0 else stone.p1
        state.grid[vacated] = 0
        state.grid[settled] = sid
        stone.pos = settled
        records.append(CollapseRecord(sid, bit, settled, len(records)))
        cascade: list[int] = []
        for nb in detect[settled]:
            v = state.grid[nb]
            if v < 0 and -v not in queued:
                cascade.append(-v)
        if cascade:
            cascade.sort(key=lambda t: (state.stones[t].color != stone.color, t))
            queue.extend(cascade)
            queued.update(cascade)
    return records


def group_liberties(state: GameState, at: int) -> tuple[set[int], int]:
    """Connected same-color classical group through ``at`` and its liberty
    count; empty cells and quantum candidates both count as liberties."""
    v = state.grid[at]
    if v <= 0:
        raise ValueError(f"no classical stone at {format_coord(at, state.size)}")
    color = state.stones[v].color
    nbs = neighbors(state.size)
    group = {at}
    frontier = [at]
    liberties: set[int] = set()
    while frontier:
        pos = frontier.pop()
        for nb in nbs[pos]:
            w = state.grid[nb]
            if w <= 0:
                liberties.add(nb)
            elif state.stones[w].color == color and nb not in group:
                group.add(nb)
                frontier.append(nb)
    return group, len(liberties)


def _remove_dead_groups(state: GameState, color: int) -> list[tuple[int, int]]:
    removed: list[tuple[int, int]] = []
    seen: set[int] = set()
    for pos, v in enumerate(state.grid):
        if v <= 0 or pos in seen:
            continue
        stone = state.stones[v]
        if stone.color != color:
            continue
        group, libs = group_liberties(state, pos)
        seen |= group
        if libs == 0:
            for cell in sorted(group):
                sid = state.grid[cell]
                state.grid[cell] = 0
                dead = state.stones[sid]
                dead.captured = True
                dead.pos = None
                removed.append((sid, cell))
    return removed


def _resolve_captures(state: GameState, mover: int) -> list[tuple[int, int]]:
    # Opponent groups fall first; then any own zero-liberty group (suicide
    # is never rejected up front because collapse outcomes are stochastic).
    captures = _remove_dead_groups(state, opponent(mover))
    captures += _remove_dead_groups(state, mover)
    return captures


def apply_move(state: GameState, move: Move, bits=None) -> MoveOutcome:
    """Apply a pass or a two-cell placement, resolving collapse and captures.

    Mutates ``state`` in place and returns the outcome (which references the
    same state object).  ``bits`` may be a single bit source or a dict keyed
    by color when the players draw from separate streams.
    """
    if state.is_terminal:
        raise IllegalMoveError("game is over")
    if move is PASS:
        state.consecutive_passes += 1
        state.to_move = opponent(state.to_move)
        state.move_count += 1
        return MoveOutcome(PASS, [], [], state)

    p1, p2 = move
    if not is_legal(state, move):
        reason = "occupied or out of range"
        if 0 <= p1 < len(state.grid) and 0 <= p2 < len(state.grid) and p1 != p2 \
                and state.grid[p1] == 0 and state.grid[p2] == 0:
            reason = "recreates a previous position (superko)"
        raise IllegalMoveError(
            f"illegal placement {format_coord(p1, state.size)} "
            f"{format_coord(p2, state.size)}: {reason}")

    color = state.to_move
    sid = state.move_count + 1
    stone = QuantumStone(sid, color, p1, p2,
                         state.config.theta_for(color), state.config.phi_for(color))
    state.stones[sid] = stone
    state.grid[p1] = -sid
    state.grid[p2] = -sid

    # The Ko rule lives in the pre-collapse observable domain: record the
    # state as placed (before measurement) so no (position, pair) combination
    # can ever be attempted twice, as well as the resolved state below.
    pre = state.digest()
    state.history.append(pre)
    state.history_set.add(pre)

    triggered, ordered = _collect_involved(state, (p1, p2), color)
    collapses: list[CollapseRecord] = []
    captures: list[tuple[int, int]] = []
    if triggered:
        collapses = resolve_collapse(state, ordered + [sid], bits)
        captures = _resolve_captures(state, color)

    digest = state.digest()
    state.history.append(digest)
    state.history_set.add(digest)
    state.consecutive_passes = 0
    state.to_move = opponent(color)
    state.move_count += 1
    return MoveOutcome(move, collapses, captures, state)


def end_measure(state: GameState, bits) -> tuple[list[CollapseRecord], list[tuple[int, int]]]:
    """Force-measure every remaining quantum stone before scoring.

    The last-placed stone acts as the ordering trigger: its color measures
    first (ascending id), then the other color, the trigger itself last.
    """
    remaining = [s for s in state.stones.values() if s.is_quantum]
    if not remaining:
        return [], []
    trigger_id = max(state.stones)
    trigger = state.stones[trigger_id]
    order = sorted(
        (s.id for s in remaining),
        key=lambda sid: (sid == trigger_id, state.stones[sid].color != trigger.color, sid),
    )
    records = resolve_collapse(state, order, bits)
    captures = _resolve_captures(state, trigger.color)
    return records, captures


def _area_score(state: GameState) -> tuple[int, int, int]:
    """Area scoring: own classical stones plus empty regions bordered
    exclusively by own color.  Returns (black, white, neutral)."""
    size = state.size
    nbs = neighbors(size)
    counts = {BLACK: 0, WHITE: 0}
    neutral = 0
    for v in state.grid:
        if v > 0:
            counts[state.stones[v].color] += 1
        elif v < 0:
            neutral += 1  # unmeasured candidates score for nobody
    seen = [False] * len(state.grid)
    for start, v in enumerate(state.grid):
        if v != 0 or seen[start]:
            continue
        region = [start]
        seen[start] = True
        borders: set[int] = set()
        idx = 0
        while idx < len(region):
            pos = region[idx]
            idx += 1
            for nb in nbs[pos]:
                w = state.grid[nb]
                if w == 0:
                    if not seen[nb]:
                        seen[nb] = True
                        region.append(nb)
                elif w > 0:
                    borders.add(state.stones[w].color)
                else:
                    borders.add(0)  # candidate: neutralizes the region
        if borders == {BLACK}:
            counts[BLACK] += len(region)
        elif borders == {WHITE}:
            counts[WHITE] += len(region)
        else:
            neutral += len(region)
    return counts[BLACK], counts[WHITE], neutral


def score(state: GameState, bits=None) -> ScoreResult:
    """Score a finished game; does not mutate the caller's state.

    With ``measure_at_end`` any leftover quantum stones are collapsed on an
    internal copy first (consuming ``bits``).
    """
    if not state.is_terminal:
        raise ValueError("cannot score a game still in progress")
    work = state
    if state.config.measure_at_end and any(s.is_quantum for s in state.stones.values()):
        if bits is None:
            raise ValueError("end measurement requires a bit source")
        work = state.copy()
        end_measure(work, bits)
    black, white, _neutral = _area_score(work)
    margin = black - (white + state.config.komi)
    winner = "B" if margin > 0 else "W" if margin < 0 else None
    return ScoreResult(black, white, margin, winner)


def check_invariants(state: GameState) -> None:
    """Assert every structural rules invariant; raises AssertionError."""
    size = state.size
    occupied: dict[int, list[int]] = {}
    for pos, v in enumerate(state.grid):
        if v:
            occupied.setdefault(abs(v), []).append(pos)
    for sid, stone in state.stones.items():
        cells = occupied.get(sid, [])
        a1, a2 = stone.amplitudes()
        assert abs(abs(a1) ** 2 + abs(a2) ** 2 - 1.0) < 1e-12, f"stone {sid} amplitudes"
        if stone.is_quantum:
            assert sorted(cells) == sorted((stone.p1, stone.p2)), \
                f"quantum stone {sid} must occupy exactly its two candidates"
            assert state.grid[stone.p1] == -sid and state.grid[stone.p2] == -sid
        elif stone.captured:
            assert cells == [], f"captured stone {sid} still on grid"
        else:
            assert cells == [stone.pos], f"classical stone {sid} occupancy"
            assert state.grid[stone.pos] == sid
    for sid in occupied:
        assert sid in state.stones, f"grid references unknown stone {sid}"

    # Collapse fixpoint: no candidate adjacent to any other stone's cell.
    detect = detect_neighbors(size, state.config.detect_range)
    for stone in state.stones.values():
        if not stone.is_quantum:
            continue
        own = {stone.p1, stone.p2}
        for cell in own:
            for nb in detect[cell]:
                if nb not in own:
                    assert state.grid[nb] == 0, (
                        f"candidate {format_coord(cell, size)} of stone {stone.id} "
                        f"adjacent to occupied {format_coord(nb, size)}")

    # Capture soundness: every classical group keeps at least one liberty.
    seen: set[int] = set()
    for pos, v in enumerate(state.grid):
        if v > 0 and pos not in seen:
            group, libs = group_liberties(state, pos)
            seen |= group
            assert libs > 0, f"zero-liberty group at {format_coord(pos, size)}"

    assert 0 <= state.consecutive_passes <= 2
    assert state.is_terminal == (state.consecutive_passes == 2)
