"""Shared test utilities: state construction and independent brute-force
oracles kept deliberately separate from the implementations they check."""

from __future__ import annotations

from qgo import rules
from qgo.rules import BLACK, WHITE, GameState, QuantumStone


def put_classical(state: GameState, label: str, color: int) -> QuantumStone:
    """Fabricate a settled stone for constructed positions."""
    pos = rules.parse_coord(label, state.size)
    assert state.grid[pos] == 0
    sid = max(state.stones, default=0) + 1
    stone = QuantumStone(sid, color, pos, pos, state.config.theta_for(color),
                         state.config.phi_for(color), pos=pos)
    state.stones[sid] = stone
    state.grid[pos] = sid
    state.move_count = max(state.move_count, sid)
    return stone


def put_quantum(state: GameState, label1: str, label2: str, color: int) -> QuantumStone:
    p1 = rules.parse_coord(label1, state.size)
    p2 = rules.parse_coord(label2, state.size)
    assert state.grid[p1] == 0 and state.grid[p2] == 0
    sid = max(state.stones, default=0) + 1
    stone = QuantumStone(sid, color, p1, p2, state.config.theta_for(color),
                         state.config.phi_for(color))
    state.stones[sid] = stone
    state.grid[p1] = -sid
    state.grid[p2] = -sid
    state.move_count = max(state.move_count, sid)
    return stone


def area_score_oracle(state: GameState) -> tuple[int, int, int]:
    """Independent flood-fill area scoring over the rendered board."""
    size = state.size
    color_at = {}
    for pos, v in enumerate(state.grid):
        if v > 0:
            color_at[pos] = state.stones[v].color
    black = sum(1 for c in color_at.values() if c == BLACK)
    white = sum(1 for c in color_at.values() if c == WHITE)
    neutral = sum(1 for v in state.grid if v < 0)
    visited = set()
    for start in range(size * size):
        if state.grid[start] != 0 or start in visited:
            continue
        region = {start}
        stack = [start]
        visited.add(start)
        border = set()
        while stack:
            pos = stack.pop()
            row, col = divmod(pos, size)
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                r, c = row + dr, col + dc
                if not (0 <= r < size and 0 <= c < size):
                    continue
                nb = r * size + c
                v = state.grid[nb]
                if v == 0:
                    if nb not in visited:
                        visited.add(nb)
                        region.add(nb)
                        stack.append(nb)
                elif v > 0:
                    border.add(state.stones[v].color)
                else:
                    border.add(0)
        if border == {BLACK}:
            black += len(region)
        elif border == {WHITE}:
            white += len(region)
        else:
            neutral += len(region)
    return black, white, neutral


def match_oracle(times, sides, window: int) -> list[tuple[int, int]]:
    """All-pairs window-scan coincidence matching: enumerate every in-window
    cross-side pair, order by completion (later stream index, then partner),
    and accept greedily with single-use tags."""
    n = len(times)
    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            if sides[i] != sides[j] and abs(int(times[i]) - int(times[j])) <= window:
                candidates.append((j, i))
    candidates.sort()
    used = set()
    pairs = []
    for later, earlier in candidates:
        if later in used or earlier in used:
            continue
        used.add(later)
        used.add(earlier)
        if sides[earlier] == 0:
            pairs.append((earlier, later))
        else:
            pairs.append((later, earlier))
    return pairs


def collapse_fixpoint_oracle(state: GameState) -> list[int]:
    """Cells violating the collapse fixpoint: any candidate cell within the
    detectable area of another stone's cell."""
    detect = rules.detect_neighbors(state.size, state.config.detect_range)
    bad = []
    for stone in state.stones.values():
        if not stone.is_quantum:
            continue
        own = {stone.p1, stone.p2}
        for cell in own:
            if any(state.grid[nb] != 0 for nb in detect[cell] if nb not in own):
                bad.append(cell)
    return bad


class MiniCollapseSim:
    """Independent dict-based re-implementation of ordered collapse with
    cascades, used to cross-check resolve_collapse on constructed states."""

    def __init__(self, state: GameState):
        self.size = state.size
        self.detect_range = state.config.detect_range
        self.stones = {
            sid: {"color": s.color, "p1": s.p1, "p2": s.p2,
                  "pos": s.pos, "captured": s.captured}
            for sid, s in state.stones.items()
        }

    def _cells(self, sid):
        s = self.stones[sid]
        if s["captured"]:
            return []
        if s["pos"] is not None:
            return [s["pos"]]
        return [s["p1"], s["p2"]]

    def _near(self, a, b):
        ra, ca = divmod(a, self.size)
        rb, cb = divmod(b, self.size)
        return 0 < abs(ra - rb) + abs(ca - cb) <= self.detect_range

    def run(self, order, bits):
        queue = list(order)
        queued = set(order)
        settled = []
        i = 0
        while i < len(queue):
            sid = queue[i]
            i += 1
            s = self.stones[sid]
            if s["pos"] is not None or s["captured"]:
                continue
            bit = bits[len(settled)]
            s["pos"] = s["p1"] if bit == 0 else s["p2"]
            settled.append((sid, bit, s["pos"]))
            pulled = []
            for tid, t in self.stones.items():
                if tid in queued or t["pos"] is not None or t["captured"]:
                    continue
                if any(self._near(s["pos"], cell) for cell in (t["p1"], t["p2"])):
                    pulled.append(tid)
            pulled.sort(key=lambda tid: (self.stones[tid]["color"] != s["color"], tid))
            queue.extend(pulled)
            queued.update(pulled)
        return settled


def classical_tree_count_oracle(size: int, depth: int) -> list[int]:
    """Independent recursive counter for the classical toy model."""
    counts = [0] * depth

    def captures(grid, color):
        removed = True  # run to a fixed point per color like the toy model
        seen = set()
        for start, w in enumerate(grid):
            if w != color or start in seen:
                continue
            group = [start]
            seen.add(start)
            alive = False
            k = 0
            while k < len(group):
                row, col = divmod(group[k], size)
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    r, c = row + dr, col + dc
                    if not (0 <= r < size and 0 <= c < size):
                        continue
                    nb = r * size + c
                    if grid[nb] == 0:
                        alive = True
                    elif grid[nb] == color and nb not in seen:
                        seen.add(nb)
                        group.append(nb)
                k += 1
            if not alive:
                for cell in group:
                    grid[cell] = 0
        return removed

    def rec(grid, to_move, level):
        if level == depth:
            return
        for pos in range(size * size):
            if grid[pos] != 0:
                continue
            child = list(grid)
            child[pos] = to_move
            captures(child, rules.opponent(to_move))
            captures(child, to_move)
            counts[level] += 1
            rec(child, rules.opponent(to_move), level + 1)

    rec([0] * (size * size), BLACK, 0)
    return counts
