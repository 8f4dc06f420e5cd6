"""Quantitative instruments: randomness tests, imperfect-information metrics
and brute-force complexity probes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rules
from ._kernels import autocorr_exact, autocorr_numerators
from .source import BitsExhausted, ScriptedBitSource


class TreeSizeGuardError(RuntimeError):
    """Enumeration would exceed the configured node budget."""


def confidence_bound(n: int) -> float:
    """95% confidence bound for lagged autocorrelation of a random series."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return 2.0 / math.sqrt(n)


@dataclass
class Correlogram:
    lags: np.ndarray
    r: np.ndarray
    confidence_bound: float
    proportion_within: float
    n: int

    def summary(self) -> dict:
        return {
            "n": self.n,
            "max_lag": int(self.lags[-1]) if len(self.lags) else 0,
            "confidence_bound": self.confidence_bound,
            "proportion_within": self.proportion_within,
        }

    def to_csv(self, path) -> None:
        """Write `lag,r` rows plus a sidecar `<path>.summary.json`."""
        path = Path(path)
        with open(path, "w") as fh:
            fh.write("lag,r\n")
            for lag, value in zip(self.lags, self.r):
                fh.write(f"{lag},{value!r}\n")
        with open(path.with_suffix(path.suffix + ".summary.json"), "w") as fh:
            json.dump(self.summary(), fh, indent=1)


def autocorrelation(series, max_lag: int, exact: bool = False) -> Correlogram:
    """Lagged autocorrelation coefficients r_1..r_max_lag.

    The default uses the large-N single-mean form (numerator over the first
    N-k products of deviations from the overall mean, normalized by the total
    sum of squares).  ``exact=True`` switches to the two-mean form with
    separate means and normalizations for the leading and trailing windows,
    for samples that are not much longer than the largest lag.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.shape[0]
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if max_lag >= n:
        raise ValueError(f"max_lag {max_lag} must be below the sample size {n}")
    xc = x - x.mean()
    ss = float(np.dot(xc, xc))
    if ss == 0.0:
        raise ValueError("series is constant; autocorrelation undefined")
    if exact:
        r = autocorr_exact(x, max_lag)
    else:
        r = autocorr_numerators(xc, max_lag) / ss
    bound = confidence_bound(n)
    proportion = float(np.mean(np.abs(r) <= bound))
    return Correlogram(np.arange(1, max_lag + 1), r, bound, proportion, n)


# ---------------------------------------------------------------------------
# Average information-set size


@dataclass
class AISTrace:
    """Per-move quantum-stone counts and the running AIS values.

    ``q_black[i]``/``q_white[i]`` count each color's quantum stones after
    move ``i`` fully resolves (index 0 is the empty starting position).
    ``q_avg[i]`` is the running average of the mover-parity color at move
    ``i``: white counts over even moves including move 0, black counts over
    odd moves.  ``s[k]`` is the information-set size faced by the player
    about to play move ``k+1``, i.e. 2 ** q_avg of the opposite parity, so
    ``s_at(1) .. s_at(M+1)`` are defined for an M-move game.
    """

    q_black: list[int]
    q_white: list[int]
    q_avg: list[float]
    s: list[float]

    def s_at(self, n: int) -> float:
        return self.s[n - 1]

    def q_avg_at(self, n: int) -> float:
        return self.q_avg[n]

    @property
    def moves(self) -> int:
        return len(self.q_black) - 1

    def mean_s(self) -> float:
        return float(np.mean(self.s))

    def to_csv(self, path) -> None:
        """Rows are decision points: move N, the mover's color, that color's
        stone count and running average after move N, and the AIS the mover
        faced.  The final row is the never-played move M+1."""
        with open(path, "w") as fh:
            fh.write("move,color,Q_i,Q_avg,S\n")
            for n in range(1, self.moves + 2):
                color = "B" if n % 2 == 1 else "W"
                if n <= self.moves:
                    q = self.q_black[n] if n % 2 == 1 else self.q_white[n]
                    fh.write(f"{n},{color},{q},{self.q_avg[n]!r},{self.s[n - 1]!r}\n")
                else:
                    fh.write(f"{n},{color},,,{self.s[n - 1]!r}\n")


def ais_from_counts(q_black, q_white) -> AISTrace:
    q_black = list(q_black)
    q_white = list(q_white)
    if len(q_black) != len(q_white) or not q_black:
        raise ValueError("count series must be nonempty and equal length")
    q_avg: list[float] = []
    sum_even = cnt_even = 0
    sum_odd = cnt_odd = 0
    for i, (qb, qw) in enumerate(zip(q_black, q_white)):
        if i % 2 == 0:
            sum_even += qw
            cnt_even += 1
            q_avg.append(sum_even / cnt_even)
        else:
            sum_odd += qb
            cnt_odd += 1
            q_avg.append(sum_odd / cnt_odd)
    s = [2.0 ** v for v in q_avg]
    return AISTrace(q_black, q_white, q_avg, s)


def ais_trace(kifu) -> AISTrace:
    """Replay a kifu and derive its AIS trace."""
    from . import kifu as kifu_io

    q_black = [0]
    q_white = [0]
    for _state, counts in kifu_io.replay_states(kifu):
        q_black.append(counts[rules.BLACK])
        q_white.append(counts[rules.WHITE])
    return ais_from_counts(q_black, q_white)


# ---------------------------------------------------------------------------
# Complexity bounds and game-tree enumeration (exact integers throughout)


def ais_bounds(board_size: int) -> tuple[int, int]:
    """(maximum AIS, information-set count) for an N x N board."""
    if board_size < 2:
        raise ValueError(f"board size must be >= 2, got {board_size}")
    cells = board_size * board_size
    return 2 ** (cells // 8), 3 ** cells


def quantum_branching(free_cells: int) -> int:
    """Number of candidate-pair placements over the free intersections."""
    if free_cells < 0:
        raise ValueError(f"free cell count must be >= 0, got {free_cells}")
    return math.comb(free_cells, 2)


def collapse_outcomes(state: rules.GameState, move: rules.Move) -> list[rules.GameState]:
    """Every resulting state of a move, branching on each consumed bit."""
    results: list[rules.GameState] = []
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        work = state.copy()
        try:
            rules.apply_move(work, move, ScriptedBitSource(prefix))
        except BitsExhausted:
            stack.append(prefix + (1,))
            stack.append(prefix + (0,))
            continue
        results.append(work)
    return results


class _ClassicalToyBoard:
    """Minimal classical-Go toy model for tree-size comparison: place one
    stone per node, resolve captures (opponent first, then own), no passes."""

    __slots__ = ("size", "grid", "to_move")

    def __init__(self, size: int, grid=None, to_move=rules.BLACK):
        self.size = size
        self.grid = grid if grid is not None else [0] * (size * size)
        self.to_move = to_move

    def children(self):
        nbs = rules.neighbors(self.size)
        me = self.to_move
        opp = rules.opponent(me)
        for pos, v in enumerate(self.grid):
            if v != 0:
                continue
            grid = list(self.grid)
            grid[pos] = me
            for color in (opp, me):
                seen = set()
                for start, w in enumerate(grid):
                    if w != color or start in seen:
                        continue
                    group = [start]
                    seen.add(start)
                    alive = False
                    i = 0
                    while i < len(group):
                        for nb in nbs[group[i]]:
                            if grid[nb] == 0:
                                alive = True
                            elif grid[nb] == color and nb not in seen:
                                seen.add(nb)
                                group.append(nb)
                        i += 1
                    if not alive:
                        for cell in group:
                            grid[cell] = 0
            yield _ClassicalToyBoard(self.size, grid, opp)


def enumerate_game_tree(config: rules.BoardConfig, depth: int,
                        variant: str = "quantum",
                        node_limit: int = 10 ** 8) -> list[int]:
    """Exhaustively count move-sequence nodes at depths 1..depth.

    Placements only (no passes); in the quantum variant every distinct
    collapse bit string of a placement contributes its own child node.
    """
    if variant not in ("classical", "quantum"):
        raise ValueError(f"unknown variant {variant!r}")
    config.validate()
    counts = [0] * depth
    visited = 0

    def guard() -> None:
        nonlocal visited
        visited += 1
        if visited > node_limit:
            raise TreeSizeGuardError(
                f"enumeration exceeded {node_limit} nodes at depth {depth}")

    if variant == "classical":
        def rec_classical(board: _ClassicalToyBoard, level: int) -> None:
            if level == depth:
                return
            for child in board.children():
                guard()
                counts[level] += 1
                rec_classical(child, level + 1)

        rec_classical(_ClassicalToyBoard(config.size), 0)
        return counts

    def rec_quantum(state: rules.GameState, level: int) -> None:
        if level == depth:
            return
        empties = state.empty_cells()
        for i, a in enumerate(empties):
            for b in empties[i + 1:]:
                move = rules.Place(a, b)
                if not rules.is_legal(state, move):
                    continue
                for child in collapse_outcomes(state, move):
                    guard()
                    counts[level] += 1
                    rec_quantum(child, level + 1)

    rec_quantum(rules.new_game(config), 0)
    return counts
