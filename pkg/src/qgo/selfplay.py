"""Stochastic self-play: naive uniform bots and the batch statistics harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytics, rules
from .kifu import Kifu, KifuRecorder
from .rules import BLACK, WHITE, PASS, BoardConfig, GameState, Move, Place
from .source import SimulatedBitSource, StateParams


def playable_cells(state: GameState) -> list[int]:
    """Empty cells a naive bot considers placeable: everything except its
    own single-point eyes and cells where a settled stone is dead on arrival
    (fully surrounded by opponent stones it cannot capture).  Without this
    filter random games degenerate into endless suicide churn instead of the
    natural both-players-pass ending."""
    nbs = rules.neighbors(state.size)
    mover = state.to_move
    out = []
    for pos, v in enumerate(state.grid):
        if v != 0:
            continue
        colors = 0
        open_neighbor = False
        for nb in nbs[pos]:
            w = state.grid[nb]
            if w <= 0:
                open_neighbor = True
                break
            colors |= 1 << state.stones[w].color
        if open_neighbor or colors == (1 << BLACK | 1 << WHITE):
            out.append(pos)
            continue
        if colors == 1 << mover:
            continue  # own true eye: filling it can only hurt
        # Surrounded by the opponent: playable only if settling here captures.
        for nb in nbs[pos]:
            _group, libs = rules.group_liberties(state, nb)
            if libs == 1:
                out.append(pos)
                break
    return out


def random_bot_move(state: GameState, rng: np.random.Generator) -> Move:
    """Uniform over legal ordered candidate pairs of playable cells; passes
    only when no such placement is legal."""
    cells = playable_cells(state)
    n = len(cells)
    if n >= 2:
        for _ in range(64):
            i = int(rng.integers(n))
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            move = Place(cells[i], cells[j])
            if rules.is_legal(state, move):
                return move
        # Rejection kept failing: fall back to exhaustive enumeration so a
        # pass happens only when truly forced.
        pairs = [(a, b)
                 for k, a in enumerate(cells)
                 for b in cells[k + 1:]
                 if rules.is_legal(state, Place(a, b))]
        if pairs:
            a, b = pairs[int(rng.integers(len(pairs)))]
            if int(rng.integers(2)):
                a, b = b, a
            return Place(a, b)
    return PASS


@dataclass
class GameSummary:
    index: int
    moves: int
    black: int
    white: int
    margin: float
    winner: str | None
    mean_q: float
    mean_ais: float
    black_ais: float
    white_ais: float


@dataclass
class SelfPlayReport:
    games: int
    size: int
    komi: float
    theta: float
    master_seed: int
    summaries: list[GameSummary] = field(default_factory=list)
    q_mean_by_move: np.ndarray = field(default_factory=lambda: np.empty(0))
    q_std_by_move: np.ndarray = field(default_factory=lambda: np.empty(0))
    games_by_move: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def black_wins(self) -> int:
        return sum(1 for s in self.summaries if s.winner == "B")

    @property
    def white_wins(self) -> int:
        return sum(1 for s in self.summaries if s.winner == "W")

    @property
    def draws(self) -> int:
        return sum(1 for s in self.summaries if s.winner is None)

    @property
    def move_counts(self) -> list[int]:
        return [s.moves for s in self.summaries]

    def black_ais_mean(self) -> float:
        return float(np.mean([s.black_ais for s in self.summaries]))

    def white_ais_mean(self) -> float:
        return float(np.mean([s.white_ais for s in self.summaries]))

    def mean_q_tail(self, first_move: int) -> float:
        """Mean quantum-stone count over moves >= first_move across games."""
        weights = self.games_by_move[first_move:]
        if weights.sum() == 0:
            return 0.0
        return float(np.average(self.q_mean_by_move[first_move:], weights=weights))

    def summary_text(self) -> str:
        lengths = sorted(self.move_counts)
        median_len = lengths[len(lengths) // 2] if lengths else 0
        median_ais = float(np.median([s.mean_ais for s in self.summaries]))
        lines = [
            f"self-play: {self.games} games on {self.size}x{self.size}, "
            f"komi {self.komi}, theta {self.theta:.4f}, seed {self.master_seed}",
            f"wins: black {self.black_wins}, white {self.white_wins}, draws {self.draws}",
            f"game length: median {median_len}, "
            f"range {lengths[0] if lengths else 0}-{lengths[-1] if lengths else 0}",
            f"AIS: per-game mean median {median_ais:.2f}; "
            f"player averages black {self.black_ais_mean():.2f} / "
            f"white {self.white_ais_mean():.2f}",
            f"quantum stones after move 180: mean {self.mean_q_tail(181):.3f}",
        ]
        return "\n".join(lines)

    def write_csv(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "per_game.csv", "w") as fh:
            fh.write("game,moves,black,white,margin,winner,mean_q,mean_ais,"
                     "black_ais,white_ais\n")
            for s in self.summaries:
                fh.write(f"{s.index},{s.moves},{s.black},{s.white},{s.margin!r},"
                         f"{s.winner or 'draw'},{s.mean_q!r},{s.mean_ais!r},"
                         f"{s.black_ais!r},{s.white_ais!r}\n")
        with open(directory / "q_by_move.csv", "w") as fh:
            fh.write("move,mean_q,std_q,games\n")
            for i in range(len(self.q_mean_by_move)):
                fh.write(f"{i},{self.q_mean_by_move[i]!r},{self.q_std_by_move[i]!r},"
                         f"{self.games_by_move[i]}\n")
        with open(directory / "summary.txt", "w") as fh:
            fh.write(self.summary_text() + "\n")


def game_seeds(master_seed: int, index: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Derived seeds for one game: bot rng and bit source, re-runnable in
    isolation as SeedSequence([master, index, 0|1])."""
    return (np.random.SeedSequence([master_seed, index, 0]),
            np.random.SeedSequence([master_seed, index, 1]))


def play_game(config: BoardConfig, master_seed: int, index: int,
              max_moves: int | None = None,
              source_params: StateParams | None = None,
              ) -> tuple[Kifu, GameState, rules.ScoreResult, analytics.AISTrace, list[int]]:
    """One seeded bot-vs-bot game to termination."""
    config.validate()
    bot_seq, bits_seq = game_seeds(master_seed, index)
    bot_rng = np.random.default_rng(bot_seq)
    params = source_params or StateParams(theta=config.theta, phi=config.phi)
    bits = SimulatedBitSource(params, bits_seq)
    if max_moves is None:
        max_moves = 4 * config.size * config.size

    state = rules.new_game(config)
    recorder = KifuRecorder(config, "simulated", f"seed={master_seed}/{index}")
    q_black = [0]
    q_white = [0]
    q_total: list[int] = []
    while not state.is_terminal:
        if state.move_count < max_moves:
            move = random_bot_move(state, bot_rng)
        else:  # safety cap; forced passes end the game legally
            move = PASS
        outcome = rules.apply_move(state, move, bits)
        recorder.record(outcome)
        qb = qw = 0
        for stone in state.stones.values():
            if stone.is_quantum:
                if stone.color == BLACK:
                    qb += 1
                else:
                    qw += 1
        q_black.append(qb)
        q_white.append(qw)
        q_total.append(qb + qw)

    if config.measure_at_end:
        records, captures = rules.end_measure(state, bits)
        if records:
            recorder.record_end(records, captures)
    result = rules.score(state, bits)
    recorder.record_result(result)
    trace = analytics.ais_from_counts(q_black, q_white)
    return recorder.kifu, state, result, trace, q_total


def run_selfplay(config: BoardConfig, games: int, seed: int,
                 max_moves: int | None = None,
                 source_params: StateParams | None = None,
                 progress=None) -> tuple[SelfPlayReport, list[Kifu]]:
    """Play ``games`` independent seeded games and aggregate the statistics.

    Aggregation is by game index, so the report does not depend on any
    execution schedule."""
    if games < 1:
        raise ValueError(f"need at least one game, got {games}")
    report = SelfPlayReport(games=games, size=config.size, komi=config.komi,
                            theta=config.theta, master_seed=seed)
    kifus: list[Kifu] = []
    q_rows: list[list[int]] = []
    for index in range(games):
        kifu, _state, result, trace, q_total = play_game(
            config, seed, index, max_moves=max_moves, source_params=source_params)
        kifus.append(kifu)
        q_rows.append(q_total)
        s_vals = np.asarray(trace.s)
        black_ais = float(np.mean(s_vals[0::2]))  # S^N at odd N (index N-1 even)
        white_ais = float(np.mean(s_vals[1::2]))
        report.summaries.append(GameSummary(
            index=index,
            moves=len(q_total),
            black=result.black,
            white=result.white,
            margin=result.margin,
            winner=result.winner,
            mean_q=float(np.mean(q_total)) if q_total else 0.0,
            mean_ais=trace.mean_s(),
            black_ais=black_ais,
            white_ais=white_ais,
        ))
        if progress is not None:
            progress(index + 1, games)

    longest = max((len(row) for row in q_rows), default=0)
    mean = np.zeros(longest + 1)
    std = np.zeros(longest + 1)
    count = np.zeros(longest + 1, dtype=int)
    for move in range(1, longest + 1):
        values = [row[move - 1] for row in q_rows if len(row) >= move]
        count[move] = len(values)
        mean[move] = float(np.mean(values))
        std[move] = float(np.std(values))
    report.q_mean_by_move = mean
    report.q_std_by_move = std
    report.games_by_move = count
    return report, kifus
