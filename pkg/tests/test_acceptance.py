"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with ``pytest tests/test_acceptance.py -v -s``)."""

import math
import pathlib
import time
from contextlib import contextmanager

import numpy as np

from qgo import analytics, kifu, rules
from qgo.analytics import ais_bounds, ais_trace, autocorrelation, quantum_branching
from qgo.rules import BoardConfig
from qgo.selfplay import random_bot_move, run_selfplay
from qgo.source import (CoincidenceConfig, ScriptedBitSource, SimulatedBitSource,
                        StateParams, extract_bits, generate_timetags, visibility)

from oracle_helpers import (area_score_oracle, classical_tree_count_oracle,
                            collapse_fixpoint_oracle, match_oracle)

DATA = pathlib.Path(__file__).resolve().parent.parent / "src/qgo/data"

MASTER_SEED = 20260810  # pinned: all statistical bands verified on this seed


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def test_fig4_kifu_replay():
    with criterion("fig4-kifu-replay"):
        k = kifu.load(DATA / "fig4.kifu")
        start = time.perf_counter()
        state = kifu.replay(k)
        elapsed = time.perf_counter() - start
        pos = {sid: rules.format_coord(s.pos, 7)
               for sid, s in state.stones.items() if s.pos is not None}
        assert pos[2] == "B6"
        assert pos[5] == "D2"
        assert pos[17] == "B4"
        assert pos[19] == "B2"
        assert state.stones[16].captured
        assert elapsed < 1.0


def test_ais_walkthrough():
    with criterion("ais-walkthrough"):
        trace1 = ais_trace(kifu.load(DATA / "figs1.kifu"))
        for n, expected in ((1, 1.0), (2, 2.0), (3, 1.4), (4, 2.8), (5, 2.0)):
            assert abs(trace1.s_at(n) - expected) <= 0.05, f"S^{n}"
        trace2 = ais_trace(kifu.load(DATA / "figs2.kifu"))
        assert abs(trace2.s_at(11) - 5.04) <= 0.01


def test_bounds():
    with criterion("bounds"):
        assert ais_bounds(19) == (2 ** 45, 3 ** 361)
        assert ais_bounds(36)[0] == 2 ** 162
        assert quantum_branching(9) == 36


def test_autocorrelation():
    with criterion("autocorrelation"):
        start = time.perf_counter()
        for p_zero, seed in ((0.5, 7), (0.4, 8)):
            theta = math.acos(math.sqrt(p_zero))
            src = SimulatedBitSource(StateParams(theta=theta), seed)
            bits = src.take(200000)
            corr = autocorrelation(bits, 10 ** 4)
            assert f"{corr.confidence_bound:.4f}" == "0.0045"
            assert 0.94 <= corr.proportion_within <= 0.97, \
                f"p0={p_zero}: {corr.proportion_within}"
        assert time.perf_counter() - start < 30.0


def test_bias_law():
    with criterion("bias-law"):
        theta = math.acos(0.5)  # cos^2(theta) = 1/4
        src = SimulatedBitSource(StateParams(theta=theta), seed=4242)
        bits = src.take(10 ** 6)
        ones = int(bits.sum())
        zeros = len(bits) - ones
        ratio = ones / zeros
        assert 2.9 <= ratio <= 3.1, ratio


def test_visibility_pipeline_and_matcher_oracle():
    with criterion("visibility"):
        params = StateParams(theta=math.pi / 4, noise_hh=0.004, noise_vv=0.004,
                             pair_rate=1.5e6)
        tags = generate_timetags(params, 0.1, seed=99)
        bits, counts = extract_bits(tags, CoincidenceConfig(window=2))
        assert counts.total >= 10 ** 5
        v = visibility(counts)
        assert abs(v - 0.992) <= 0.003, v

        rng_master = np.random.default_rng(31415)
        for _ in range(100):
            seed = int(rng_master.integers(2 ** 32))
            rng = np.random.default_rng(seed)
            n = 1000
            channels = rng.integers(1, 5, size=n).astype(np.uint8)
            times = np.sort(rng.integers(0, 4 * n, size=n)).astype(np.int64)
            order = np.lexsort((channels, times))
            channels, times = channels[order], times[order]
            window = int(rng.integers(1, 8))
            tags = np.empty(n, dtype=[("channel", "u1"), ("timestamp", "i8")])
            tags["channel"], tags["timestamp"] = channels, times
            got_bits, got_counts = extract_bits(tags, CoincidenceConfig(window=window))
            sides = (channels >= 3).astype(np.uint8)
            pairs = match_oracle(times, sides, window)
            expect_bits = []
            tallies = {"n_hv": 0, "n_vh": 0, "n_hh": 0, "n_vv": 0}
            for ia, ib in pairs:
                key = (channels[ia], channels[ib])
                if key == (2, 4):
                    tallies["n_hv"] += 1
                    expect_bits.append(0)
                elif key == (1, 3):
                    tallies["n_vh"] += 1
                    expect_bits.append(1)
                elif key == (1, 4):
                    tallies["n_hh"] += 1
                else:
                    tallies["n_vv"] += 1
            assert list(got_bits) == expect_bits
            assert (got_counts.n_hv, got_counts.n_vh,
                    got_counts.n_hh, got_counts.n_vv) == \
                (tallies["n_hv"], tallies["n_vh"], tallies["n_hh"], tallies["n_vv"])


def test_selfplay_statistics():
    with criterion("selfplay-statistics"):
        config = BoardConfig(size=19, komi=0.0)
        start = time.perf_counter()
        report, kifus = run_selfplay(config, 150, MASTER_SEED)
        elapsed = time.perf_counter() - start
        assert elapsed < 600.0, f"{elapsed:.0f}s"
        assert 60 <= report.black_wins <= 90, report.black_wins
        lengths = sorted(report.move_counts)
        median_length = lengths[len(lengths) // 2]
        assert 350 <= median_length <= 650, median_length
        assert report.mean_q_tail(181) < 0.5
        median_ais = float(np.median([s.mean_ais for s in report.summaries]))
        assert 2.0 <= median_ais <= 100.0, median_ais
        # module invariants: every kifu replays; white's AIS at least black's
        for k in kifus:
            kifu.replay(k)
        assert report.black_ais_mean() <= report.white_ais_mean()


def test_rules_property_suite():
    with criterion("rules-property-suite"):
        plan = [(3, 4000), (5, 3000), (9, 3000)]
        assert sum(n for _, n in plan) == 10 ** 4
        for size, games in plan:
            config = BoardConfig(size=size, komi=0.0)
            for index in range(games):
                rng = np.random.default_rng(
                    np.random.SeedSequence([MASTER_SEED, size, index, 0]))
                bits = SimulatedBitSource(
                    StateParams(theta=math.pi / 4),
                    np.random.SeedSequence([MASTER_SEED, size, index, 1]))
                state = rules.new_game(config)
                moves, used = [], []
                phases = {}
                while not state.is_terminal:
                    move = random_bot_move(state, rng)
                    before = bits.consumed
                    outcome = rules.apply_move(state, move, bits)
                    # bit accounting: one consumed bit per collapse record
                    assert len(outcome.collapses) == bits.consumed - before
                    moves.append(move)
                    used.extend(r.bit for r in outcome.collapses)
                    # occupancy, fixpoint, capture soundness, amplitudes
                    rules.check_invariants(state)
                    for sid, stone in state.stones.items():
                        now = ("captured" if stone.captured else
                               "classical" if stone.is_classical else "quantum")
                        prev = phases.get(sid)
                        assert not (prev in ("classical", "captured")
                                    and now == "quantum"), "phase reverted"
                        phases[sid] = now
                assert collapse_fixpoint_oracle(state) == []
                # deterministic replay: same moves + bits => identical state
                replayed = rules.new_game(config)
                script = ScriptedBitSource(used)
                for move in moves:
                    rules.apply_move(replayed, move, script)
                assert replayed.fingerprint() == state.fingerprint()
                # area-scoring conservation
                end_bits = SimulatedBitSource(
                    StateParams(theta=math.pi / 4),
                    np.random.SeedSequence([MASTER_SEED, size, index, 2]))
                work = state.copy()
                rules.end_measure(work, end_bits)
                result = rules.score(work)
                black, white, neutral = area_score_oracle(work)
                assert (result.black, result.white) == (black, white)
                assert black + white + neutral == size * size


def test_game_tree():
    with criterion("game-tree"):
        config = BoardConfig(size=3)
        classical = analytics.enumerate_game_tree(config, 3, "classical")
        quantum = analytics.enumerate_game_tree(config, 3, "quantum")
        assert classical[0] == 9
        assert quantum[0] == 36
        assert quantum[1] > classical[1]
        assert quantum[2] > classical[2]
        # independent recursive counters
        assert classical == classical_tree_count_oracle(3, 3)

        def outcomes(state, move):
            found = []
            prefixes = [()]
            while prefixes:
                longer = []
                for prefix in prefixes:
                    work = state.copy()
                    try:
                        rules.apply_move(work, move, ScriptedBitSource(list(prefix)))
                    except Exception:
                        longer.append(prefix + (0,))
                        longer.append(prefix + (1,))
                        continue
                    found.append(work)
                prefixes = longer
            return found

        def count(state, depth, counts, level=0):
            if level == depth:
                return
            empties = state.empty_cells()
            for i, a in enumerate(empties):
                for b in empties[i + 1:]:
                    move = rules.Place(a, b)
                    if not rules.is_legal(state, move):
                        continue
                    for child in outcomes(state, move):
                        counts[level] += 1
                        count(child, depth, counts, level + 1)

        independent = [0, 0]
        count(rules.new_game(config), 2, independent)
        assert quantum[:2] == independent
