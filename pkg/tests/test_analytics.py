import json
import math

import numpy as np
import pytest

from qgo import kifu, rules
from qgo.analytics import (TreeSizeGuardError, ais_bounds, ais_from_counts,
                           ais_trace, autocorrelation, confidence_bound,
                           collapse_outcomes, enumerate_game_tree,
                           quantum_branching)
from qgo.rules import BLACK, WHITE, BoardConfig, Place
from qgo.source import ScriptedBitSource, SimulatedBitSource, StateParams

from oracle_helpers import classical_tree_count_oracle

DATA = __import__("pathlib").Path(__file__).resolve().parent.parent / "src/qgo/data"


class TestConfidenceBound:
    def test_paper_value(self):
        assert f"{confidence_bound(200000):.4f}" == "0.0045"

    def test_small(self):
        assert confidence_bound(4) == 1.0

    def test_direct(self):
        assert confidence_bound(10000) == 0.02

    def test_invalid(self):
        with pytest.raises(ValueError):
            confidence_bound(0)


class TestAutocorrelation:
    def test_constant_series_rejected(self):
        with pytest.raises(ValueError):
            autocorrelation([1.0] * 100, 10)

    def test_max_lag_bounds(self):
        with pytest.raises(ValueError):
            autocorrelation([0, 1] * 50, 100)
        with pytest.raises(ValueError):
            autocorrelation([0, 1] * 50, 0)

    def test_alternating_lag_one(self):
        # closed form: r_1 = -(N-1)/N for a strict 0/1 alternation
        series = [t % 2 for t in range(1000)]
        corr = autocorrelation(series, 1)
        assert abs(corr.r[0] - (-1.0)) < 1e-2
        assert abs(corr.r[0] - (-999 / 1000)) < 1e-12

    def test_exact_and_approximate_agree_for_large_n(self):
        # The two forms differ by ~|r_k| * k / N, so the 10/N agreement holds
        # exactly for lags inside the 95% band (|r_k| <= 2/sqrt(N) = 10/k at
        # k = N/20); the few out-of-band lags get a proportionate allowance.
        rng = np.random.default_rng(8)
        bits = rng.integers(0, 2, 10 ** 4).astype(float)
        n = len(bits)
        approx = autocorrelation(bits, n // 20)
        exact = autocorrelation(bits, n // 20, exact=True)
        diff = np.abs(approx.r - exact.r)
        in_band = np.abs(exact.r) <= 2 / math.sqrt(n)
        assert in_band.mean() > 0.9
        assert np.max(diff[in_band]) < 10 / n
        assert np.max(diff) < 50 / n

    def test_fair_coin_outlier_fraction(self):
        src = SimulatedBitSource(StateParams(theta=math.pi / 4), seed=99)
        bits = src.take(200000)
        corr = autocorrelation(bits, 10 ** 4)
        outside = float(np.mean(np.abs(corr.r) > corr.confidence_bound))
        assert 0.03 <= outside <= 0.07
        assert abs(outside + corr.proportion_within - 1.0) < 1e-12

    def test_csv_export_with_sidecar(self, tmp_path):
        corr = autocorrelation([0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 0], 3)
        path = tmp_path / "corr.csv"
        corr.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "lag,r"
        assert len(lines) == 4
        summary = json.loads((tmp_path / "corr.csv.summary.json").read_text())
        assert summary["n"] == 12
        assert summary["max_lag"] == 3


class TestAISTrace:
    def test_fig_s1_walkthrough(self):
        trace = ais_trace(kifu.load(DATA / "figs1.kifu"))
        expected = [1.0, 2.0, 1.4, 2.8, 2.0]
        for n, value in enumerate(expected, start=1):
            assert abs(trace.s_at(n) - value) <= 0.05

    def test_fig_s2_walkthrough(self):
        trace = ais_trace(kifu.load(DATA / "figs2.kifu"))
        assert abs(trace.q_avg_at(10) - 7 / 3) < 1e-12
        assert abs(trace.s_at(11) - 5.04) <= 0.01

    def test_all_pass_game(self):
        k = kifu.parse("qgo-kifu v1\nsize 5\n1 B pass\n2 W pass\n")
        trace = ais_trace(k)
        assert trace.s == [1.0, 1.0, 1.0]

    def test_naive_recount_matches(self):
        k = kifu.load(DATA / "fig4.kifu")
        trace = ais_trace(k)
        q_black, q_white = [0], [0]
        for state, _counts in kifu.replay_states(k):
            q_black.append(sum(1 for s in state.stones.values()
                               if s.is_quantum and s.color == BLACK))
            q_white.append(sum(1 for s in state.stones.values()
                               if s.is_quantum and s.color == WHITE))
        rebuilt = ais_from_counts(q_black, q_white)
        assert rebuilt.s == trace.s
        assert rebuilt.q_avg == trace.q_avg

    def test_csv_rows(self, tmp_path):
        trace = ais_trace(kifu.load(DATA / "figs1.kifu"))
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "move,color,Q_i,Q_avg,S"
        assert len(lines) == 1 + trace.moves + 1
        assert lines[1].startswith("1,B,1,")


class TestBounds:
    def test_19(self):
        max_ais, info_sets = ais_bounds(19)
        assert max_ais == 2 ** 45
        assert info_sets == 3 ** 361

    def test_minimum(self):
        assert ais_bounds(2) == (1, 3 ** 4)

    def test_36(self):
        assert ais_bounds(36)[0] == 2 ** 162

    def test_pure_integers(self):
        max_ais, info_sets = ais_bounds(36)
        assert isinstance(max_ais, int) and isinstance(info_sets, int)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ais_bounds(1)


class TestBranching:
    def test_values(self):
        assert quantum_branching(9) == 36
        assert quantum_branching(2) == 1
        assert quantum_branching(361) == 64980
        assert quantum_branching(0) == 0

    def test_negative(self):
        with pytest.raises(ValueError):
            quantum_branching(-1)


class TestGameTree:
    def test_classical_depth1(self):
        assert enumerate_game_tree(BoardConfig(size=3), 1, "classical") == [9]

    def test_quantum_depth1(self):
        assert enumerate_game_tree(BoardConfig(size=3), 1, "quantum") == [36]

    def test_quantum_exceeds_classical(self):
        classical = enumerate_game_tree(BoardConfig(size=3), 3, "classical")
        quantum = enumerate_game_tree(BoardConfig(size=3), 2, "quantum")
        assert quantum[0] == 36
        assert quantum[1] > classical[1]
        assert classical == [9, 72, 504]

    def test_classical_against_independent_recursion(self):
        got = enumerate_game_tree(BoardConfig(size=3), 3, "classical")
        assert got == classical_tree_count_oracle(3, 3)

    def test_quantum_against_independent_recursion(self):
        # Independent DFS: per placement, enumerate collapse bit strings by
        # breadth-first prefix extension instead of the library's stack DFS.
        def outcomes(state, move):
            found = []
            prefixes = [()]
            while prefixes:
                nxt = []
                for prefix in prefixes:
                    work = state.copy()
                    try:
                        rules.apply_move(work, move, ScriptedBitSource(list(prefix)))
                    except Exception:
                        nxt.append(prefix + (0,))
                        nxt.append(prefix + (1,))
                        continue
                    found.append(work)
                prefixes = nxt
            return found

        def count(state, depth, counts, level=0):
            if level == depth:
                return
            empties = state.empty_cells()
            for i, a in enumerate(empties):
                for b in empties[i + 1:]:
                    if not rules.is_legal(state, Place(a, b)):
                        continue
                    for child in outcomes(state, Place(a, b)):
                        counts[level] += 1
                        count(child, depth, counts, level + 1)

        counts = [0, 0]
        count(rules.new_game(BoardConfig(size=3)), 2, counts)
        assert enumerate_game_tree(BoardConfig(size=3), 2, "quantum") == counts

    def test_collapse_outcome_branching(self):
        state = rules.new_game(BoardConfig(size=3))
        rules.apply_move(state, Place(0, 8))
        # adjacent placement triggers: the two involved stones give 4 outcomes
        children = collapse_outcomes(state, Place(1, 7))
        assert len(children) == 4

    def test_guard(self):
        with pytest.raises(TreeSizeGuardError):
            enumerate_game_tree(BoardConfig(size=3), 3, "quantum", node_limit=100)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            enumerate_game_tree(BoardConfig(size=3), 1, "semiclassical")
