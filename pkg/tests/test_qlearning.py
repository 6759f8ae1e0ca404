import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from connect4lab.agents import AgentFactory
from connect4lab.arena import run_series
from connect4lab.engine import Board, NoLegalMoves, PlayerId, encode_state
from connect4lab.qlearning import (HEADER, FormatError, QAgent, QTable, TrainingSchedule,
                                   epsilon_greedy_action, greedy_action, load_qtable, save_qtable,
                                   td_update, train)
from connect4lab.rng import derive
from test_engine import DRAW_ROWS

S = "0" * 42
T = "1" + "0" * 41

# chi-square critical value, 6 degrees of freedom, p = 0.001
CHI2_6_P001 = 22.458


def chi_square(counts):
    expected = sum(counts) / len(counts)
    return sum((c - expected) ** 2 / expected for c in counts)


class TestTdUpdate:
    def test_full_overwrite(self):
        q = td_update(QTable(), S, 3, 5.0, None, [], alpha=1.0, gamma=0.0)
        assert q.get(S, 3) == 5.0

    def test_bootstrap(self):
        q = QTable()
        q.set(S, 3, 2.0)
        q.set(T, 1, 6.0)
        q.set(T, 2, -1.0)
        td_update(q, S, 3, 4.0, T, [1, 2, 4], alpha=0.5, gamma=0.5)
        assert abs(q.get(S, 3) - 4.5) < 1e-12

    def test_terminal(self):
        q = QTable()
        q.set(S, 0, 1.0)
        td_update(q, S, 0, 40.0, None, [], alpha=0.5, gamma=0.5)
        assert abs(q.get(S, 0) - 20.5) < 1e-12

    def test_missing_next_entries_read_zero(self):
        q = td_update(QTable(), S, 0, 1.0, T, [0, 1], alpha=0.5, gamma=0.9)
        assert q.get(S, 0) == 0.5

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0, 1))
    def test_alpha_zero_is_identity(self, old, reward, gamma):
        q = QTable()
        q.set(S, 2, old)
        q.set(T, 0, 7.0)
        snapshot = list(q.items())
        td_update(q, S, 2, reward, T, [0], alpha=0.0, gamma=gamma)
        assert list(q.items()) == snapshot

    def test_converges_to_terminal_reward(self):
        q = QTable()
        q.set(S, 4, -3.0)
        for _ in range(1000):
            td_update(q, S, 4, 40.0, None, [], alpha=0.5, gamma=0.5)
        assert abs(q.get(S, 4) - 40.0) < 1e-9


class TestActionSelection:
    def test_uniform_exploration(self):
        rng = np.random.default_rng(0)
        counts = [0] * 7
        for _ in range(10_000):
            counts[epsilon_greedy_action(QTable(), Board(), 1.0, rng)] += 1
        assert chi_square(counts) < CHI2_6_P001

    def test_exploitation(self):
        q = QTable()
        q.set(S, 2, 5.0)
        assert epsilon_greedy_action(q, Board(), 0.0, np.random.default_rng(0)) == 2
        assert greedy_action(q, Board()) == 2

    def test_all_absent_lowest_column(self):
        assert epsilon_greedy_action(QTable(), Board(), 0.0, np.random.default_rng(0)) == 0
        assert greedy_action(QTable(), Board()) == 0

    def test_negative_values_lose_to_unseen(self):
        q = QTable()
        q.set(S, 0, -1.0)
        assert greedy_action(q, Board()) == 1

    def test_full_board(self):
        with pytest.raises(NoLegalMoves):
            greedy_action(QTable(), Board.from_cells(DRAW_ROWS))
        with pytest.raises(NoLegalMoves):
            epsilon_greedy_action(QTable(), Board.from_cells(DRAW_ROWS), 0.5, np.random.default_rng(0))

    def test_greedy_repeatable(self):
        q = QTable()
        for c, v in enumerate([0.1, 0.4, 0.4, -2, 0, 0.3, 0.4]):
            q.set(S, c, v)
        assert greedy_action(q, Board()) == greedy_action(q, Board()) == 1

    @given(st.lists(st.floats(-50, 50), min_size=7, max_size=7), st.floats(0.01, 100))
    def test_argmax_scale_invariant(self, values, scale):
        q, scaled = QTable(), QTable()
        for c, v in enumerate(values):
            q.set(S, c, v)
            scaled.set(S, c, v * scale)
        assert greedy_action(q, Board()) == greedy_action(scaled, Board())


class TestSchedule:
    def test_defaults(self):
        s = TrainingSchedule(total_games=1000)
        assert s.epsilon(0) == 1.0 and s.alpha(0) == 0.5
        assert s.epsilon(200) == pytest.approx(0.5)
        assert s.alpha(200) == pytest.approx(0.25)
        assert s.epsilon(10**6) == 0.05 and s.alpha(10**6) == 0.05
        assert s.gamma == 0.5

    @given(st.integers(1, 10**6), st.integers(0, 10**6))
    def test_bounded_and_monotone(self, total, t):
        s = TrainingSchedule(total_games=total)
        for f, lo, hi in ((s.epsilon, 0.05, 1.0), (s.alpha, 0.05, 0.5)):
            assert lo <= f(t) <= hi
            assert f(t + 1) <= f(t)

    @pytest.mark.parametrize("kw", [{"total_games": -1}, {"total_games": 5, "expert_games": 6},
                                    {"total_games": 5, "gamma": 1.5},
                                    {"total_games": 5, "epsilon_min": 0.5, "epsilon0": 0.1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            TrainingSchedule(**kw)


class TestTraining:
    def test_zero_games(self):
        trained = train(TrainingSchedule(total_games=0), rng=np.random.default_rng(0))
        assert len(trained.qtable) == 0 and trained.games_trained == 0
        agent = trained.agent(unseen="lowest")
        assert agent.choose_move(Board.from_moves([0] * 6), np.random.default_rng(0)) == 1

    def test_parity_separation(self):
        writes = []
        train(TrainingSchedule(total_games=200, expert_games=20, expert_depth=2),
              rng=np.random.default_rng(1), on_update=lambda p, s: writes.append((p, s)))
        assert writes
        for player, state in writes:
            pieces = sum(ch != "0" for ch in state)
            assert (pieces % 2 == 0) == (player is PlayerId.I)

    def test_expert_games_record_both_seats(self):
        writes = []
        train(TrainingSchedule(total_games=5, expert_games=5, expert_depth=2),
              rng=np.random.default_rng(2), on_update=lambda p, s: writes.append(p))
        assert {PlayerId.I, PlayerId.II} <= set(writes)

    def test_deterministic(self):
        sched = TrainingSchedule(total_games=300, expert_games=30, expert_depth=2)
        a = train(sched, rng=derive(5, "q"))
        b = train(sched, rng=derive(5, "q"))
        assert a.qtable == b.qtable and len(a.qtable) > 0

    def test_values_bounded(self):
        trained = train(TrainingSchedule(total_games=300), rng=np.random.default_rng(3))
        # rewards lie within [-30, 40 + feature delta]; gamma 0.5 keeps the geometric sum finite
        assert all(-100 < v < 200 for _, _, v in trained.qtable.items())
        assert trained.unique_states == len({s for s, _, _ in trained.qtable.items()})

    def test_desk_agent_beats_random(self, desk_qtable):
        trained, path = desk_qtable
        assert trained.unique_states > 0
        factory = AgentFactory({"QLearning-10k": path})
        report = run_series("QLearning-10k", "Random", 100, seed=11, factory=factory, timing=False).report
        assert report.win_rate_a > 50.0


class TestAgent:
    def test_unseen_random(self):
        agent = QAgent(QTable(), unseen="random")
        rng = np.random.default_rng(4)
        picks = {agent.choose_move(Board(), rng) for _ in range(200)}
        assert picks == set(range(7))

    def test_seen_greedy(self):
        q = QTable()
        q.set(S, 5, 1.0)
        agent = QAgent(q)
        assert all(agent.choose_move(Board(), np.random.default_rng(s)) == 5 for s in range(20))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            QAgent(QTable(), unseen="sometimes")


class TestPersistence:
    def test_empty_roundtrip(self, tmp_path):
        save_qtable(QTable(), tmp_path / "q.txt")
        assert (tmp_path / "q.txt").read_text() == HEADER + "\n"
        assert load_qtable(tmp_path / "q.txt") == QTable()

    def test_bit_exact(self, tmp_path):
        q = QTable()
        q.set(S, 0, 0.1)
        q.set(S, 6, -1 / 3)
        q.set(T, 3, math.pi * 1e-9)
        save_qtable(q, tmp_path / "q.txt")
        back = load_qtable(tmp_path / "q.txt")
        assert back == q and len(back) == 3
        assert back.get(S, 6) == -1 / 3

    def test_line_format(self, tmp_path):
        q = QTable()
        q.set(T, 3, 0.5)
        save_qtable(q, tmp_path / "q.txt")
        assert (tmp_path / "q.txt").read_text().splitlines()[1] == f"{T} 3 0.5"

    @pytest.mark.parametrize("text", ["QTABLE v2\n", "", f"{HEADER}\n{S} 9 1.0\n",
                                      f"{HEADER}\n{S[:-1]} 0 1.0\n", f"{HEADER}\n{S} 0\n",
                                      f"{HEADER}\n{S} 0 abc\n"])
    def test_corrupt(self, tmp_path, text):
        (tmp_path / "q.txt").write_text(text)
        with pytest.raises(FormatError):
            load_qtable(tmp_path / "q.txt")

    def test_trained_roundtrip(self, tmp_path):
        trained = train(TrainingSchedule(total_games=100), rng=np.random.default_rng(6))
        save_qtable(trained.qtable, tmp_path / "q.txt")
        assert load_qtable(tmp_path / "q.txt") == trained.qtable
        key = encode_state(Board())
        assert trained.qtable.row(key) is not None
