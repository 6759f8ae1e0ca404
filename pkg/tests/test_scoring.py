import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from connect4lab.engine import Board, Outcome, PlayerId, reflect, swap_players, terminal_status
from connect4lab.scoring import (WIN_SENTINEL, breakdown, column_bonus, count_windows, feature_score,
                                 minimax_payoff, q_reward)
from test_engine import DRAW_ROWS, play_legal

move_lists = st.lists(st.integers(0, 6), max_size=45)


def grid(board):
    return [list(r) for r in board.cells()]


class TestWindows:
    def test_empty(self):
        for p in PlayerId:
            for n in (1, 2, 3):
                assert count_windows(Board(), p, n) == 0

    def test_corner_piece(self):
        assert count_windows(Board.from_moves([0]), PlayerId.I, 1) == 3

    def test_centre_bottom_piece(self):
        assert count_windows(Board.from_moves([3]), PlayerId.I, 1) == 7

    def test_opponent_blocks(self):
        board = Board.from_moves([3, 4])
        assert count_windows(board, PlayerId.I, 1) == O.count(grid(board), 1, 1)

    @pytest.mark.parametrize("n", [0, 4, -1])
    def test_bad_n(self, n):
        with pytest.raises(ValueError):
            count_windows(Board(), PlayerId.I, n)

    def test_matches_oracle_on_random_boards(self):
        for seed in range(10_000):
            g, moves = O.random_game(seed, max_plies=seed % 40)
            board = Board.from_moves(moves)
            for p in (1, 2):
                for n in (1, 2, 3):
                    assert count_windows(board, PlayerId(p), n) == O.count(g, p, n)


class TestColumnBonus:
    def test_empty(self):
        assert column_bonus(Board(), PlayerId.I) == 0

    def test_centre_column(self):
        assert column_bonus(Board.from_moves([3]), PlayerId.I) == 4

    def test_edge_columns(self):
        assert column_bonus(Board.from_moves([0, 1, 6]), PlayerId.I) == 0

    def test_weights_by_column(self):
        got = [column_bonus(Board.from_moves([c]), PlayerId.I) for c in range(7)]
        assert got == [0, 1, 2, 4, 2, 1, 0]


class TestPayoff:
    def test_empty(self):
        assert minimax_payoff(Board()) == 0

    def test_vertical_four(self):
        assert minimax_payoff(Board.from_moves([0, 1, 0, 1, 0, 1, 0])) == WIN_SENTINEL

    def test_loss_is_negative_sentinel(self):
        assert minimax_payoff(Board.from_moves([6, 0, 1, 0, 1, 0, 1, 0])) == -WIN_SENTINEL

    def test_single_centre_piece(self):
        assert minimax_payoff(Board.from_moves([3])) == 11

    def test_draw(self):
        assert minimax_payoff(Board.from_cells(DRAW_ROWS)) == 0

    def test_sentinel_exceeds_any_feature_sum(self):
        # 69 windows at the largest weight plus every cell in the centre column
        assert WIN_SENTINEL > 69 * 6 + 42 * 4

    def test_breakdown_total(self):
        board = Board.from_moves([3, 3, 2, 4, 1])
        b = breakdown(board)
        assert b.total == minimax_payoff(board)
        assert b.player_i.subtotal == feature_score(board, PlayerId.I)

    @given(move_lists)
    def test_matches_oracle(self, cols):
        board = play_legal(cols)
        assert minimax_payoff(board) == O.payoff(grid(board))

    @given(move_lists)
    def test_antisymmetric_under_colour_swap(self, cols):
        board = play_legal(cols)
        assert minimax_payoff(swap_players(board)) == -minimax_payoff(board)

    @given(move_lists)
    def test_reflection_invariant(self, cols):
        board = play_legal(cols)
        assert minimax_payoff(reflect(board)) == minimax_payoff(board)


class TestQReward:
    def test_first_move_centre(self):
        assert q_reward(Board(), Board.from_moves([3]), PlayerId.I) == 11

    def test_winning_move(self):
        prev = Board.from_moves([0, 6, 1, 6, 2, 6])
        nxt = Board.from_moves([0, 6, 1, 6, 2, 6, 3])
        r = q_reward(prev, nxt, PlayerId.I)
        assert r >= 40
        assert r == 40 + feature_score(nxt, PlayerId.I) - feature_score(prev, PlayerId.I)

    def test_loss_seen_after_reply(self):
        prev = Board.from_moves([0, 6, 1, 6, 2, 6, 5])
        nxt = Board.from_moves([0, 6, 1, 6, 2, 6, 5, 6])
        assert terminal_status(nxt) is Outcome.WIN_II
        assert q_reward(prev, nxt, PlayerId.I) == -30

    def test_draw(self):
        full = Board.from_cells(DRAW_ROWS)
        # remove the top piece of column 0 (a PlayerII piece) to get the position before it
        rows = [list(r) for r in DRAW_ROWS]
        rows[5][0] = 0
        prev = Board.from_cells(rows)
        assert q_reward(prev, full, PlayerId.II) == 0

    def test_shaping_is_delta(self):
        prev = Board.from_moves([3, 3])
        nxt = Board.from_moves([3, 3, 2])
        expect = O.score(grid(nxt), 1) - O.score(grid(prev), 1)
        assert q_reward(prev, nxt, PlayerId.I) == expect
