import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from connect4lab.engine import (CELLS, Board, IllegalMove, InvalidBoard, Outcome, PlayerId,
                                apply_move, encode_state, legal_moves, reflect, swap_players,
                                terminal_status, winning_moves)

# full board, no four anywhere: three rows of 1212121 under three rows of 2121212
DRAW_ROWS = [[1, 2, 1, 2, 1, 2, 1]] * 3 + [[2, 1, 2, 1, 2, 1, 2]] * 3

move_lists = st.lists(st.integers(0, 6), max_size=60)


def play_legal(cols):
    """Apply the playable prefix of ``cols``, skipping full columns, until the game ends."""
    board = Board()
    for c in cols:
        if terminal_status(board) is not Outcome.ONGOING:
            break
        if c in legal_moves(board):
            board = apply_move(board, c)
    return board


def to_grid(board):
    return [list(row) for row in board.cells()]


class TestLegalMoves:
    def test_empty_board(self):
        assert legal_moves(Board()) == [0, 1, 2, 3, 4, 5, 6]

    def test_full_column_excluded(self):
        board = Board.from_moves([6, 6, 6, 6, 6, 6])
        assert legal_moves(board) == [0, 1, 2, 3, 4, 5]

    def test_full_board(self):
        board = Board.from_cells(DRAW_ROWS)
        assert legal_moves(board) == []


class TestApplyMove:
    def test_gravity(self):
        board = apply_move(Board(), 3)
        assert board.cell(0, 3) == 1 and board.move_count == 1

    def test_stacking(self):
        board = apply_move(apply_move(Board(), 3), 3)
        assert board.cell(1, 3) == 2

    def test_input_unchanged(self):
        before = Board.from_moves([3])
        apply_move(before, 2)
        assert before == Board.from_moves([3])

    def test_full_column_raises(self):
        with pytest.raises(IllegalMove):
            apply_move(Board.from_moves([0] * 6), 0)

    @pytest.mark.parametrize("col", [-1, 7, 100])
    def test_out_of_range_raises(self, col):
        with pytest.raises(IllegalMove):
            apply_move(Board(), col)

    @given(move_lists)
    def test_invariants_hold(self, cols):
        board = play_legal(cols)
        board.validate()
        n1, n2 = bin(board.p1).count("1"), bin(board.p2).count("1")
        assert board.move_count == n1 + n2
        assert board.to_move is (PlayerId.I if n1 == n2 else PlayerId.II)


class TestTerminal:
    def test_vertical(self):
        rows = [[1, 2, 0, 0, 0, 0, 0]] * 3 + [[1, 0, 0, 0, 0, 0, 0]] + [[0] * 7] * 2
        assert terminal_status(Board.from_cells(rows)) is Outcome.WIN_I

    def test_diagonal(self):
        board = Board.from_moves([0, 1, 1, 2, 2, 3, 2, 3, 3, 6, 3])
        assert board.cell(3, 3) == 1
        assert terminal_status(board) is Outcome.WIN_I

    def test_anti_diagonal_for_second_player(self):
        rows = [[0, 0, 0, 1, 1, 1, 2],
                [0, 0, 0, 2, 1, 2, 0],
                [0, 0, 0, 1, 2, 0, 0],
                [0, 0, 0, 2, 0, 0, 0]] + [[0] * 7] * 2
        assert terminal_status(Board.from_cells(rows)) is Outcome.WIN_II

    def test_draw_board(self):
        assert O.winner(DRAW_ROWS) == 0
        assert terminal_status(Board.from_cells(DRAW_ROWS)) is Outcome.DRAW

    def test_matches_window_scan(self):
        for seed in range(10_000):
            grid, moves = O.random_game(seed, max_plies=seed % 43)
            board = Board.from_moves(moves)
            assert terminal_status(board).value == O.status(grid), moves

    def test_random_playouts_end_within_42(self):
        for seed in range(500):
            grid, moves = O.random_game(seed)
            assert len(moves) <= 42
            assert terminal_status(Board.from_moves(moves)) is not Outcome.ONGOING


class TestEncoding:
    def test_empty(self):
        assert encode_state(Board()) == "0" * CELLS

    def test_corner(self):
        assert encode_state(Board.from_moves([0])) == "1" + "0" * 41

    def test_row_major_from_bottom(self):
        key = encode_state(Board.from_moves([3, 3]))
        assert key[3] == "1" and key[7 + 3] == "2"

    @given(move_lists)
    def test_roundtrip(self, cols):
        board = play_legal(cols)
        assert Board.from_string(encode_state(board)) == board

    @settings(max_examples=200)
    @given(move_lists, move_lists)
    def test_injective(self, a, b):
        ba, bb = play_legal(a), play_legal(b)
        assert (encode_state(ba) == encode_state(bb)) == (ba == bb)

    def test_matches_grid(self):
        for seed in range(200):
            grid, moves = O.random_game(seed, max_plies=30)
            expect = "".join(str(grid[r][c]) for r in range(6) for c in range(7))
            assert encode_state(Board.from_moves(moves)) == expect


class TestBoardValidation:
    def test_floating_piece(self):
        rows = [[0] * 7, [1, 0, 0, 0, 0, 0, 0]] + [[0] * 7] * 4
        with pytest.raises(InvalidBoard):
            Board.from_cells(rows)

    def test_turn_order(self):
        rows = [[2, 2, 0, 0, 0, 0, 0]] + [[0] * 7] * 5
        with pytest.raises(InvalidBoard):
            Board.from_cells(rows)

    def test_bad_key(self):
        with pytest.raises(InvalidBoard):
            Board.from_string("3" * 42)

    def test_render(self):
        text = Board.from_moves([3, 3]).render().splitlines()
        assert text[-1] == "1 2 3 4 5 6 7"
        assert text[-2] == ". . . X . . ."
        assert text[-3] == ". . . O . . ."


class TestHelpers:
    def test_winning_moves(self):
        board = Board.from_moves([0, 6, 1, 6, 2])
        assert winning_moves(board, PlayerId.I) == [3]
        assert winning_moves(board, PlayerId.II) == []

    @given(move_lists)
    def test_winning_moves_match_oracle(self, cols):
        board = play_legal(cols)
        if terminal_status(board) is not Outcome.ONGOING:
            return
        grid = to_grid(board)
        for p in PlayerId:
            assert winning_moves(board, p) == O.immediate_wins(grid, p.value)

    @given(move_lists)
    def test_reflect_involution(self, cols):
        board = play_legal(cols)
        assert reflect(reflect(board)) == board
        assert swap_players(swap_players(board)) == board
        mirrored = to_grid(reflect(board))
        assert mirrored == [row[::-1] for row in to_grid(board)]
