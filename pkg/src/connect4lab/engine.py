"""Connect-4 rules on a 6x7 board.

Positions are stored as two bitboards, one per player.  Bit ``col * 7 + row``
is the cell at ``(row, col)``; row 0 is the bottom row.  The seventh bit of
every column is a permanently empty sentinel so that shifted win checks never
wrap from one column into the next.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

ROWS = 6
COLS = 7
CELLS = ROWS * COLS
STRIDE = ROWS + 1

BOTTOM = tuple(1 << (c * STRIDE) for c in range(COLS))
TOP = tuple(1 << (c * STRIDE + ROWS - 1) for c in range(COLS))
COLUMN = tuple(((1 << ROWS) - 1) << (c * STRIDE) for c in range(COLS))
FULL = sum(COLUMN)


class Connect4Error(Exception):
    """Base class for rule violations."""


class IllegalMove(Connect4Error, ValueError):
    pass


class NoLegalMoves(Connect4Error):
    pass


class InvalidBoard(Connect4Error, ValueError):
    pass


class PlayerId(IntEnum):
    I = 1
    II = 2

    @property
    def other(self) -> "PlayerId":
        return PlayerId.II if self is PlayerId.I else PlayerId.I


class Outcome(IntEnum):
    ONGOING = 0
    WIN_I = 1
    WIN_II = 2
    DRAW = 3

    @property
    def winner(self) -> PlayerId | None:
        if self is Outcome.WIN_I:
            return PlayerId.I
        if self is Outcome.WIN_II:
            return PlayerId.II
        return None

    @classmethod
    def win_for(cls, player: PlayerId) -> "Outcome":
        return cls.WIN_I if player is PlayerId.I else cls.WIN_II


def bit(row: int, col: int) -> int:
    return 1 << (col * STRIDE + row)


def has_four(bb: int) -> bool:
    """True if the bitboard contains four aligned pieces."""
    # vertical, horizontal, the two diagonals
    for shift in (1, STRIDE, STRIDE - 1, STRIDE + 1):
        m = bb & (bb >> shift)
        if m & (m >> (2 * shift)):
            return True
    return False


@dataclass(frozen=True, slots=True)
class Board:
    """Immutable Connect-4 position.

    ``p1``/``p2`` are the bitboards of PlayerI and PlayerII; the side to move
    follows from the parity of ``move_count``.
    """

    p1: int = 0
    p2: int = 0
    move_count: int = 0

    @classmethod
    def empty(cls) -> "Board":
        return cls()

    @classmethod
    def from_moves(cls, columns: Iterable[int]) -> "Board":
        board = cls()
        for col in columns:
            board = apply_move(board, col)
        return board

    @classmethod
    def from_cells(cls, rows: Sequence[Sequence[int]]) -> "Board":
        """Build from a 6x7 grid of 0/1/2 values, ``rows[0]`` being the bottom."""
        if len(rows) != ROWS or any(len(r) != COLS for r in rows):
            raise InvalidBoard("expected 6 rows of 7 cells")
        p1 = p2 = 0
        for r, row in enumerate(rows):
            for c, v in enumerate(row):
                if v == 1:
                    p1 |= bit(r, c)
                elif v == 2:
                    p2 |= bit(r, c)
                elif v != 0:
                    raise InvalidBoard(f"cell value {v!r} at ({r},{c})")
        board = cls(p1, p2, (p1 | p2).bit_count())
        board.validate()
        return board

    @classmethod
    def from_string(cls, key: str) -> "Board":
        """Inverse of :func:`encode_state`."""
        if len(key) != CELLS or set(key) - set("012"):
            raise InvalidBoard(f"not a state key: {key!r}")
        return cls.from_cells([[int(ch) for ch in key[r * COLS:(r + 1) * COLS]] for r in range(ROWS)])

    def validate(self) -> None:
        if self.p1 & self.p2:
            raise InvalidBoard("overlapping pieces")
        if (self.p1 | self.p2) & ~FULL:
            raise InvalidBoard("piece outside the grid")
        mask = self.p1 | self.p2
        for c in range(COLS):
            col = (mask >> (c * STRIDE)) & ((1 << ROWS) - 1)
            if col & (col + 1):
                raise InvalidBoard(f"floating piece in column {c}")
        n1, n2 = self.p1.bit_count(), self.p2.bit_count()
        if not 0 <= n1 - n2 <= 1:
            raise InvalidBoard(f"piece counts {n1}/{n2} violate turn order")
        if self.move_count != n1 + n2:
            raise InvalidBoard("move_count does not match the pieces on the board")

    @property
    def mask(self) -> int:
        return self.p1 | self.p2

    @property
    def to_move(self) -> PlayerId:
        return PlayerId.I if self.move_count % 2 == 0 else PlayerId.II

    def pieces(self, player: PlayerId) -> int:
        return self.p1 if player is PlayerId.I else self.p2

    def cell(self, row: int, col: int) -> int:
        b = bit(row, col)
        if self.p1 & b:
            return 1
        if self.p2 & b:
            return 2
        return 0

    def cells(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.cell(r, c) for c in range(COLS)) for r in range(ROWS))

    def height(self, col: int) -> int:
        return ((self.mask >> (col * STRIDE)) & ((1 << ROWS) - 1)).bit_count()

    def render(self) -> str:
        glyph = ".XO"
        lines = [" ".join(glyph[self.cell(r, c)] for c in range(COLS)) for r in reversed(range(ROWS))]
        lines.append(" ".join(str(c + 1) for c in range(COLS)))
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.render()


def legal_moves(board: Board) -> list[int]:
    mask = board.p1 | board.p2
    return [c for c in range(COLS) if not mask & TOP[c]]


def apply_move(board: Board, col: int) -> Board:
    if not 0 <= col < COLS:
        raise IllegalMove(f"column {col} out of range 0-6")
    mask = board.p1 | board.p2
    if mask & TOP[col]:
        raise IllegalMove(f"column {col} is full")
    piece = (mask + BOTTOM[col]) & COLUMN[col]
    if board.move_count % 2 == 0:
        return Board(board.p1 | piece, board.p2, board.move_count + 1)
    return Board(board.p1, board.p2 | piece, board.move_count + 1)


def terminal_status(board: Board) -> Outcome:
    if has_four(board.p1):
        return Outcome.WIN_I
    if has_four(board.p2):
        return Outcome.WIN_II
    if (board.p1 | board.p2) == FULL:
        return Outcome.DRAW
    return Outcome.ONGOING


def encode_state(board: Board) -> str:
    """42-character key, row-major from the bottom row, 0=empty 1=I 2=II."""
    p1, p2 = board.p1, board.p2
    out = []
    for r in range(ROWS):
        for c in range(COLS):
            b = 1 << (c * STRIDE + r)
            out.append("1" if p1 & b else "2" if p2 & b else "0")
    return "".join(out)


def winning_moves(board: Board, player: PlayerId) -> list[int]:
    """Columns where ``player`` dropping a piece now completes four."""
    mask = board.p1 | board.p2
    own = board.pieces(player)
    wins = []
    for c in range(COLS):
        if mask & TOP[c]:
            continue
        if has_four(own | ((mask + BOTTOM[c]) & COLUMN[c])):
            wins.append(c)
    return wins


def swap_players(board: Board) -> Board:
    """Exchange the colours of all pieces (turn-order invariant may not hold)."""
    return Board(board.p2, board.p1, board.move_count)


def reflect(board: Board) -> Board:
    """Left-right mirror image."""
    def flip(bb: int) -> int:
        out = 0
        for c in range(COLS):
            out |= ((bb >> (c * STRIDE)) & ((1 << STRIDE) - 1)) << ((COLS - 1 - c) * STRIDE)
        return out

    return Board(flip(board.p1), flip(board.p2), board.move_count)
