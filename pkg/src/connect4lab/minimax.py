"""Depth-limited minimax with optional alpha-beta pruning and move ordering.

PlayerI maximises the payoff of :func:`connect4lab.scoring.minimax_payoff`,
PlayerII minimises it.  Depth counts plies.  Ties between root moves always go
to the lowest column, so all four variants pick the same move.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .engine import Board, NoLegalMoves, PlayerId, apply_move, legal_moves
from .scoring import minimax_payoff

NEG_INF = -K.INF_SCORE
POS_INF = K.INF_SCORE


@dataclass(frozen=True)
class SearchConfig:
    depth: int
    use_alpha_beta: bool = False
    use_move_ordering: bool = False

    def __post_init__(self):
        if not 1 <= self.depth <= 42:
            raise ValueError(f"depth must be in 1..42, got {self.depth}")

    @property
    def variant(self) -> str:
        tag = ("AB" if self.use_alpha_beta else "") + ("MO" if self.use_move_ordering else "")
        return f"Minimax-{tag}-{self.depth}" if tag else f"Minimax-{self.depth}"


@dataclass(frozen=True)
class SearchResult:
    move: int
    value: int
    nodes_visited: int


@dataclass(frozen=True)
class PruneWindow:
    alpha: int = NEG_INF
    beta: int = POS_INF


def _search(board: Board, depth: int, use_ab: bool, use_mo: bool, window: PruneWindow) -> SearchResult:
    if not legal_moves(board):
        raise NoLegalMoves("board is full")
    maximizing = board.to_move is PlayerId.I
    col, value, nodes = K.root_search(board.p1, board.p2, board.move_count, depth, maximizing,
                                      window.alpha, window.beta, use_ab, use_mo)
    return SearchResult(int(col), int(value), int(nodes))


def minimax_search(board: Board, config: SearchConfig) -> SearchResult:
    """Search with the variant selected by ``config``."""
    return _search(board, config.depth, config.use_alpha_beta, config.use_move_ordering, PruneWindow())


def alphabeta_search(board: Board, config: SearchConfig, window: PruneWindow = PruneWindow()) -> SearchResult:
    return _search(board, config.depth, True, config.use_move_ordering, window)


def order_moves(board: Board, moves: list[int], maximizing: bool) -> list[int]:
    """Sort ``moves`` by the payoff one ply ahead, best first for the mover.

    Python's sort is stable, so equal scores keep their incoming order.
    """
    scores = {m: minimax_payoff(apply_move(board, m)) for m in moves}
    return sorted(moves, key=lambda m: -scores[m] if maximizing else scores[m])


class MinimaxAgent:
    def __init__(self, config: SearchConfig, label: str | None = None):
        self.config = config
        self.label = label or config.variant

    def choose_move(self, board: Board, rng: np.random.Generator | None = None) -> int:
        return minimax_search(board, self.config).move
