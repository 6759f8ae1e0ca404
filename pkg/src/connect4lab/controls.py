"""Reference opponents of increasing strength: Random, Supervised, Heuristic.

Supervised is a stand-in rule set (take a win, block a loss, otherwise play
at random); the original semi-weak player it imitates is not reproduced.
Heuristic applies the same two overrides and otherwise plays the move that
maximises its own feature score one ply ahead.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from . import _kernels as K
from .engine import Board, NoLegalMoves, PlayerId, legal_moves, winning_moves


class ControlKind(str, Enum):
    RANDOM = "Random"
    SUPERVISED = "Supervised"
    HEURISTIC = "Heuristic"


def _moves(board: Board) -> list[int]:
    moves = legal_moves(board)
    if not moves:
        raise NoLegalMoves("board is full")
    return moves


def random_move(board: Board, rng: np.random.Generator) -> int:
    moves = _moves(board)
    return moves[int(rng.integers(len(moves)))]


def _override(board: Board) -> int | None:
    player = board.to_move
    wins = winning_moves(board, player)
    if wins:
        return wins[0]
    blocks = winning_moves(board, player.other)
    if blocks:
        return blocks[0]
    return None


def supervised_move(board: Board, rng: np.random.Generator) -> int:
    moves = _moves(board)
    forced = _override(board)
    if forced is not None:
        return forced
    return moves[int(rng.integers(len(moves)))]


def heuristic_move(board: Board) -> int:
    moves = _moves(board)
    forced = _override(board)
    if forced is not None:
        return forced
    mask = board.mask
    own, opp = (board.p1, board.p2) if board.to_move is PlayerId.I else (board.p2, board.p1)
    best, best_score = moves[0], None
    for c in moves:
        score = K.feature_score(own | K.drop(mask, c), opp)
        if best_score is None or score > best_score:
            best, best_score = c, score
    return best


class ControlAgent:
    def __init__(self, kind: ControlKind | str):
        self.kind = ControlKind(kind)
        self.label = self.kind.value

    def choose_move(self, board: Board, rng: np.random.Generator) -> int:
        if self.kind is ControlKind.RANDOM:
            return random_move(board, rng)
        if self.kind is ControlKind.SUPERVISED:
            return supervised_move(board, rng)
        return heuristic_move(board)
