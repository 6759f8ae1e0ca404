"""Heuristic features shared by the Q-learning reward, the minimax payoff and
the Heuristic control.

A "piece in a row" feature is a 4-cell window (horizontal, vertical or
diagonal) holding exactly n of the player's pieces and no opponent piece.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernels as K
from .engine import Board, Outcome, PlayerId, terminal_status

ROW_WEIGHTS = {1: 1, 2: 2, 3: 6}
# keyed by 0-indexed column
COLUMN_WEIGHTS = {0: 0, 1: 1, 2: 2, 3: 4, 4: 2, 5: 1, 6: 0}
WIN_REWARD = 40.0
LOSS_REWARD = -30.0
DRAW_REWARD = 0.0
WIN_SENTINEL = K.WIN_SCORE


@dataclass(frozen=True)
class FeatureWeights:
    rows: dict = field(default_factory=lambda: dict(ROW_WEIGHTS))
    columns: dict = field(default_factory=lambda: dict(COLUMN_WEIGHTS))
    win_reward: float = WIN_REWARD
    loss_reward: float = LOSS_REWARD
    win_sentinel: int = WIN_SENTINEL


@dataclass(frozen=True)
class PlayerFeatures:
    windows: dict[int, int]
    column_bonus: int

    @property
    def subtotal(self) -> int:
        return sum(ROW_WEIGHTS[n] * k for n, k in self.windows.items()) + self.column_bonus


@dataclass(frozen=True)
class ScoreBreakdown:
    player_i: PlayerFeatures
    player_ii: PlayerFeatures

    @property
    def total(self) -> int:
        return self.player_i.subtotal - self.player_ii.subtotal


def _own_opp(board: Board, player: PlayerId) -> tuple[int, int]:
    if player is PlayerId.I:
        return board.p1, board.p2
    return board.p2, board.p1


def count_windows(board: Board, player: PlayerId, n: int) -> int:
    if n not in (1, 2, 3):
        raise ValueError(f"n must be 1, 2 or 3, got {n}")
    own, opp = _own_opp(board, player)
    return int(K.count_windows(own, opp, n))


def column_bonus(board: Board, player: PlayerId) -> int:
    own, _ = _own_opp(board, player)
    return int(K.column_bonus(own))


def feature_score(board: Board, player: PlayerId) -> int:
    """Window counts times weights plus column bonus, for one player."""
    own, opp = _own_opp(board, player)
    return int(K.feature_score(own, opp))


def breakdown(board: Board) -> ScoreBreakdown:
    def side(player):
        return PlayerFeatures(
            windows={n: count_windows(board, player, n) for n in (1, 2, 3)},
            column_bonus=column_bonus(board, player),
        )

    return ScoreBreakdown(side(PlayerId.I), side(PlayerId.II))


def minimax_payoff(board: Board) -> int:
    """Payoff from PlayerI's perspective; wins are +/-WIN_SENTINEL, draws 0."""
    return int(K.payoff(board.p1, board.p2))


def q_reward(prev: Board, next: Board, actor: PlayerId) -> float:
    """Reward credited to ``actor`` for the transition ``prev -> next``.

    Shaping is the change in the actor's feature score; terminal bonuses are
    absolute.  ``next`` may be the board after the opponent's reply, in which
    case a finished game is scored as a loss or a draw for the actor.
    """
    outcome = terminal_status(next)
    if outcome is Outcome.DRAW:
        return DRAW_REWARD
    if outcome is not Outcome.ONGOING and outcome.winner is not actor:
        return LOSS_REWARD
    delta = float(feature_score(next, actor) - feature_score(prev, actor))
    if outcome is not Outcome.ONGOING:
        return WIN_REWARD + delta
    return delta

