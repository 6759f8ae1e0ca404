"""Tabular Q-learning with epsilon-greedy exploration.

One table serves both seats.  A state is only ever updated by the player to
move in it, so even-move-count keys belong to PlayerI and odd ones to
PlayerII.  The bootstrap target of a transition is the learner's *next*
decision state, i.e. the position after the opponent has replied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .engine import (CELLS, COLS, Board, NoLegalMoves, Outcome, PlayerId, apply_move,
                     encode_state, legal_moves, terminal_status)
from .scoring import DRAW_REWARD, LOSS_REWARD, q_reward

HEADER = "QTABLE v1"


class FormatError(ValueError):
    pass


class QTable:
    """Sparse map ``(state key, column) -> value``; missing entries read as 0."""

    def __init__(self):
        self._rows: dict[str, dict[int, float]] = {}

    def get(self, state: str, action: int) -> float:
        row = self._rows.get(state)
        if row is None:
            return 0.0
        return row.get(action, 0.0)

    def set(self, state: str, action: int, value: float) -> None:
        self._rows.setdefault(state, {})[action] = value

    def row(self, state: str) -> dict[int, float] | None:
        return self._rows.get(state)

    def __contains__(self, item) -> bool:
        state, action = item
        return action in self._rows.get(state, ())

    def __len__(self) -> int:
        return sum(len(r) for r in self._rows.values())

    @property
    def unique_states(self) -> int:
        return len(self._rows)

    def items(self) -> Iterator[tuple[str, int, float]]:
        for state in sorted(self._rows):
            row = self._rows[state]
            for action in sorted(row):
                yield state, action, row[action]

    def __eq__(self, other) -> bool:
        return isinstance(other, QTable) and self._rows == other._rows

    def __repr__(self):
        return f"QTable(entries={len(self)}, states={self.unique_states})"


def td_update(q: QTable, state: str, action: int, reward: float, next_state: str | None,
              next_actions: list[int], alpha: float, gamma: float) -> QTable:
    """One temporal-difference step; no bootstrap when ``next_actions`` is empty."""
    old = q.get(state, action)
    future = max(q.get(next_state, a) for a in next_actions) if next_actions else 0.0
    q.set(state, action, old + alpha * (reward + gamma * future - old))
    return q


def _argmax(q: QTable, state: str, moves: list[int]) -> int:
    row = q.row(state)
    if not row:
        return moves[0]
    best, best_v = moves[0], row.get(moves[0], 0.0)
    for m in moves[1:]:
        v = row.get(m, 0.0)
        if v > best_v:
            best, best_v = m, v
    return best


def epsilon_greedy_action(q: QTable, board: Board, epsilon: float, rng: np.random.Generator) -> int:
    moves = legal_moves(board)
    if not moves:
        raise NoLegalMoves("board is full")
    if rng.random() < epsilon:
        return moves[int(rng.integers(len(moves)))]
    return _argmax(q, encode_state(board), moves)


def greedy_action(q: QTable, board: Board) -> int:
    """Highest-valued legal column, lowest index on ties."""
    moves = legal_moves(board)
    if not moves:
        raise NoLegalMoves("board is full")
    return _argmax(q, encode_state(board), moves)


@dataclass(frozen=True)
class TrainingSchedule:
    total_games: int
    expert_games: int = 0
    expert_depth: int = 4
    gamma: float = 0.5
    epsilon0: float = 1.0
    epsilon_min: float = 0.05
    epsilon_half_life: float | None = None
    alpha0: float = 0.5
    alpha_min: float = 0.05
    alpha_half_life: float | None = None

    def __post_init__(self):
        if self.total_games < 0 or not 0 <= self.expert_games <= self.total_games:
            raise ValueError("need 0 <= expert_games <= total_games")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        for lo, hi in ((self.epsilon_min, self.epsilon0), (self.alpha_min, self.alpha0)):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError("decay bounds must satisfy 0 <= min <= initial <= 1")

    def _rate(self, half_life: float | None) -> float:
        if half_life is None:
            half_life = self.total_games / 5
        return math.log(2) / half_life if half_life > 0 else 0.0

    def epsilon(self, t: int) -> float:
        return max(self.epsilon_min, self.epsilon0 * math.exp(-self._rate(self.epsilon_half_life) * t))

    def alpha(self, t: int) -> float:
        return max(self.alpha_min, self.alpha0 * math.exp(-self._rate(self.alpha_half_life) * t))


class QAgent:
    """Greedy inference over a trained table.

    With ``unseen="random"`` a position absent from the table is played
    uniformly at random instead of defaulting to the lowest column.
    """

    def __init__(self, qtable: QTable, label: str = "QLearning", unseen: str = "random"):
        if unseen not in ("random", "lowest"):
            raise ValueError(f"unseen must be 'random' or 'lowest', not {unseen!r}")
        self.qtable = qtable
        self.label = label
        self.unseen = unseen

    def choose_move(self, board: Board, rng: np.random.Generator) -> int:
        moves = legal_moves(board)
        if not moves:
            raise NoLegalMoves("board is full")
        key = encode_state(board)
        if self.unseen == "random" and self.qtable.row(key) is None:
            return moves[int(rng.integers(len(moves)))]
        return _argmax(self.qtable, key, moves)


@dataclass
class TrainedQAgent:
    qtable: QTable
    schedule: TrainingSchedule
    games_trained: int
    final_epsilon: float
    final_alpha: float

    @property
    def unique_states(self) -> int:
        return self.qtable.unique_states

    def agent(self, label: str = "QLearning", unseen: str = "random") -> QAgent:
        return QAgent(self.qtable, label, unseen)


UpdateHook = Callable[[PlayerId, str], None]
BOTH_SEATS = (PlayerId.I, PlayerId.II)


def _training_game(q: QTable, learners: tuple[PlayerId, ...], expert, epsilon: float, alpha: float,
                   gamma: float, rng: np.random.Generator, on_update: UpdateHook | None,
                   expert_seat: PlayerId | None = None) -> Outcome:
    board = Board()
    cells = ["0"] * CELLS
    heights = [0] * COLS
    pending: dict[PlayerId, tuple[str, int, float] | None] = {PlayerId.I: None, PlayerId.II: None}
    while True:
        player = board.to_move
        key = "".join(cells)
        moves = legal_moves(board)
        learning = player in learners
        if learning:
            prior = pending[player]
            if prior is not None:
                td_update(q, prior[0], prior[1], prior[2], key, moves, alpha, gamma)
                if on_update:
                    on_update(player, prior[0])
        if player is expert_seat or not learning:
            action = expert.choose_move(board, rng)
        elif rng.random() < epsilon:
            action = moves[int(rng.integers(len(moves)))]
        else:
            action = _argmax(q, key, moves)
        nxt = apply_move(board, action)
        cells[heights[action] * COLS + action] = "1" if player is PlayerId.I else "2"
        heights[action] += 1
        outcome = terminal_status(nxt)
        if learning:
            reward = q_reward(board, nxt, player)
        if outcome is not Outcome.ONGOING:
            if learning:
                td_update(q, key, action, reward, None, [], alpha, gamma)
                if on_update:
                    on_update(player, key)
            opp = player.other
            prior = pending[opp]
            if prior is not None:
                # the opponent's last move is answered by a loss or a draw
                final = DRAW_REWARD if outcome is Outcome.DRAW else LOSS_REWARD
                td_update(q, prior[0], prior[1], final, None, [], alpha, gamma)
                if on_update:
                    on_update(opp, prior[0])
            return outcome
        if learning:
            pending[player] = (key, action, reward)
        board = nxt


def train(schedule: TrainingSchedule, expert=None, rng: np.random.Generator | None = None,
          qtable: QTable | None = None, on_update: UpdateHook | None = None) -> TrainedQAgent:
    """Train ``total_games`` as PlayerI, then ``total_games`` as PlayerII.

    The first ``expert_games`` of each block are played against ``expert``
    (a depth-``expert_depth`` Minimax-ABMO by default) sitting in the other
    seat; the rest are self-play.  Both seats' transitions update the table in
    every game, so expert games also record the expert's own moves (Q-learning
    is off-policy).  The decay clock restarts at the beginning of each block.
    """
    if rng is None:
        rng = np.random.default_rng()
    if expert is None and schedule.expert_games > 0:
        from .minimax import MinimaxAgent, SearchConfig
        expert = MinimaxAgent(SearchConfig(schedule.expert_depth, True, True))
    q = qtable if qtable is not None else QTable()
    eps = alpha = None
    for seat in (PlayerId.I, PlayerId.II):
        for t in range(schedule.total_games):
            eps, alpha = schedule.epsilon(t), schedule.alpha(t)
            coach = seat.other if t < schedule.expert_games else None
            _training_game(q, BOTH_SEATS, expert, eps, alpha, schedule.gamma, rng, on_update, coach)
    t_end = schedule.total_games
    return TrainedQAgent(q, schedule, 2 * schedule.total_games,
                         schedule.epsilon(t_end), schedule.alpha(t_end))


def save_qtable(q: QTable, path: str | Path) -> None:
    lines = [HEADER]
    lines.extend(f"{s} {a} {v:.17g}" for s, a, v in q.items())
    Path(path).write_text("\n".join(lines) + "\n")


def load_qtable(path: str | Path) -> QTable:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(f"{path}: missing '{HEADER}' header")
    q = QTable()
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{n}: expected 3 fields")
        state, action, value = parts
        if len(state) != CELLS or set(state) - set("012"):
            raise FormatError(f"{path}:{n}: bad state key")
        try:
            col = int(action)
            val = float(value)
        except ValueError as exc:
            raise FormatError(f"{path}:{n}: {exc}") from None
        if not 0 <= col < COLS:
            raise FormatError(f"{path}:{n}: column {col} out of range")
        q.set(state, col, val)
    return q
