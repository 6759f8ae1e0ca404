"""Monte Carlo tree search with UCT selection and the Decisive Moves override.

Two interchangeable tree implementations are provided.  The object tree built
from :class:`SearchTreeNode` is the readable one and exposes each phase
(select, expand, simulate, backpropagate) separately.  :class:`ArrayTree` runs
the same loop in compiled code over flat arrays and is what the agents use.
Given the same seed both produce identical statistics.

Rewards are credited from the point of view of the player who made the move
into a node: 1 for a win, 0.5 for a draw, 0 for a loss.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .engine import (Board, NoLegalMoves, Outcome, PlayerId, apply_move, legal_moves,
                     terminal_status, winning_moves)
from .rng import SplitMix64, draw_seed

DEFAULT_CP = 1.0 / math.sqrt(2.0)
_CHUNK = 32


@dataclass(frozen=True)
class MctsConfig:
    max_iterations: int | None = None
    max_time: float | None = None
    cp: float = DEFAULT_CP
    decisive: bool = False

    def __post_init__(self):
        if (self.max_iterations is None) == (self.max_time is None):
            raise ValueError("exactly one of max_iterations / max_time must be set")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.max_time is not None and self.max_time <= 0:
            raise ValueError("max_time must be positive")
        if self.cp <= 0:
            raise ValueError("cp must be positive")


@dataclass(eq=False)
class SearchTreeNode:
    mover: PlayerId
    move: int | None = None
    parent: SearchTreeNode | None = None
    children: list[SearchTreeNode] = field(default_factory=list)
    visits: int = 0
    value: float = 0.0

    @property
    def player_to_move(self) -> PlayerId:
        return self.mover.other

    @property
    def mean(self) -> float:
        return self.value / self.visits

    def __repr__(self):
        return f"SearchTreeNode(move={self.move}, n={self.visits}, v={self.value})"


def uct_value(value: float, visits: int, parent_visits: int, cp: float = DEFAULT_CP) -> float:
    """Mean reward plus ``2 cp sqrt(2 ln N / n)``; unvisited nodes rank first."""
    if visits == 0:
        return math.inf
    return value / visits + 2.0 * cp * math.sqrt(2.0 * math.log(parent_visits) / visits)


def new_root(board: Board) -> SearchTreeNode:
    return SearchTreeNode(mover=board.to_move.other)


def select(root: SearchTreeNode, board: Board, cp: float = DEFAULT_CP) -> tuple[SearchTreeNode, Board]:
    node = root
    while node.children:
        best, best_u = None, -math.inf
        for child in node.children:
            u = uct_value(child.value, child.visits, node.visits, cp)
            if u > best_u:
                best, best_u = child, u
        node = best
        board = apply_move(board, node.move)
    return node, board


def expand(leaf: SearchTreeNode, board: Board) -> tuple[SearchTreeNode, Board]:
    """Add children to a previously visited leaf and step into the first one.

    A leaf that has never been visited is returned unchanged, as is a
    terminal one.
    """
    if leaf.visits == 0 or terminal_status(board) is not Outcome.ONGOING:
        return leaf, board
    mover = board.to_move
    leaf.children = [SearchTreeNode(mover=mover, move=c, parent=leaf) for c in legal_moves(board)]
    first = leaf.children[0]
    return first, apply_move(board, first.move)


def simulate(board: Board, rng: SplitMix64) -> Outcome:
    """Play uniformly random moves until the game ends."""
    while True:
        outcome = terminal_status(board)
        if outcome is not Outcome.ONGOING:
            return outcome
        moves = legal_moves(board)
        board = apply_move(board, moves[rng.below(len(moves))])


def backpropagate(node: SearchTreeNode | None, outcome: Outcome) -> None:
    while node is not None:
        node.visits += 1
        if outcome is Outcome.DRAW:
            node.value += 0.5
        elif outcome.winner is node.mover:
            node.value += 1.0
        node = node.parent


def run_iterations(root: SearchTreeNode, board: Board, iterations: int, rng: SplitMix64,
                   cp: float = DEFAULT_CP) -> SearchTreeNode:
    for _ in range(iterations):
        leaf, leaf_board = select(root, board, cp)
        node, node_board = expand(leaf, leaf_board)
        backpropagate(node, simulate(node_board, rng))
    return root


def best_move(children: list[tuple[int, int, float]], board: Board) -> int:
    """Pick the ``(move, visits, value)`` entry with the best mean reward."""
    best, best_mean = None, -math.inf
    for move, visits, value in children:
        if visits == 0:
            continue
        mean = value / visits
        if mean > best_mean or (mean == best_mean and move < best):
            best, best_mean = move, mean
    if best is None:
        # root never expanded (budget of one iteration)
        return legal_moves(board)[0]
    return best


def decisive_move(board: Board) -> int | None:
    """A winning move, else a move blocking the opponent's immediate win."""
    player = board.to_move
    wins = winning_moves(board, player)
    if wins:
        return wins[0]
    threats = winning_moves(board, player.other)
    if threats:
        return threats[0]
    return None


class ArrayTree:
    """Flat-array search tree driven by the compiled iteration kernel."""

    def __init__(self, board: Board, seed: int, capacity: int = 1024):
        self.board = board
        self.parent = np.full(capacity, -1, dtype=np.int32)
        self.first_child = np.full(capacity, -1, dtype=np.int32)
        self.n_child = np.zeros(capacity, dtype=np.int32)
        self.move = np.full(capacity, -1, dtype=np.int32)
        self.mover = np.zeros(capacity, dtype=np.int32)
        self.visits = np.zeros(capacity, dtype=np.int64)
        self.value = np.zeros(capacity, dtype=np.float64)
        self.size = np.ones(1, dtype=np.int64)
        self.mover[0] = int(board.to_move.other)
        self.state = np.array([seed], dtype=np.uint64)
        self.iterations = 0

    def _reserve(self, extra: int) -> None:
        need = int(self.size[0]) + extra
        cap = self.parent.shape[0]
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        for name in ("parent", "first_child", "n_child", "move", "mover", "visits", "value"):
            old = getattr(self, name)
            grown = np.zeros(new_cap, dtype=old.dtype)
            grown[:cap] = old
            setattr(self, name, grown)

    def run(self, iterations: int, cp: float = DEFAULT_CP) -> None:
        self._reserve(7 * iterations)
        b = self.board
        K.mcts_iterate(self.parent, self.first_child, self.n_child, self.move, self.mover,
                       self.visits, self.value, self.size, b.p1, b.p2, b.move_count,
                       iterations, cp, self.state)
        self.iterations += iterations

    def run_for(self, seconds: float, cp: float = DEFAULT_CP) -> None:
        deadline = time.perf_counter() + seconds
        while True:
            self.run(_CHUNK, cp)
            if time.perf_counter() >= deadline:
                return

    def root_children(self) -> list[tuple[int, int, float]]:
        start, n = int(self.first_child[0]), int(self.n_child[0])
        if n == 0:
            return []
        return [(int(self.move[k]), int(self.visits[k]), float(self.value[k]))
                for k in range(start, start + n)]


def search(board: Board, config: MctsConfig, seed: int) -> ArrayTree:
    tree = ArrayTree(board, seed)
    if config.max_iterations is not None:
        tree.run(config.max_iterations, config.cp)
    else:
        tree.run_for(config.max_time, config.cp)
    return tree


def choose_move(board: Board, config: MctsConfig, rng: np.random.Generator) -> int:
    if terminal_status(board) is not Outcome.ONGOING or not legal_moves(board):
        raise NoLegalMoves("game is over")
    if config.decisive:
        forced = decisive_move(board)
        if forced is not None:
            return forced
    tree = search(board, config, draw_seed(rng))
    return best_move(tree.root_children(), board)


class MctsAgent:
    def __init__(self, config: MctsConfig, label: str | None = None):
        self.config = config
        if label is None:
            budget = (f"{config.max_iterations}it" if config.max_iterations is not None
                      else f"{config.max_time:g}")
            label = f"MCTS-Decisive-{budget}" if config.decisive else f"MCTS-{budget}"
        self.label = label

    def choose_move(self, board: Board, rng: np.random.Generator) -> int:
        return choose_move(board, self.config, rng)
