"""Compiled hot paths: window scoring, depth-limited search, MCTS iterations.

Everything here works on raw bitboards (see :mod:`connect4lab.engine` for the
layout) so it can run under numba's nopython mode.  Outcome codes follow
:class:`connect4lab.engine.Outcome`: 0 ongoing, 1 PlayerI win, 2 PlayerII
win, 3 draw.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .engine import BOTTOM, COLS, COLUMN, FULL, ROWS, STRIDE, TOP


def _build_windows() -> np.ndarray:
    def b(r, c):
        return 1 << (c * STRIDE + r)

    out = []
    for r in range(ROWS):
        for c in range(COLS - 3):
            out.append(sum(b(r, c + i) for i in range(4)))
    for r in range(ROWS - 3):
        for c in range(COLS):
            out.append(sum(b(r + i, c) for i in range(4)))
    for r in range(ROWS - 3):
        for c in range(COLS - 3):
            out.append(sum(b(r + i, c + i) for i in range(4)))
    for r in range(ROWS - 3):
        for c in range(3, COLS):
            out.append(sum(b(r + i, c - i) for i in range(4)))
    return np.array(out, dtype=np.int64)


WINDOWS = _build_windows()
WINDOW_WEIGHT = np.array([0, 1, 2, 6, 0], dtype=np.int64)
# 0-indexed columns; 1-indexed 2&6 -> 1, 3&5 -> 2, 4 -> 4
COLUMN_WEIGHT = np.array([0, 1, 2, 4, 2, 1, 0], dtype=np.int64)

_TOP = np.array(TOP, dtype=np.int64)
_BOTTOM = np.array(BOTTOM, dtype=np.int64)
_COLUMN = np.array(COLUMN, dtype=np.int64)
_FULL = np.int64(FULL)

WIN_SCORE = 1_000_000
INF_SCORE = 1_000_000_000

ONGOING, WIN_I, WIN_II, DRAW = 0, 1, 2, 3


@njit(cache=True)
def popcount(x):
    n = 0
    while x:
        x &= x - 1
        n += 1
    return n


@njit(cache=True)
def has_four(bb):
    m = bb & (bb >> 1)
    if m & (m >> 2):
        return True
    m = bb & (bb >> 7)
    if m & (m >> 14):
        return True
    m = bb & (bb >> 6)
    if m & (m >> 12):
        return True
    m = bb & (bb >> 8)
    if m & (m >> 16):
        return True
    return False


@njit(cache=True)
def status(p1, p2):
    if has_four(p1):
        return WIN_I
    if has_four(p2):
        return WIN_II
    if (p1 | p2) == _FULL:
        return DRAW
    return ONGOING


@njit(cache=True)
def drop(mask, col):
    """Bit of the lowest empty cell in ``col`` (caller checks legality)."""
    return (mask + _BOTTOM[col]) & _COLUMN[col]


@njit(cache=True)
def count_windows(own, opp, n):
    total = 0
    for i in range(WINDOWS.shape[0]):
        w = WINDOWS[i]
        if w & opp == 0 and popcount(w & own) == n:
            total += 1
    return total


@njit(cache=True)
def column_bonus(own):
    total = 0
    for c in range(7):
        total += popcount(own & _COLUMN[c]) * COLUMN_WEIGHT[c]
    return total


@njit(cache=True)
def feature_score(own, opp):
    """Weighted open-window counts plus column placement bonus for ``own``."""
    total = 0
    for i in range(WINDOWS.shape[0]):
        w = WINDOWS[i]
        if w & opp == 0:
            total += WINDOW_WEIGHT[popcount(w & own)]
    return total + column_bonus(own)


@njit(cache=True)
def payoff(p1, p2):
    """Zero-sum payoff from PlayerI's point of view."""
    if has_four(p1):
        return WIN_SCORE
    if has_four(p2):
        return -WIN_SCORE
    if (p1 | p2) == _FULL:
        return 0
    return feature_score(p1, p2) - feature_score(p2, p1)


@njit(cache=True)
def ordered_moves(p1, p2, nmoves, maximizing, out):
    """Fill ``out`` with legal columns sorted by one-ply payoff; returns count.

    Stable: equal scores keep ascending column order.
    """
    mask = p1 | p2
    scores = np.empty(7, dtype=np.int64)
    n = 0
    for c in range(7):
        if mask & _TOP[c]:
            continue
        piece = drop(mask, c)
        if nmoves % 2 == 0:
            s = payoff(p1 | piece, p2)
        else:
            s = payoff(p1, p2 | piece)
        if not maximizing:
            s = -s
        # insertion sort, descending on s, stable
        j = n
        while j > 0 and scores[j - 1] < s:
            scores[j] = scores[j - 1]
            out[j] = out[j - 1]
            j -= 1
        scores[j] = s
        out[j] = c
        n += 1
    return n


@njit(cache=True)
def natural_moves(p1, p2, out):
    mask = p1 | p2
    n = 0
    for c in range(7):
        if not mask & _TOP[c]:
            out[n] = c
            n += 1
    return n


@njit
def minimax_value(p1, p2, nmoves, depth, maximizing, alpha, beta, use_ab, use_mo, counter):
    """Fail-soft depth-limited minimax; ``counter[0]`` counts nodes entered."""
    counter[0] += 1
    if has_four(p1):
        return WIN_SCORE
    if has_four(p2):
        return -WIN_SCORE
    mask = p1 | p2
    if mask == _FULL:
        return 0
    if depth == 0:
        return feature_score(p1, p2) - feature_score(p2, p1)
    moves = np.empty(7, dtype=np.int64)
    if use_mo:
        n = ordered_moves(p1, p2, nmoves, maximizing, moves)
    else:
        n = natural_moves(p1, p2, moves)
    if maximizing:
        value = -INF_SCORE
        for i in range(n):
            piece = drop(mask, moves[i])
            v = minimax_value(p1 | piece, p2, nmoves + 1, depth - 1, False,
                              alpha, beta, use_ab, use_mo, counter)
            if v > value:
                value = v
            if use_ab:
                if value > alpha:
                    alpha = value
                if alpha >= beta:
                    break
        return value
    value = INF_SCORE
    for i in range(n):
        piece = drop(mask, moves[i])
        v = minimax_value(p1, p2 | piece, nmoves + 1, depth - 1, True,
                          alpha, beta, use_ab, use_mo, counter)
        if v < value:
            value = v
        if use_ab:
            if value < beta:
                beta = value
            if alpha >= beta:
                break
    return value


@njit
def root_search(p1, p2, nmoves, depth, maximizing, alpha, beta, use_ab, use_mo):
    """Search the root; returns (column, value, nodes).

    Ties go to the lowest column whatever order children are visited in.  With
    pruning, a child left of the current best is searched with its lower bound
    relaxed by one so that an equal value is still resolved exactly (payoffs
    are integers).
    """
    counter = np.zeros(1, dtype=np.int64)
    counter[0] = 1
    mask = p1 | p2
    moves = np.empty(7, dtype=np.int64)
    if use_mo:
        n = ordered_moves(p1, p2, nmoves, maximizing, moves)
    else:
        n = natural_moves(p1, p2, moves)
    best_col = -1
    best = 0
    for i in range(n):
        c = moves[i]
        piece = drop(mask, c)
        if maximizing:
            lo = alpha
            if best_col >= 0:
                lo = max(alpha, best - 1 if c < best_col else best)
            v = minimax_value(p1 | piece, p2, nmoves + 1, depth - 1, False,
                              lo, beta, use_ab, use_mo, counter)
            if best_col < 0 or v > best or (v == best and c < best_col):
                best, best_col = v, c
        else:
            hi = beta
            if best_col >= 0:
                hi = min(beta, best + 1 if c < best_col else best)
            v = minimax_value(p1, p2 | piece, nmoves + 1, depth - 1, True,
                              alpha, hi, use_ab, use_mo, counter)
            if best_col < 0 or v < best or (v == best and c < best_col):
                best, best_col = v, c
    return best_col, best, counter[0]


# --- pseudo-random stream (splitmix64), mirrored in connect4lab.rng ---------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def below(state, n):
    return np.int64(next_u64(state) % np.uint64(n))


@njit(cache=True)
def rollout(p1, p2, nmoves, state):
    """Uniform random play to the end of the game; returns the outcome code."""
    moves = np.empty(7, dtype=np.int64)
    while True:
        s = status(p1, p2)
        if s != ONGOING:
            return s
        mask = p1 | p2
        n = natural_moves(p1, p2, moves)
        piece = drop(mask, moves[below(state, n)])
        if nmoves % 2 == 0:
            p1 |= piece
        else:
            p2 |= piece
        nmoves += 1


@njit(cache=True)
def mcts_iterate(parent, first_child, n_child, move, mover, visits, value, size,
                 p1, p2, nmoves, iterations, cp, state):
    """Run ``iterations`` select/expand/simulate/backpropagate cycles.

    Tree storage is a set of parallel arrays; children of a node are stored
    contiguously in ascending column order.  ``size[0]`` is the node count and
    the arrays must have room for ``7 * iterations`` more nodes.
    """
    cols = np.empty(7, dtype=np.int64)
    for _ in range(iterations):
        node = 0
        b1 = p1
        b2 = p2
        nm = nmoves
        # selection
        while n_child[node] > 0:
            big_n = visits[node]
            best = -1
            best_u = -np.inf
            start = first_child[node]
            for k in range(start, start + n_child[node]):
                nj = visits[k]
                if nj == 0:
                    u = np.inf
                else:
                    u = value[k] / nj + 2.0 * cp * np.sqrt(2.0 * np.log(big_n) / nj)
                if u > best_u:
                    best_u = u
                    best = k
            node = best
            piece = drop(b1 | b2, move[node])
            if nm % 2 == 0:
                b1 |= piece
            else:
                b2 |= piece
            nm += 1
        # expansion (only leaves visited before)
        if visits[node] > 0 and status(b1, b2) == ONGOING:
            n = natural_moves(b1, b2, cols)
            start = size[0]
            first_child[node] = start
            n_child[node] = n
            who = 1 if nm % 2 == 0 else 2
            for i in range(n):
                k = start + i
                parent[k] = node
                first_child[k] = -1
                n_child[k] = 0
                move[k] = cols[i]
                mover[k] = who
                visits[k] = 0
                value[k] = 0.0
            size[0] = start + n
            node = start
            piece = drop(b1 | b2, move[node])
            if nm % 2 == 0:
                b1 |= piece
            else:
                b2 |= piece
            nm += 1
        # simulation
        result = rollout(b1, b2, nm, state)
        # backpropagation
        while node >= 0:
            visits[node] += 1
            if result == DRAW:
                value[node] += 0.5
            elif result == mover[node]:
                value[node] += 1.0
            node = parent[node]
