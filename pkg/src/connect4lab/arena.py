"""Game execution, head-to-head series and sweeps against the control agents.

Every game draws from its own generator derived from ``(seed, series_id,
game_idx)``, so a series gives the same aggregate whether it runs serially
or across worker processes.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agents import Agent, AgentFactory, AgentSpec, ConfigError, parse_label
from .controls import ControlKind
from .engine import Board, IllegalMove, Outcome, PlayerId, apply_move, legal_moves, terminal_status
from .rng import derive

CONTROLS = tuple(k.value for k in ControlKind)

GAME_FIELDS = ["series_id", "game_idx", "playerI_label", "playerII_label", "outcome", "plies",
               "meanMoveTimeI_s", "meanMoveTimeII_s", "seed"]


@dataclass
class MatchRecord:
    player_i: str
    player_ii: str
    outcome: Outcome
    moves: list[int] = field(default_factory=list)
    move_seconds: list[float] = field(default_factory=list)
    seed: int | None = None
    game_idx: int = 0
    forfeit: PlayerId | None = None

    @property
    def plies(self) -> int:
        return len(self.moves)

    def mean_move_time(self, player: PlayerId) -> float:
        start = 0 if player is PlayerId.I else 1
        times = self.move_seconds[start::2]
        return sum(times) / len(times) if times else 0.0

    def replay(self) -> Outcome:
        """Outcome obtained by re-applying the move log."""
        board = Board()
        for col in self.moves:
            board = apply_move(board, col)
        if self.forfeit is not None:
            return Outcome.win_for(self.forfeit.other)
        return terminal_status(board)


def play_game(a: Agent, b: Agent, rng: np.random.Generator, seed: int | None = None,
              timing: bool = True) -> MatchRecord:
    """Play one game with ``a`` as PlayerI.

    An illegal move ends the game as a loss for the side that made it and is
    flagged on the record.
    """
    record = MatchRecord(a.label, b.label, Outcome.ONGOING, seed=seed)
    board = Board()
    agents = {PlayerId.I: a, PlayerId.II: b}
    while True:
        player = board.to_move
        t0 = time.perf_counter()
        col = agents[player].choose_move(board, rng)
        elapsed = time.perf_counter() - t0 if timing else 0.0
        if col not in legal_moves(board):
            record.forfeit = player
            record.outcome = Outcome.win_for(player.other)
            return record
        board = apply_move(board, col)
        record.moves.append(int(col))
        record.move_seconds.append(elapsed)
        outcome = terminal_status(board)
        if outcome is not Outcome.ONGOING:
            record.outcome = outcome
            return record


@dataclass
class SeriesReport:
    series_id: str
    agent_a: str
    agent_b: str
    games: int
    wins_a: int
    wins_b: int
    draws: int
    forfeits: int
    win_rate_a: float | None
    win_rate_b: float | None
    draw_rate: float | None
    mean_move_time_a: float | None
    mean_move_time_b: float | None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SeriesResult:
    report: SeriesReport
    records: list[MatchRecord]


def _seat_labels(a: AgentSpec, b: AgentSpec, idx: int, games: int) -> tuple[AgentSpec, AgentSpec]:
    return (a, b) if idx < games // 2 else (b, a)


def _play_indexed(factory: AgentFactory, a: AgentSpec, b: AgentSpec, games: int, seed: int,
                  series_id: str, idx: int, timing: bool, cache: dict | None = None) -> MatchRecord:
    first, second = _seat_labels(a, b, idx, games)
    if cache is None:
        cache = {}
    for spec in (first, second):
        if spec.label not in cache:
            cache[spec.label] = factory.build(spec)
    rec = play_game(cache[first.label], cache[second.label], derive(seed, series_id, idx),
                    seed=seed, timing=timing)
    rec.game_idx = idx
    return rec


_WORKER_FACTORY: AgentFactory | None = None


def _init_worker(factory: AgentFactory) -> None:
    global _WORKER_FACTORY
    _WORKER_FACTORY = factory


def _worker_game(args) -> MatchRecord:
    a, b, games, seed, series_id, idx, timing = args
    return _play_indexed(_WORKER_FACTORY, a, b, games, seed, series_id, idx, timing)


def summarize(series_id: str, a: str, b: str, records: Sequence[MatchRecord]) -> SeriesReport:
    games = len(records)
    wins_a = wins_b = draws = forfeits = 0
    times_a: list[float] = []
    times_b: list[float] = []
    for rec in records:
        a_seat = PlayerId.I if rec.game_idx < games // 2 else PlayerId.II
        forfeits += rec.forfeit is not None
        winner = rec.outcome.winner
        if winner is None:
            draws += 1
        elif winner is a_seat:
            wins_a += 1
        else:
            wins_b += 1
        start_a = 0 if a_seat is PlayerId.I else 1
        times_a.extend(rec.move_seconds[start_a::2])
        times_b.extend(rec.move_seconds[1 - start_a::2])

    def pct(n):
        return 100.0 * n / games if games else None

    return SeriesReport(
        series_id, a, b, games, wins_a, wins_b, draws, forfeits,
        pct(wins_a), pct(wins_b), pct(draws),
        sum(times_a) / len(times_a) if times_a else None,
        sum(times_b) / len(times_b) if times_b else None,
    )


def run_series(a: AgentSpec | str, b: AgentSpec | str, games: int, seed: int,
               factory: AgentFactory | None = None, threads: int = 1,
               series_id: str | None = None, timing: bool = True) -> SeriesResult:
    """Play ``games`` games, half with each agent moving first."""
    a = parse_label(a) if isinstance(a, str) else a
    b = parse_label(b) if isinstance(b, str) else b
    if games < 0 or games % 2:
        raise ConfigError(f"games must be a non-negative even number, got {games}")
    factory = factory or AgentFactory()
    factory.check(a)
    factory.check(b)
    series_id = series_id or f"{a.label}_vs_{b.label}"
    if threads > 1 and games > 1:
        tasks = [(a, b, games, seed, series_id, i, timing) for i in range(games)]
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(factory,)) as pool:
            records = list(pool.map(_worker_game, tasks))
    else:
        cache: dict = {}
        records = [_play_indexed(factory, a, b, games, seed, series_id, i, timing, cache)
                   for i in range(games)]
    return SeriesResult(summarize(series_id, a.label, b.label, records), records)


def vs_controls_sweep(specs: Iterable[AgentSpec | str], games_per_control: int = 50, seed: int = 0,
                      factory: AgentFactory | None = None, threads: int = 1,
                      timing: bool = True) -> list[SeriesResult]:
    factory = factory or AgentFactory()
    specs = [parse_label(s) if isinstance(s, str) else s for s in specs]
    for s in specs:
        factory.check(s)
    results = []
    for spec in specs:
        for control in CONTROLS:
            results.append(run_series(spec, control, games_per_control, seed, factory, threads,
                                      timing=timing))
    return results


def format_table(reports: Sequence[SeriesReport]) -> str:
    head = f"{'agent':<24}{'vs':<24}{'games':>6}{'win%':>8}{'loss%':>8}{'draw%':>8}{'move s':>10}"
    lines = [head, "-" * len(head)]
    for r in reports:
        if not r.games:
            lines.append(f"{r.agent_a:<24}{r.agent_b:<24}{0:>6}{'n/a':>8}{'n/a':>8}{'n/a':>8}{'n/a':>10}")
            continue
        lines.append(f"{r.agent_a:<24}{r.agent_b:<24}{r.games:>6}{r.win_rate_a:>8.1f}"
                     f"{r.win_rate_b:>8.1f}{r.draw_rate:>8.1f}{r.mean_move_time_a:>10.4f}")
    return "\n".join(lines)


def write_games_csv(path: str | Path, results: Iterable[SeriesResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAME_FIELDS)
        for res in results:
            for rec in res.records:
                w.writerow([res.report.series_id, rec.game_idx, rec.player_i, rec.player_ii,
                            rec.outcome.name, rec.plies, f"{rec.mean_move_time(PlayerId.I):.6f}",
                            f"{rec.mean_move_time(PlayerId.II):.6f}", rec.seed])


def write_summary_json(path: str | Path, results: Iterable[SeriesResult], extra: dict | None = None) -> None:
    payload = dict(extra or {})
    payload["series"] = [res.report.as_dict() for res in results]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
