"""Evolutionary tournament: species counts change by one per game.

Each generation two individuals are drawn from the pool, play one game, and
the winner's species gains an individual while the loser's loses one.  A
species whose count reaches zero is eliminated and never drawn again.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .agents import AgentFactory, AgentSpec, ConfigError, parse_label
from .arena import play_game
from .engine import Outcome
from .rng import derive, draw_seed

CSV_FIELDS = ["generation", "species_label", "count", "share_pct", "event", "eliminated_flag"]

ELITE_ROSTER = ("MCTS-Decisive-20000it", "Minimax-ABMO-4", "QLearning-10k",
                "Random", "Supervised", "Heuristic")


class TournamentOver(Exception):
    """Fewer than two species are left to play."""


@dataclass
class Species:
    spec: AgentSpec
    count: int = 10
    eliminated_at: int | None = None

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def alive(self) -> bool:
        return self.count > 0


@dataclass
class Population:
    species: list[Species]
    generation: int = 0

    @classmethod
    def initial(cls, roster: Sequence[AgentSpec | str], count: int = 10) -> "Population":
        specs = [parse_label(s) if isinstance(s, str) else s for s in roster]
        labels = [s.label for s in specs]
        if not specs:
            raise ConfigError("roster is empty")
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate species in roster: {labels}")
        if count < 1:
            raise ConfigError("initial count must be at least 1")
        return cls([Species(s, count) for s in specs])

    @property
    def total(self) -> int:
        return sum(s.count for s in self.species)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.species]

    def counts(self) -> tuple[int, ...]:
        return tuple(s.count for s in self.species)

    def shares(self) -> tuple[float, ...]:
        total = self.total
        return tuple(100.0 * s.count / total for s in self.species)

    def survivors(self) -> list[int]:
        return [i for i, s in enumerate(self.species) if s.alive]


@dataclass(frozen=True)
class GenerationEvent:
    generation: int
    species_a: int
    species_b: int
    player_i: int
    outcome: Outcome
    counts_after: tuple[int, ...]
    eliminations: tuple[int, ...] = ()

    @property
    def winner(self) -> int | None:
        w = self.outcome.winner
        if w is None:
            return None
        player_ii = self.species_b if self.player_i == self.species_a else self.species_a
        return self.player_i if w.value == 1 else player_ii

    @property
    def loser(self) -> int | None:
        w = self.winner
        if w is None:
            return None
        return self.species_b if w == self.species_a else self.species_a


def _pick(counts: Sequence[int], u: int) -> int:
    for i, c in enumerate(counts):
        if u < c:
            return i
        u -= c
    raise AssertionError("draw outside the pool")


def select_pair(pop: Population, rng: np.random.Generator) -> tuple[int, int]:
    """Indices of two distinct species, drawn by individual.

    The first individual is uniform over the whole pool.  The second is drawn
    from the remaining individuals, redrawing whenever it shares the first's
    species, so it ends up uniform over the other species' individuals.
    """
    if len(pop.survivors()) < 2:
        raise TournamentOver("fewer than two species survive")
    counts = list(pop.counts())
    first = _pick(counts, int(rng.integers(sum(counts))))
    counts[first] -= 1
    while True:
        second = _pick(counts, int(rng.integers(sum(counts))))
        if second != first:
            return first, second


GameFn = Callable[[AgentSpec, AgentSpec, np.random.Generator], Outcome]


def apply_outcome(counts: Sequence[int], event: GenerationEvent) -> tuple[int, ...]:
    """Counts after ``event`` given the counts before it."""
    out = list(counts)
    if event.winner is not None:
        out[event.winner] += 1
        out[event.loser] -= 1
    return tuple(out)


def step_generation(pop: Population, rng: np.random.Generator, game: GameFn) -> GenerationEvent:
    a, b = select_pair(pop, rng)
    player_i = a if rng.random() < 0.5 else b
    player_ii = b if player_i == a else a
    game_rng = np.random.default_rng(draw_seed(rng))
    outcome = game(pop.species[player_i].spec, pop.species[player_ii].spec, game_rng)
    pop.generation += 1
    eliminated = []
    w = outcome.winner
    if w is not None:
        winner, loser = (player_i, player_ii) if w.value == 1 else (player_ii, player_i)
        pop.species[winner].count += 1
        pop.species[loser].count -= 1
        if pop.species[loser].count == 0:
            pop.species[loser].eliminated_at = pop.generation
            eliminated.append(loser)
    return GenerationEvent(pop.generation, a, b, player_i, outcome, pop.counts(), tuple(eliminated))


def detect_stability(trajectory: Sequence[Sequence[float]], window: int, tolerance: float) -> bool:
    """True when the trailing ``window`` rows of shares have settled.

    Every species alive at the end must stay within ``tolerance`` of its
    window mean, and no species may be eliminated inside the window.
    """
    if window < 1 or len(trajectory) < window:
        return False
    rows = np.asarray(trajectory[-window:], dtype=float)
    for col in rows.T:
        if col[-1] <= 0.0:
            if col[0] > 0.0:
                return False
            continue
        if np.max(np.abs(col - col.mean())) > tolerance:
            return False
    return True


@dataclass(frozen=True)
class TournamentConfig:
    initial_count: int = 10
    window: int = 200
    tolerance: float = 3.0
    max_generations: int = 5000

    def __post_init__(self):
        if self.initial_count < 1:
            raise ConfigError("initial_count must be at least 1")
        if self.window < 1 or self.tolerance < 0:
            raise ConfigError("window must be >= 1 and tolerance >= 0")
        if self.max_generations < 0:
            raise ConfigError("max_generations must be >= 0")


@dataclass
class TournamentLog:
    labels: list[str]
    initial_counts: tuple[int, ...]
    events: list[GenerationEvent] = field(default_factory=list)
    stop_reason: str = ""
    seed: int | None = None

    @property
    def generations(self) -> int:
        return len(self.events)

    def snapshots(self) -> list[tuple[int, ...]]:
        """Counts at generation 0, 1, ... recomputed from the event log."""
        out = [tuple(self.initial_counts)]
        for ev in self.events:
            out.append(apply_outcome(out[-1], ev))
        return out

    def final_counts(self) -> tuple[int, ...]:
        return self.events[-1].counts_after if self.events else tuple(self.initial_counts)

    def final_shares(self) -> dict[str, float]:
        counts = self.final_counts()
        total = sum(counts)
        return {lab: 100.0 * c / total for lab, c in zip(self.labels, counts)}

    def eliminations(self) -> list[tuple[str, int]]:
        return [(self.labels[i], ev.generation) for ev in self.events for i in ev.eliminations]

    def leader(self) -> str:
        counts = self.final_counts()
        return self.labels[max(range(len(counts)), key=lambda i: (counts[i], -i))]

    def dominant(self) -> str | None:
        """Label of the species holding every individual, if any."""
        counts = self.final_counts()
        alive = [i for i, c in enumerate(counts) if c]
        return self.labels[alive[0]] if len(alive) == 1 else None

    def rows(self) -> list[list]:
        rows = []
        snaps = [tuple(self.initial_counts)] + [ev.counts_after for ev in self.events]
        total = sum(self.initial_counts)
        for g, counts in enumerate(snaps):
            ev = self.events[g - 1] if g else None
            for i, lab in enumerate(self.labels):
                tag = "none"
                if ev is not None and i in (ev.species_a, ev.species_b):
                    tag = "draw" if ev.winner is None else ("win" if ev.winner == i else "loss")
                rows.append([g, lab, counts[i], f"{100.0 * counts[i] / total:.4f}", tag,
                             int(counts[i] == 0)])
        return rows

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "roster": self.labels,
            "initial_counts": list(self.initial_counts),
            "generations": self.generations,
            "stop_reason": self.stop_reason,
            "eliminations": [{"species": lab, "generation": g} for lab, g in self.eliminations()],
            "final_counts": dict(zip(self.labels, self.final_counts())),
            "final_shares_pct": {k: round(v, 4) for k, v in self.final_shares().items()},
            "dominant": self.dominant(),
        }


def arena_game(factory: AgentFactory, timing: bool = False) -> GameFn:
    """Game function backed by :func:`connect4lab.arena.play_game`."""
    cache: dict = {}

    def game(first: AgentSpec, second: AgentSpec, rng: np.random.Generator) -> Outcome:
        for spec in (first, second):
            if spec.label not in cache:
                cache[spec.label] = factory.build(spec)
        return play_game(cache[first.label], cache[second.label], rng, timing=timing).outcome

    return game


def run_tournament(roster: Sequence[AgentSpec | str], config: TournamentConfig = TournamentConfig(),
                   seed: int = 0, factory: AgentFactory | None = None,
                   game: GameFn | None = None) -> TournamentLog:
    """Play generations until one species remains, shares settle, or the cap is hit."""
    pop = Population.initial(roster, config.initial_count)
    factory = factory or AgentFactory()
    for sp in pop.species:
        factory.check(sp.spec)
    game = game or arena_game(factory)
    rng = derive(seed, "tournament")
    log = TournamentLog(pop.labels, pop.counts(), seed=seed)
    shares = [pop.shares()]
    while True:
        if len(pop.survivors()) < 2:
            log.stop_reason = "dominance"
            break
        if pop.generation >= config.max_generations:
            log.stop_reason = "max_generations"
            break
        if detect_stability(shares, config.window, config.tolerance):
            log.stop_reason = "stable"
            break
        log.events.append(step_generation(pop, rng, game))
        shares.append(pop.shares())
    return log


def _tournament_job(args) -> TournamentLog:
    roster, config, seed, factory = args
    return run_tournament(roster, config, seed, factory)


def run_tournaments(roster: Sequence[AgentSpec | str], seeds: Sequence[int],
                    config: TournamentConfig = TournamentConfig(),
                    factory: AgentFactory | None = None, threads: int = 1) -> list[TournamentLog]:
    """Independent tournaments, one per seed, optionally in worker processes."""
    specs = [parse_label(s) if isinstance(s, str) else s for s in roster]
    factory = factory or AgentFactory()
    for s in specs:
        factory.check(s)
    jobs = [(specs, config, s, factory) for s in seeds]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_tournament_job, jobs))
    return [_tournament_job(j) for j in jobs]


def write_trajectory_csv(path: str | Path, log: TournamentLog) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        w.writerows(log.rows())


def read_trajectory_csv(path: str | Path) -> tuple[list[str], list[tuple[int, ...]]]:
    """Species labels and per-generation counts from a trajectory file."""
    labels: list[str] = []
    by_gen: dict[int, list[int]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            g = int(row["generation"])
            if g == 0:
                labels.append(row["species_label"])
            by_gen.setdefault(g, []).append(int(row["count"]))
    return labels, [tuple(by_gen[g]) for g in sorted(by_gen)]


def write_summary_json(path: str | Path, logs: Sequence[TournamentLog], extra: dict | None = None) -> None:
    payload = dict(extra or {})
    payload["runs"] = [log.summary() for log in logs]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
