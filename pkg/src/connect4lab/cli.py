"""Command-line entry point.

    connect4lab [--config FILE] [--seed N] [--out DIR] [--threads N] [--no-timing] COMMAND ...

Commands: train, evaluate, duel, evolve, play, report.  Settings come from
built-in defaults, then the YAML config (top-level keys and the section named
after the command), then command-line flags, which always win.  Everything is
validated before any file is written.  Exit codes: 0 success, 1 configuration
error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, TextIO

import yaml

from .agents import AgentFactory, ConfigError, parse_label
from .arena import format_table, run_series, vs_controls_sweep, write_games_csv, write_summary_json
from .engine import Board, Outcome, PlayerId, apply_move, legal_moves, terminal_status
from .evolution import ELITE_ROSTER, TournamentConfig, read_trajectory_csv, run_tournaments
from .evolution import write_summary_json as write_tournament_json
from .evolution import write_trajectory_csv
from .qlearning import FormatError, TrainingSchedule, load_qtable, save_qtable, train
from .rng import derive

log = logging.getLogger("connect4lab")

DEFAULT_EVAL_ROSTER = ["Minimax-ABMO-2", "Minimax-ABMO-4", "MCTS-2000it", "MCTS-Decisive-2000it"]

DEFAULTS: dict[str, dict[str, Any]] = {
    "train": {"games": 10000, "expert_games": 2000, "expert_depth": 4, "gamma": 0.5,
              "epsilon0": 1.0, "epsilon_min": 0.05, "alpha0": 0.5, "alpha_min": 0.05,
              "label": None},
    "evaluate": {"agents": DEFAULT_EVAL_ROSTER, "games_per_control": 50},
    "duel": {"agent_a": None, "agent_b": None, "games": 100},
    "evolve": {"roster": list(ELITE_ROSTER), "runs": 1, "initial_count": 10,
               "max_generations": 5000, "window": 200, "tolerance": 3.0},
    "play": {"agent": "MCTS-Decisive-20000it", "human_side": "I"},
    "report": {},
}
GLOBAL_DEFAULTS = {"seed": 0, "out": "results", "threads": 1, "timing": True, "qtables": {}}


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    out: str = "results"
    threads: int = 1
    timing: bool = True
    qtables: dict[str, str] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def record(self) -> dict:
        """Settings stored in result files; paths are dropped so reruns elsewhere match."""
        d = self.to_dict()
        d.pop("out")
        d["qtables"] = {k: Path(v).name for k, v in sorted(self.qtables.items())}
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="YAML experiment config")
    p.add_argument("--seed", type=int, default=d, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--threads", type=int, default=d, help="worker processes for series")
    p.add_argument("--no-timing", dest="timing", action="store_const", const=False, default=d,
                   help="record 0 for move times so outputs are byte-reproducible")
    p.add_argument("--qtable", action="append", default=d, metavar="LABEL=PATH",
                   help="register a saved Q-table for a QLearning label")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="connect4lab", description="Connect-4 agent experiments")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _add_globals(p, suppress=True)
        return p

    p = command("train", "train a tabular Q-learning agent")
    p.add_argument("--games", type=int, help="games per seat")
    p.add_argument("--expert-games", type=int, help="games per seat against the Minimax expert")
    p.add_argument("--expert-depth", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon0", type=float)
    p.add_argument("--epsilon-min", type=float)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--label", help="agent label (default QLearning-<games>)")

    p = command("evaluate", "play each agent against the three controls")
    p.add_argument("--agents", nargs="+")
    p.add_argument("--games-per-control", type=int)

    p = command("duel", "head-to-head series between two agents")
    p.add_argument("agent_a", nargs="?")
    p.add_argument("agent_b", nargs="?")
    p.add_argument("--games", type=int)

    p = command("evolve", "run evolutionary tournaments")
    p.add_argument("--roster", nargs="+")
    p.add_argument("--runs", type=int)
    p.add_argument("--initial-count", type=int)
    p.add_argument("--max-generations", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--tolerance", type=float)

    p = command("play", "play against an agent in the terminal")
    p.add_argument("agent", nargs="?")
    p.add_argument("--human-side", choices=["I", "II", "1", "2"])

    command("report", "render figures for the results in --out")
    return parser


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad YAML in {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def resolve(argv: list[str] | None = None) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    file_cfg = _read_config(args.pop("config", None))
    section = file_cfg.get(command) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section {command!r} must be a mapping")

    glob = dict(GLOBAL_DEFAULTS)
    glob.update({k: v for k, v in file_cfg.items() if k in GLOBAL_DEFAULTS})
    cli_tables = args.pop("qtable", None)
    for key in ("seed", "out", "threads", "timing"):
        if args.get(key) is not None:
            glob[key] = args[key]
        args.pop(key, None)
    tables = dict(glob["qtables"] or {})
    for item in cli_tables or []:
        label, sep, path = item.partition("=")
        if not sep:
            raise ConfigError(f"--qtable expects LABEL=PATH, got {item!r}")
        tables[label.strip()] = path.strip()

    params = dict(DEFAULTS[command])
    unknown = set(section) - set(params)
    if unknown:
        raise ConfigError(f"unknown keys in config section {command!r}: {sorted(unknown)}")
    params.update(section)
    params.update({k: v for k, v in args.items() if v is not None})

    seed = glob["seed"]
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if not isinstance(glob["threads"], int) or glob["threads"] < 1:
        raise ConfigError("threads must be a positive integer")
    return ExperimentConfig(command, seed, str(glob["out"]), glob["threads"], bool(glob["timing"]),
                            {str(k): str(v) for k, v in tables.items()}, params)


def _factory(cfg: ExperimentConfig, labels: list[str]) -> AgentFactory:
    """Factory with a Q-table for every QLearning label, checked up front."""
    tables: dict[str, str] = {}
    for label in labels:
        spec = parse_label(label)
        if spec.family != "QLearning":
            continue
        path = cfg.qtables.get(spec.label) or cfg.qtables.get(label)
        if path is None:
            guess = Path(cfg.out) / f"{spec.label}.qtable"
            if not guess.exists():
                raise ConfigError(f"no Q-table for {spec.label}; pass --qtable {spec.label}=PATH")
            path = str(guess)
        try:
            load_qtable(path)
        except OSError as exc:
            raise ConfigError(f"cannot read Q-table {path}: {exc}") from None
        except FormatError as exc:
            raise ConfigError(str(exc)) from None
        tables[spec.label] = path
    return AgentFactory(tables)


def _even_games(n, what: str) -> int:
    if not isinstance(n, int) or n < 0 or n % 2:
        raise ConfigError(f"{what} must be a non-negative even integer, got {n!r}")
    return n


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_train(cfg: ExperimentConfig, stdout: TextIO) -> int:
    p = cfg.params
    try:
        schedule = TrainingSchedule(
            total_games=int(p["games"]), expert_games=min(int(p["expert_games"]), int(p["games"])),
            expert_depth=int(p["expert_depth"]), gamma=float(p["gamma"]),
            epsilon0=float(p["epsilon0"]), epsilon_min=float(p["epsilon_min"]),
            alpha0=float(p["alpha0"]), alpha_min=float(p["alpha_min"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad training schedule: {exc}") from None
    if not 1 <= schedule.expert_depth <= 42:
        raise ConfigError("expert_depth must be 1..42")
    label = p["label"] or f"QLearning-{schedule.total_games}"
    label = parse_label(label).label
    out = _out_dir(cfg)
    trained = train(schedule, rng=derive(cfg.seed, "train", label))
    table_path = out / f"{label}.qtable"
    save_qtable(trained.qtable, table_path)
    report = {
        "label": label,
        "seed": cfg.seed,
        "games_per_seat": schedule.total_games,
        "expert_games_per_seat": schedule.expert_games,
        "games_trained": trained.games_trained,
        "unique_states": trained.unique_states,
        "entries": len(trained.qtable),
        "final_epsilon": trained.final_epsilon,
        "final_alpha": trained.final_alpha,
        "schedule": asdict(schedule),
        "qtable": table_path.name,
    }
    (out / f"train_{label}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"{label}: {trained.unique_states} states, {len(trained.qtable)} entries -> {table_path}",
          file=stdout)
    return 0


def cmd_evaluate(cfg: ExperimentConfig, stdout: TextIO) -> int:
    agents = cfg.params["agents"]
    if isinstance(agents, str):
        agents = [agents]
    labels = [parse_label(a).label for a in agents]
    games = _even_games(cfg.params["games_per_control"], "games_per_control")
    factory = _factory(cfg, labels)
    out = _out_dir(cfg)
    results = vs_controls_sweep(labels, games, cfg.seed, factory, cfg.threads, cfg.timing)
    write_games_csv(out / "vs_controls_games.csv", results)
    write_summary_json(out / "vs_controls_summary.json", results, {"config": cfg.record()})
    print(format_table([r.report for r in results]), file=stdout)
    return 0


def cmd_duel(cfg: ExperimentConfig, stdout: TextIO) -> int:
    a, b = cfg.params["agent_a"], cfg.params["agent_b"]
    if not a or not b:
        raise ConfigError("duel needs two agent labels")
    a, b = parse_label(a).label, parse_label(b).label
    games = _even_games(cfg.params["games"], "games")
    factory = _factory(cfg, [a, b])
    out = _out_dir(cfg)
    result = run_series(a, b, games, cfg.seed, factory, cfg.threads, timing=cfg.timing)
    stem = f"duel_{a}_vs_{b}"
    write_games_csv(out / f"{stem}.csv", [result])
    write_summary_json(out / f"{stem}.json", [result], {"config": cfg.record()})
    print(format_table([result.report]), file=stdout)
    return 0


def cmd_evolve(cfg: ExperimentConfig, stdout: TextIO) -> int:
    p = cfg.params
    roster = p["roster"]
    if isinstance(roster, str):
        roster = [roster]
    labels = [parse_label(r).label for r in roster]
    if not labels:
        raise ConfigError("roster is empty")
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate species in roster: {labels}")
    try:
        tconf = TournamentConfig(int(p["initial_count"]), int(p["window"]), float(p["tolerance"]),
                                 int(p["max_generations"]))
        runs = int(p["runs"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad tournament config: {exc}") from None
    if runs < 1:
        raise ConfigError("runs must be at least 1")
    factory = _factory(cfg, labels)
    out = _out_dir(cfg)
    seeds = [cfg.seed + k for k in range(runs)]
    logs = run_tournaments(labels, seeds, tconf, factory, cfg.threads)
    for k, tlog in enumerate(logs):
        write_trajectory_csv(out / f"evolve_run{k}.csv", tlog)
        elim = ", ".join(f"{lab}@{g}" for lab, g in tlog.eliminations()) or "none"
        print(f"run {k} seed {tlog.seed}: {tlog.stop_reason} after {tlog.generations} generations; "
              f"leader {tlog.leader()}; eliminated {elim}", file=stdout)
    write_tournament_json(out / "evolve_summary.json", logs, {"config": cfg.record()})
    return 0


def _human_move(board: Board, stdin: TextIO, stdout: TextIO) -> int | None:
    legal = legal_moves(board)
    shown = ", ".join(str(c + 1) for c in legal)
    while True:
        stdout.write(f"your move [{shown}]: ")
        stdout.flush()
        line = stdin.readline()
        if not line:
            return None
        text = line.strip()
        if text.isdigit() and int(text) - 1 in legal:
            return int(text) - 1
        if text.isdigit() and 1 <= int(text) <= 7:
            print(f"column {text} is full; choose one of {shown}", file=stdout)
        else:
            print(f"enter a column number, one of {shown}", file=stdout)


def cmd_play(cfg: ExperimentConfig, stdout: TextIO, stdin: TextIO) -> int:
    label = cfg.params["agent"]
    side = {"I": PlayerId.I, "1": PlayerId.I, "II": PlayerId.II, "2": PlayerId.II}.get(
        str(cfg.params["human_side"]))
    if side is None:
        raise ConfigError("human_side must be I or II")
    label = parse_label(label).label
    agent = _factory(cfg, [label]).build(label)
    rng = derive(cfg.seed, "play")
    board = Board()
    print(f"You are {'X' if side is PlayerId.I else 'O'} (Player {side.name}) against {label}.",
          file=stdout)
    print(board.render(), file=stdout)
    while terminal_status(board) is Outcome.ONGOING:
        if board.to_move is side:
            col = _human_move(board, stdin, stdout)
            if col is None:
                print("\ninput closed; game abandoned", file=stdout)
                return 0
        else:
            col = agent.choose_move(board, rng)
            print(f"{label} plays {col + 1}", file=stdout)
        board = apply_move(board, col)
        print(board.render(), file=stdout)
    outcome = terminal_status(board)
    if outcome is Outcome.DRAW:
        print("Draw.", file=stdout)
    elif outcome.winner is side:
        print("You win.", file=stdout)
    else:
        print(f"{label} wins.", file=stdout)
    return 0


def cmd_report(cfg: ExperimentConfig, stdout: TextIO) -> int:
    from .plotting import plot_trajectory, plot_vs_controls

    out = Path(cfg.out)
    if not out.is_dir():
        raise ConfigError(f"no results directory {out}")
    made = []
    summary = out / "vs_controls_summary.json"
    if summary.exists():
        series = json.loads(summary.read_text())["series"]
        made.append(plot_vs_controls(series, out / "vs_controls.png"))
    for path in sorted(out.glob("evolve_run*.csv")):
        labels, snaps = read_trajectory_csv(path)
        made.append(plot_trajectory(labels, snaps, path.with_suffix(".png"),
                                    title=f"Population share ({path.stem})"))
    duels = []
    for path in sorted(out.glob("duel_*.json")):
        duels.extend(json.loads(path.read_text())["series"])
    if duels:
        for d in duels:
            if d["games"]:
                print(f"{d['agent_a']} vs {d['agent_b']}: {d['win_rate_a']:.1f}% / "
                      f"{d['win_rate_b']:.1f}% / draws {d['draw_rate']:.1f}% over {d['games']}",
                      file=stdout)
    if not made and not duels:
        raise ConfigError(f"nothing to report in {out}")
    for path in made:
        print(f"wrote {path}", file=stdout)
    return 0


COMMANDS: dict[str, Callable[..., int]] = {
    "train": cmd_train, "evaluate": cmd_evaluate, "duel": cmd_duel,
    "evolve": cmd_evolve, "report": cmd_report,
}


def main(argv: list[str] | None = None, stdout: TextIO | None = None, stdin: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stdin = stdin or sys.stdin
    try:
        cfg = resolve(argv)
        if cfg.command == "play":
            return cmd_play(cfg, stdout, stdin)
        return COMMANDS[cfg.command](cfg, stdout)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
