"""Agent specifications, label parsing and construction.

Labels follow ``<Family>[-<Enhancements>][-<Experience>]``::

    Random  Supervised  Heuristic
    Minimax-4  Minimax-AB-4  Minimax-MO-4  Minimax-ABMO-6
    MCTS-2  MCTS-Decisive-5         (seconds per move)
    MCTS-2000it  MCTS-Decisive-20000it   (iterations per move)
    QLearning-10k  QLearning-2500    (games trained per seat)
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .controls import ControlAgent, ControlKind
from .engine import Board
from .mcts import MctsAgent, MctsConfig
from .minimax import MinimaxAgent, SearchConfig
from .qlearning import QAgent, QTable, load_qtable


class ConfigError(ValueError):
    """Bad agent label or experiment configuration."""


class Agent(Protocol):
    label: str

    def choose_move(self, board: Board, rng: np.random.Generator) -> int: ...


FAMILIES = ("QLearning", "Minimax", "MCTS", "Control")


@dataclass(frozen=True)
class AgentSpec:
    family: str
    enhancements: tuple[str, ...] = ()
    experience: float | int | None = None
    unit: str | None = None
    control: str | None = None

    @property
    def label(self) -> str:
        if self.family == "Control":
            return self.control
        if self.family == "Minimax":
            tag = "".join(e for e in ("AB", "MO") if e in self.enhancements)
            return f"Minimax-{tag}-{self.experience}" if tag else f"Minimax-{self.experience}"
        if self.family == "MCTS":
            prefix = "MCTS-Decisive" if "Decisive" in self.enhancements else "MCTS"
            if self.unit == "iterations":
                return f"{prefix}-{self.experience}it"
            return f"{prefix}-{self.experience:g}"
        games = int(self.experience)
        exp = f"{games // 1000}k" if games >= 1000 and games % 1000 == 0 else str(games)
        return f"QLearning-{exp}"

    def __str__(self) -> str:
        return self.label


_MINIMAX = re.compile(r"^Minimax(?:-(AB|MO|ABMO))?-(\d+)$")
_MCTS = re.compile(r"^MCTS(-Decisive)?-(\d+(?:\.\d+)?)(it|s)?$")
_QLEARN = re.compile(r"^Q-?Learning-(\d+)(k?)$")


def parse_label(label: str) -> AgentSpec:
    text = label.strip()
    for kind in ControlKind:
        if text == kind.value:
            return AgentSpec("Control", control=kind.value)
    if m := _MINIMAX.match(text):
        enh = {"AB": ("AB",), "MO": ("MO",), "ABMO": ("AB", "MO")}.get(m.group(1), ())
        depth = int(m.group(2))
        if not 1 <= depth <= 42:
            raise ConfigError(f"{label}: depth must be 1..42")
        return AgentSpec("Minimax", enh, depth, "depth")
    if m := _MCTS.match(text):
        enh = ("Decisive",) if m.group(1) else ()
        if m.group(3) == "it":
            return AgentSpec("MCTS", enh, int(float(m.group(2))), "iterations")
        seconds = float(m.group(2))
        return AgentSpec("MCTS", enh, int(seconds) if seconds.is_integer() else seconds, "seconds")
    if m := _QLEARN.match(text):
        games = int(m.group(1)) * (1000 if m.group(2) else 1)
        return AgentSpec("QLearning", (), games, "games")
    raise ConfigError(f"unknown agent label {label!r}")


class AgentFactory:
    """Builds agents from specs; Q-learning agents need a registered table.

    ``qtables`` maps a label to a :class:`QTable` or a path to a saved one.
    Instances are picklable when every table is given as a path.
    """

    def __init__(self, qtables: dict[str, QTable | str | Path] | None = None, q_unseen: str = "random"):
        self.qtables = dict(qtables or {})
        self.q_unseen = q_unseen
        self._loaded: dict[str, QTable] = {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_loaded"] = {}
        return state

    def check(self, spec: AgentSpec) -> None:
        if spec.family == "QLearning" and spec.label not in self.qtables:
            raise ConfigError(f"no Q-table registered for {spec.label}")

    def _table(self, label: str) -> QTable:
        if label not in self._loaded:
            src = self.qtables[label]
            self._loaded[label] = src if isinstance(src, QTable) else load_qtable(src)
        return self._loaded[label]

    def build(self, spec: AgentSpec | str) -> Agent:
        if isinstance(spec, str):
            spec = parse_label(spec)
        self.check(spec)
        if spec.family == "Control":
            return ControlAgent(spec.control)
        if spec.family == "Minimax":
            return MinimaxAgent(SearchConfig(spec.experience, "AB" in spec.enhancements,
                                             "MO" in spec.enhancements), spec.label)
        if spec.family == "MCTS":
            decisive = "Decisive" in spec.enhancements
            if spec.unit == "iterations":
                cfg = MctsConfig(max_iterations=int(spec.experience), decisive=decisive)
            else:
                cfg = MctsConfig(max_time=float(spec.experience), decisive=decisive)
            return MctsAgent(cfg, spec.label)
        return QAgent(self._table(spec.label), spec.label, self.q_unseen)
