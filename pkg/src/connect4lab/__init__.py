"""Connect-4 agents (Q-learning, Minimax, MCTS), evaluation harness and evolutionary tournament."""
from .agents import AgentFactory, AgentSpec, ConfigError, parse_label
from .arena import MatchRecord, SeriesReport, play_game, run_series, vs_controls_sweep
from .engine import Board, IllegalMove, NoLegalMoves, Outcome, PlayerId, apply_move, legal_moves, terminal_status
from .evolution import Population, TournamentConfig, run_tournament
from .mcts import MctsAgent, MctsConfig
from .minimax import MinimaxAgent, SearchConfig, alphabeta_search, minimax_search
from .qlearning import QAgent, QTable, TrainingSchedule, train

__all__ = [
    "AgentFactory", "AgentSpec", "Board", "ConfigError", "IllegalMove", "MatchRecord", "MctsAgent",
    "MctsConfig", "MinimaxAgent", "NoLegalMoves", "Outcome", "PlayerId", "Population", "QAgent",
    "QTable", "SearchConfig", "SeriesReport", "TournamentConfig", "TrainingSchedule",
    "alphabeta_search", "apply_move", "legal_moves", "minimax_search", "parse_label", "play_game",
    "run_series", "run_tournament", "terminal_status", "train", "vs_controls_sweep",
]
__version__ = "0.1.0"
