"""Maker-Breaker tournament, clique and orientation games with certificate arithmetic."""

from .game_core import Board, ExplicitFamily, GameState, Outcome, Player, Transcript, new_game, play_out
from .log2real import Log2Real
from .tournament import Digraph, Tournament, contains_copy

__all__ = [
    "Board",
    "Digraph",
    "ExplicitFamily",
    "GameState",
    "Log2Real",
    "Outcome",
    "Player",
    "Tournament",
    "Transcript",
    "contains_copy",
    "new_game",
    "play_out",
]
__version__ = "0.1.0"
