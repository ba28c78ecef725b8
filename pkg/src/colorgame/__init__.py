"""The Maker/Breaker vertex-coloring game on random and structured graphs."""

from .bounds import BoundsReport, ParameterSet, derive_parameters, theorem_bounds
from .engine import BREAKER, MAKER, GameOutcome, GameState, Move, Player, new_game, play_game
from .errors import CapacityError, IllegalMove, ParameterError, ParseError
from .graph import Graph, InstanceSpec, VertexSet, make_named, sample_bipartite_gnp, sample_gnp
from .solver import Solver, chromatic_number_exact, game_chromatic_exact, solve_position
from .strategies import make_strategy

__version__ = "0.1.0"
