"""Two-player games in which one player can pay an oracle for the other's move."""
from .errors import *  # noqa: F401,F403
from .game import (
    BimatrixGame,
    BestResponseMap,
    MixedStrategy,
    PayoffPair,
    best_response_indices,
    cross_section,
    expected_payoffs,
    full_payoff,
    information_value,
    maximal_matrix,
    response_payoff,
    value_of_information,
)
from .nash import dominance_status, game_values, pure_equilibria, solve_cross_section
from .nodes import IntervalAnalysis, NodeEvent, find_nodes, interval_profile
from .oracle import (
    NormalizationReport,
    OracleFunction,
    concavify,
    constant_c,
    linear_slope,
    monotone_envelope,
    normalize,
    piecewise_linear,
    shift_to_zero,
    sqrt_k,
    sqrt_shift,
)
from .solver import (
    OracleEquilibrium,
    harmful_info_profile,
    node_mixture,
    solve_multi,
    solve_oracle_game,
)
from .verify import DeviationCertificate, SimulationResult, deviation_check, simulate

__version__ = "0.1.0"
