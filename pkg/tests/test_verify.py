import numpy as np
import pytest

from oracle_games import (
    BimatrixGame,
    MixedStrategy,
    deviation_check,
    maximal_matrix,
    simulate,
    solve_oracle_game,
    sqrt_k,
)
from oracle_games.solver import OracleEquilibrium, _finish
from oracle_games.verify import SHARD


def profile(m, f, s_a, s_b, x):
    return _finish(m, maximal_matrix(m), f, MixedStrategy(s_a), MixedStrategy(s_b), x,
                   "interval_interior")


def test_example1_equilibrium_passes(games):
    m = games["example1"]
    eq = solve_oracle_game(m, sqrt_k(1))
    cert = deviation_check(m, maximal_matrix(m), sqrt_k(1), eq, epsilon=1e-6, x_grid=10_000)
    assert cert.passed
    assert max(cert.max_gain_a_strategy, cert.max_gain_a_payment, cert.max_gain_b) <= 1e-9


def test_perturbed_payment_fails(games):
    m = games["example1"]
    f = sqrt_k(1)
    cert = deviation_check(m, maximal_matrix(m), f, profile(m, f, [5 / 6, 1 / 6], [2 / 3, 1 / 3], 0.3))
    assert not cert.passed
    # I(0.3) lies past the node at 1/2, so B's switch is the largest gain here
    assert cert.worst_deviation == "B switches to B1"
    assert cert.max_gain_a_payment > 0.04


def test_perturbed_payment_with_consistent_silent_strategy(games):
    # with A's silent strategy re-derived at I(0.3) the best move is to pay less
    m = games["example1"]
    f = sqrt_k(1)
    cert = deviation_check(m, maximal_matrix(m), f, profile(m, f, [1, 0], [2 / 3, 1 / 3], 0.3))
    assert not cert.passed
    assert cert.worst_deviation.startswith("reduce payment")
    assert cert.max_gain_a_payment == max(cert.max_gain_a_payment, cert.max_gain_b,
                                          cert.max_gain_a_strategy)


def test_pure_equilibrium_at_zero_passes():
    g = BimatrixGame(np.array([[3.0, 2.0], [1.0, 0.0]]), np.array([[3.0, 1.0], [2.0, 0.0]]))
    eq = solve_oracle_game(g, sqrt_k(10))
    assert deviation_check(g, maximal_matrix(g), sqrt_k(10), eq).passed


def test_overpaying_is_detected(games):
    m = games["example1"]
    f = sqrt_k(1)
    cert = deviation_check(m, maximal_matrix(m), f, profile(m, f, [2 / 3, 1 / 3], [2 / 3, 1 / 3], 0.0))
    # with I'(0) infinite A gains from paying something
    assert not cert.passed and cert.worst_deviation.startswith("increase payment")


def test_certificate_dict(games):
    m = games["example1"]
    eq = solve_oracle_game(m, sqrt_k(1))
    d = deviation_check(m, maximal_matrix(m), sqrt_k(1), eq).as_dict()
    assert set(d) == {"max_gain_a_strategy", "max_gain_a_payment", "max_gain_b", "epsilon",
                      "passed", "worst_deviation"}


def test_simulate_reproducible(games):
    m = games["example2"]
    a = simulate(m, sqrt_k(1), [0.5, 0.3, 0.2], [0.4, 0.4, 0.2], 0.1, 50_000, seed=7)
    b = simulate(m, sqrt_k(1), [0.5, 0.3, 0.2], [0.4, 0.4, 0.2], 0.1, 50_000, seed=7)
    c = simulate(m, sqrt_k(1), [0.5, 0.3, 0.2], [0.4, 0.4, 0.2], 0.1, 50_000, seed=8)
    assert a == b and a != c


def test_simulate_independent_of_jobs(games):
    m = games["example1"]
    trials = SHARD + 1000
    one = simulate(m, sqrt_k(1), [0.5, 0.5], [0.5, 0.5], 0.2, trials, seed=3, jobs=1)
    two = simulate(m, sqrt_k(1), [0.5, 0.5], [0.5, 0.5], 0.2, trials, seed=3, jobs=2)
    assert one == two


def test_simulate_base_game(games):
    m = games["example1"]
    sim = simulate(m, sqrt_k(1), [2 / 3, 1 / 3], [2 / 3, 1 / 3], 0.0, 200_000, seed=1)
    assert sim.response_rate == 0.0
    assert abs(sim.mean_e_a - 2 / 3) <= 4 * sim.std_err_a


def test_simulate_degenerate_column(games):
    # B3 pays nothing to either player whatever A does
    m = games["harmful"]
    sim = simulate(m, sqrt_k(1), [0.3, 0.7], [0, 0, 1], 0.25, 10_000, seed=2)
    assert sim.mean_e_a == -0.25 and sim.mean_e_b == 0.0
    assert sim.std_err_a == 0.0


def test_simulate_response_rate(games):
    m = games["example1"]
    f = sqrt_k(1)
    sim = simulate(m, f, [5 / 6, 1 / 6], [2 / 3, 1 / 3], 1 / 9, 100_000, seed=4)
    p = 1 / 3
    assert abs(sim.response_rate - p) <= 5 * np.sqrt(p * (1 - p) / sim.trials)


def test_simulate_needs_trials(games):
    with pytest.raises(ValueError):
        simulate(games["example1"], sqrt_k(1), [1, 0], [1, 0], 0.0, 0, seed=0)


def test_equilibrium_record_fields(games):
    eq = solve_oracle_game(games["example1"], sqrt_k(1))
    assert isinstance(eq, OracleEquilibrium)
    d = eq.as_dict()
    assert d["case"] == "interval_interior" and d["x"] == pytest.approx(1 / 9)
