import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from oracle_games import (
    BimatrixGame,
    TooLarge,
    cross_section,
    dominance_status,
    game_values,
    maximal_matrix,
    pure_equilibria,
    solve_cross_section,
)
from oracle_games.nash import deviation_gains
from oracle_games.nodes import dominance_margins

from conftest import random_game


def support_enumeration(game):
    """Reference solver for generic games: equal-size supports, indifference systems."""
    a, b = game.a, game.b
    m, n = a.shape
    out = []
    for k in range(1, min(m, n) + 1):
        for sa in itertools.combinations(range(m), k):
            for sb in itertools.combinations(range(n), k):
                # q on sb makes A indifferent over sa; p on sa makes B indifferent over sb
                mq = np.vstack([np.hstack([a[np.ix_(sa, sb)], -np.ones((k, 1))]),
                                np.append(np.ones(k), 0.0)])
                mp = np.vstack([np.hstack([b[np.ix_(sa, sb)].T, -np.ones((k, 1))]),
                                np.append(np.ones(k), 0.0)])
                rhs = np.append(np.zeros(k), 1.0)
                try:
                    yq = np.linalg.solve(mq, rhs)
                    yp = np.linalg.solve(mp, rhs)
                except np.linalg.LinAlgError:
                    continue
                p, q = np.zeros(m), np.zeros(n)
                p[list(sa)], q[list(sb)] = yp[:k], yq[:k]
                if p.min() < -1e-12 or q.min() < -1e-12:
                    continue
                if max(deviation_gains(game, p, q)) <= 1e-9:
                    out.append((p, q))
    return out


def _matches(found, reference, tol=1e-7):
    return all(any(np.abs(p - s_a.probs).max() <= tol and np.abs(q - s_b.probs).max() <= tol
                   for s_a, s_b in found) for p, q in reference)


def test_example1_base_equilibrium(games):
    eqs = solve_cross_section(games["example1"])
    assert eqs.unique
    s_a, s_b = eqs[0]
    np.testing.assert_allclose(s_a.probs, [2 / 3, 1 / 3], atol=1e-9)
    np.testing.assert_allclose(s_b.probs, [2 / 3, 1 / 3], atol=1e-9)


def test_example1_cross_section_third(games):
    m = games["example1"]
    eqs = solve_cross_section(cross_section(m, maximal_matrix(m), 1 / 3))
    assert eqs.unique
    np.testing.assert_allclose(eqs[0][0].probs, [5 / 6, 1 / 6], atol=1e-9)
    np.testing.assert_allclose(eqs[0][1].probs, [2 / 3, 1 / 3], atol=1e-9)


def test_dominant_strategy_game():
    g = BimatrixGame(np.array([[3.0, 2.0], [1.0, 0.0]]), np.array([[3.0, 1.0], [2.0, 0.0]]))
    eqs = solve_cross_section(g)
    assert eqs.unique and eqs[0][0].allclose([1, 0]) and eqs[0][1].allclose([1, 0])
    assert pure_equilibria(g) == [(0, 0)]


def test_pure_equilibria_examples(games):
    assert pure_equilibria(games["example1"]) == []
    assert pure_equilibria(games["multiple"]) == []


def test_section6_has_three_equilibria(games):
    eqs = solve_cross_section(games["multiple"])
    assert len(eqs) == 3 and not eqs.unique
    supports = sorted(tuple(s_a.support()) for s_a, _ in eqs)
    assert supports == [(0, 1), (0, 1, 2, 3), (2, 3)]


def test_too_large():
    g = BimatrixGame(np.zeros((13, 2)), np.zeros((13, 2)))
    with pytest.raises(TooLarge):
        solve_cross_section(g)


def test_matches_support_enumeration_random():
    """500 generic 2x2 and 3x3 games: every reference equilibrium is found, all pass."""
    rng = np.random.default_rng(41)
    for t in range(500):
        size = 2 + t % 2
        g = random_game(rng, "general", (size, size))
        found = solve_cross_section(g)
        for s_a, s_b in found:
            assert max(deviation_gains(g, s_a.probs, s_b.probs)) <= 1e-6
        ref = support_enumeration(g)
        assert len(found) == len(ref)
        assert _matches(found, ref)


def test_every_profile_passes_best_response_check():
    rng = np.random.default_rng(42)
    for t in range(100):
        g = random_game(rng, ("zero_sum", "general")[t % 2])
        for s_a, s_b in solve_cross_section(g):
            ua = g.a @ s_b.probs
            ub = s_a.probs @ g.b
            top_a, top_b = ua.max(), ub.max()
            assert np.all(np.abs(ua[list(s_a.support())] - top_a) <= 1e-9)
            assert np.all(np.abs(ub[list(s_b.support())] - top_b) <= 1e-9)


def test_degenerate_cross_section_returns_extreme_points(games):
    # at I = 1/2 in the harmful game A is indifferent against B3
    m = games["harmful"]
    eqs = solve_cross_section(cross_section(m, maximal_matrix(m), 0.5))
    assert len(eqs) >= 2
    for s_a, s_b in eqs:
        assert s_b.allclose([0, 0, 1])


def test_game_values_match_linprog():
    rng = np.random.default_rng(43)
    mats = rng.normal(size=(40, 3, 4))
    vals, _ = game_values(mats)
    for g, v in zip(mats, vals):
        p, q = g.shape
        # maximise t subject to sigma^T g >= t, sigma in simplex
        res = linprog(np.append(np.zeros(p), -1.0),
                      A_ub=np.hstack([-g.T, np.ones((q, 1))]), b_ub=np.zeros(q),
                      A_eq=np.append(np.ones(p), 0.0)[None], b_eq=[1.0],
                      bounds=[(0, None)] * p + [(None, None)], method="highs")
        assert v == pytest.approx(-res.fun, abs=1e-9)


def test_dominance_example2_b3(games):
    m = games["example2"]
    rep = dominance_status(cross_section(m, maximal_matrix(m), 0.25), "B", 2, "weak")
    assert rep.dominated
    w = rep.witness.probs
    assert w[2] == 0 and w[0] > 0 and w[1] > 0


def test_dominance_example2_boundary_is_weak(games):
    m = games["example2"]
    rep = dominance_status(cross_section(m, maximal_matrix(m), 0.2), "B", 2, "weak")
    assert rep.status == "weakly_dominated"
    assert dominance_status(cross_section(m, maximal_matrix(m), 0.2), "B", 2, "strict").status \
        == "undominated"


def test_dominance_example1(games):
    m = games["example1"]
    for j in (0, 1):
        assert dominance_status(m, "B", j).status == "undominated"
    rep = dominance_status(cross_section(m, maximal_matrix(m), 0.6), "B", 1, "strict")
    assert rep.status == "strictly_dominated"
    assert rep.witness.allclose([1, 0])
    assert rep.margin == pytest.approx(0.2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["A", "B"]))
def test_strict_implies_weak(seed, player):
    rng = np.random.default_rng(seed)
    g = random_game(rng, "general")
    # integer payoffs make ties and weak dominance common
    g = BimatrixGame(np.round(g.a), np.round(g.b))
    size = g.rows if player == "A" else g.cols
    for j in range(size):
        strict = dominance_status(g, player, j, "strict")
        weak = dominance_status(g, player, j, "weak")
        if strict.dominated:
            assert weak.dominated
        if weak.dominated:
            pay = (g.a if player == "A" else g.b.T)
            gaps = weak.witness.probs @ pay - pay[j]
            assert gaps.min() >= -1e-9


def test_pure_dominance_persists_in_zero_sum_games():
    """A strategy dominated by a pure strategy in M stays dominated in every cross-section."""
    rng = np.random.default_rng(44)
    grid = np.linspace(0, 1, 101)
    checked = 0
    for _ in range(300):
        m = random_game(rng, "zero_sum")
        r = maximal_matrix(m)
        for j in range(m.cols):
            if not any(np.all(m.b[:, d] >= m.b[:, j]) for d in range(m.cols) if d != j):
                continue
            checked += 1
            assert dominance_margins(m, r, j, grid).min() >= -1e-12
            assert dominance_status(cross_section(m, r, 0.5), "B", j, "weak").dominated
    assert checked > 50


def test_mixed_dominance_can_be_lost_in_zero_sum_game():
    # B2 is dominated by an even mix of B1 and B3 at I = 0 but undominated at I = 1
    m = BimatrixGame.zero_sum(np.array([[0.693, 0.029, -0.914], [-0.616, 0.124, 0.483]]))
    r = maximal_matrix(m)
    assert dominance_status(m, "B", 1, "strict").status == "strictly_dominated"
    assert not any(np.all(m.b[:, d] >= m.b[:, 1]) for d in (0, 2))
    assert dominance_status(r, "B", 1, "weak").status == "undominated"
