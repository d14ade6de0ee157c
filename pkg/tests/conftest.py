"""Shared fixtures, the random-game pool, and the acceptance report."""
from __future__ import annotations

import functools
from pathlib import Path

import numpy as np
import pytest

import oracle_games
from oracle_games import cli, solver, sweep
from oracle_games.io import read_game, read_oracle

DATA = Path(__file__).resolve().parent.parent / "data"

# Every equilibrium returned by the solver during the session, so the
# closure test can run deviation_check on all of them at the end.
EMITTED: list = []
ACCEPTANCE: list[tuple[str, bool, str]] = []


def _recording(fn):
    @functools.wraps(fn)
    def wrapper(m, f, *args, **kwargs):
        eq = fn(m, f, *args, **kwargs)
        EMITTED.append((m, f, eq))
        return eq
    return wrapper


_solve = _recording(solver.solve_oracle_game)
for _mod in (solver, sweep, cli, oracle_games):
    _mod.solve_oracle_game = _solve


def report(criterion: str, ok: bool, detail: str = "") -> None:
    """Print one acceptance line and keep it for the terminal summary."""
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    print(line)
    ACCEPTANCE.append((criterion, ok, detail))


def pytest_collection_modifyitems(items):
    # the closure test must see every equilibrium the other tests produced
    items.sort(key=lambda it: it.get_closest_marker("closure") is not None)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"{crit:<6} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def games():
    return {p.stem: read_game(p) for p in sorted((DATA / "games").glob("*.json"))}


@pytest.fixture(scope="session")
def oracles():
    out = {}
    for p in sorted((DATA / "oracles").glob("*.json")):
        if p.stem != "samples_nonmonotone":
            out[p.stem] = read_oracle(p)
    return out


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def random_game(rng: np.random.Generator, kind: str, shape=None) -> oracle_games.BimatrixGame:
    """Normal payoffs; ``kind`` is zero_sum, competitive or general."""
    p, q = shape if shape is not None else rng.integers(2, 5, size=2)
    a = rng.normal(size=(p, q))
    if kind == "zero_sum":
        return oracle_games.BimatrixGame.zero_sum(a)
    if kind == "competitive":
        # strictly decreasing transform of A's payoff keeps the game strictly competitive
        return oracle_games.BimatrixGame(a, -(a + 0.3 * a ** 3))
    return oracle_games.BimatrixGame(a, rng.normal(size=(p, q)))


POOL_SEED = 20240
POOL_KINDS = ("zero_sum",) * 500 + ("competitive",) * 50 + ("general",) * 100
PROBE_FRACS = (0.1, 0.3, 0.5, 0.7, 0.9)


def _probe(m, r, ia):
    """B's equilibrium strategies at interior points of one interval.

    Zero-sum cross-sections stay zero-sum, so B's maximin strategy from the
    batched zero-sum solver serves as an independent check there.
    """
    from oracle_games import game_values, solve_cross_section

    ts = ia.i_lo + np.array(PROBE_FRACS) * (ia.i_hi - ia.i_lo)
    if np.array_equal(m.b, -m.a):
        g = (1.0 - ts)[:, None, None] * m.a + ts[:, None, None] * r.a
        _, tau = game_values(-g.transpose(0, 2, 1))
        return [(t, [q]) for t, q in zip(ts, tau)]
    return [(t, [s_b.probs for _, s_b in solve_cross_section(oracle_games.cross_section(m, r, t))])
            for t in ts]


def _pool_record(rng, kind):
    from oracle_games import OracleGameError
    from oracle_games.nodes import game_structure
    from oracle_games.oracle import family

    m = random_game(rng, kind)
    r = oracle_games.maximal_matrix(m)
    rec = {"kind": kind, "m": m, "r": r, "nodes": None, "intervals": None, "probes": None,
           "structure_error": None, "eq": None, "oracle": None, "solve_error": None}
    try:
        nodes, iv = game_structure(m, r)
    except OracleGameError as exc:
        rec["structure_error"] = type(exc).__name__
    else:
        rec["nodes"], rec["intervals"] = nodes, iv
        rec["probes"] = [_probe(m, r, ia) for ia in iv]
    name = ("sqrt_k", "sqrt_k", "linear_slope", "sqrt_shift")[int(rng.integers(4))]
    f = family(name, float(rng.uniform(0.1, 5.0)))
    rec["oracle"] = f
    try:
        rec["eq"] = oracle_games.solve_oracle_game(m, f)
    except OracleGameError as exc:
        rec["solve_error"] = type(exc).__name__
    return rec


@pytest.fixture(scope="session")
def pool():
    """Seeded random games (2x2 to 4x4) with their structure, computed once."""
    rng = np.random.default_rng(POOL_SEED)
    return [_pool_record(rng, kind) for kind in POOL_KINDS]
