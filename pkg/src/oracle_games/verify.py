"""Independent checks of solver output.

``deviation_check`` computes best unilateral gains exactly (payments on a
dense grid plus analytic critical points).  ``simulate`` plays the
five-stage protocol with numpy's PCG64 generator; trials are split into
fixed-size shards seeded from one ``SeedSequence`` so results do not depend
on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import LevelUnreachable, SlopeOutOfRange
from .game import BimatrixGame, best_response_indices, cross_section, response_payoff
from .nodes import cached_nodes
from .oracle import OracleFunction
from .solver import OracleEquilibrium, payment_bound

X_GRID = 10_000
SHARD = 1 << 18


@dataclass(frozen=True)
class DeviationCertificate:
    max_gain_a_strategy: float
    max_gain_a_payment: float
    max_gain_b: float
    epsilon: float
    passed: bool
    worst_deviation: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _critical_payments(m, r, f, s_b, v, x_hi, nodes):
    pts = [0.0, x_hi]
    if v > 0:
        try:
            a, b = f.slope_x(1.0 / v)
            pts += [a, b]
        except SlopeOutOfRange as exc:
            pts.append(exc.fallback)
        except ValueError:
            pass
    for e in nodes:
        try:
            pts.append(f.level_x(e.i_star))
        except LevelUnreachable:
            pass
    if f.kind == "piecewise_linear":
        pts += [p[0] for p in f.points]
    return [p for p in pts if 0.0 <= p <= x_hi]


def deviation_check(m: BimatrixGame, r: BimatrixGame, f: OracleFunction, eq: OracleEquilibrium,
                    epsilon: float = 1e-6, x_grid: int = X_GRID, nodes=None) -> DeviationCertificate:
    """Largest unilateral gains against ``eq``; passes when all are ``<= epsilon``."""
    s_a, s_b = np.asarray(eq.s_a), np.asarray(eq.s_b)
    i_val = float(f.eval(eq.x))
    ms = cross_section(m, r, i_val)

    a_rows = ms.a @ s_b
    gain_a = float(a_rows.max() - s_a @ a_rows)
    b_cols = s_a @ ms.b
    gain_b = float(b_cols.max() - b_cols @ s_b)

    # payment deviations: silent strategy re-optimised, s_b held fixed
    e_n_cur = float(s_a @ m.a @ s_b)
    e_n_best = max(e_n_cur, float((m.a @ s_b).max()))
    e_r = response_payoff(m, r, s_b)
    current = (1.0 - i_val) * e_n_cur + i_val * e_r - eq.x
    x_hi = max(payment_bound(m, f), eq.x)
    if nodes is None:
        nodes = cached_nodes(m, r)
    xs = np.unique(np.concatenate([
        np.linspace(0.0, x_hi, x_grid),
        _critical_payments(m, r, f, s_b, e_r - e_n_best, x_hi, nodes),
    ]))
    ivals = np.asarray(f.eval(xs))
    payoff = (1.0 - ivals) * e_n_best + ivals * e_r - xs
    k = int(np.argmax(payoff))
    gain_x = float(payoff[k] - current)

    gains = {"a_strategy": gain_a, "a_payment": gain_x, "b": gain_b}
    worst = max(gains, key=gains.get)
    if worst == "a_strategy":
        desc = f"A switches silent strategy to A{int(np.argmax(a_rows)) + 1}"
    elif worst == "b":
        desc = f"B switches to B{int(np.argmax(b_cols)) + 1}"
    else:
        verb = "reduce" if xs[k] < eq.x else "increase"
        desc = f"{verb} payment to x={xs[k]:.12g}"
    passed = max(gains.values()) <= epsilon
    return DeviationCertificate(gain_a, gain_x, gain_b, epsilon, passed, desc)


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    mean_e_a: float
    mean_e_b: float
    std_err_a: float
    std_err_b: float
    response_rate: float
    seed: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _draw(rng, cum, size):
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return np.minimum(idx, cum.size - 1)


def _shard(args):
    a, b, alpha, cum_a, cum_b, i_val, size, seed_seq = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    j = _draw(rng, cum_b, size)
    told = rng.random(size) < i_val
    i = np.where(told, alpha[j], _draw(rng, cum_a, size))
    pa, pb = a[i, j], b[i, j]
    return (float(pa.sum()), float((pa * pa).sum()), float(pb.sum()), float((pb * pb).sum()),
            int(told.sum()))


def simulate(m: BimatrixGame, f: OracleFunction, s_a, s_b, x: float, trials: int,
             seed: int, jobs: int = 1) -> SimulationResult:
    """Monte-Carlo estimate of both players' payoffs under the oracle protocol."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    alpha = np.asarray(best_response_indices(m).alpha)
    i_val = float(f.eval(x))
    cum_a = np.cumsum(np.asarray(s_a, dtype=float))
    cum_b = np.cumsum(np.asarray(s_b, dtype=float))
    sizes = [SHARD] * (trials // SHARD)
    if trials % SHARD:
        sizes.append(trials % SHARD)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(m.a, m.b, alpha, cum_a, cum_b, i_val, n, s) for n, s in zip(sizes, seqs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_shard, tasks))
    else:
        parts = [_shard(t) for t in tasks]
    sa, saa, sb, sbb, told = (math.fsum(p[c] for p in parts) for c in range(5))
    mean_a, mean_b = sa / trials, sb / trials

    def stderr(s, ss, mean):
        if trials < 2:
            return 0.0
        var = max(ss - trials * mean * mean, 0.0) / (trials - 1)
        return math.sqrt(var / trials)

    return SimulationResult(trials, mean_a - x, mean_b, stderr(sa, saa, mean_a),
                            stderr(sb, sbb, mean_b), told / trials, int(seed))
