"""Nodes (dominance changes of B's strategies) and per-interval structure.

Dominance only depends on the response probability ``I``, so everything
here works in ``I``-space; payments follow from the oracle curve through
``level_x``.  Between consecutive nodes B's equilibrium strategy is
constant and A's silent-case strategy has the rational form
``(a_i + b_i I) / (c_i (1 - I))``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import ConsistencyError, InconsistentDominance, LevelUnreachable, NonUniqueInterior
from .game import (
    BimatrixGame,
    MixedStrategy,
    cross_section,
    information_value,
    value_of_information,
)
from .nash import deviation_gains, game_values, solve_cross_section
from .oracle import OracleFunction

GRID_CELLS = 1024
NODE_XTOL = 1e-13
NODE_MERGE = 1e-9
FIT_TOL = 1e-8


@dataclass(frozen=True)
class NodeEvent:
    i_star: float
    strategy: int
    direction: str
    witness: MixedStrategy
    x_star: float | None = None


@dataclass(frozen=True)
class IntervalAnalysis:
    i_lo: float
    i_hi: float
    b_support: tuple
    a_support: tuple | None
    s_b: MixedStrategy
    s_a_coeffs: tuple | None
    v: float

    @property
    def a_unique(self) -> bool:
        return self.s_a_coeffs is not None

    def contains(self, i_val: float) -> bool:
        return self.i_lo < i_val < self.i_hi

    def s_a(self, i_val: float) -> MixedStrategy:
        """A's silent-case strategy from the rational form (limit at ``I = 1``)."""
        if self.s_a_coeffs is None:
            raise NonUniqueInterior(
                f"A's strategy is not unique on ({self.i_lo:g}, {self.i_hi:g})"
            )
        co = np.asarray(self.s_a_coeffs, dtype=float)
        a, b, c = co[:, 0], co[:, 1], co[:, 2]
        if i_val >= 1.0 - 1e-12:
            p = -b / c
        else:
            p = (a + b * i_val) / (c * (1.0 - i_val))
        p[np.abs(p) < 1e-14] = 0.0
        return MixedStrategy(p)

    def formula(self, labels=None) -> list[str]:
        """Human-readable ``(a + b I) / (c (1 - I))`` strings per A strategy."""
        out = []
        for i, (a, b, c) in enumerate(self.s_a_coeffs or ()):
            name = labels[i] if labels else f"A{i + 1}"
            if a == 0 and b == 0:
                out.append(f"{name}: 0")
                continue
            sign = "+" if b >= 0 else "-"
            out.append(f"{name}: ({_num(a)} {sign} {_num(abs(b))} I) / ({_num(c)} (1 - I))")
        return out


def _num(v: float) -> str:
    return str(int(round(v))) if abs(v - round(v)) < 1e-12 else f"{v:.10g}"


def _b_gap_parts(m: BimatrixGame, r: BimatrixGame, j: int):
    """Gap matrices at I = 0 and I = 1 for B's strategy ``j`` vs the rest."""
    others = [k for k in range(m.cols) if k != j]
    g0 = m.b.T[others] - m.b.T[j][None, :]
    rb = r.b[0]
    g1 = np.repeat((rb[others] - rb[j])[:, None], m.rows, axis=1)
    return g0, g1, others


def dominance_margins(m: BimatrixGame, r: BimatrixGame, j: int, i_vals) -> np.ndarray:
    """Dominance margin of B's strategy ``j`` at each response probability."""
    i_vals = np.atleast_1d(np.asarray(i_vals, dtype=float))
    if m.cols < 2:
        return np.full(i_vals.shape, -np.inf)
    g0, g1, _ = _b_gap_parts(m, r, j)
    g = (1.0 - i_vals)[:, None, None] * g0 + i_vals[:, None, None] * g1
    v, _ = game_values(g)
    return v


def _witness(m, r, j, i_val) -> MixedStrategy:
    g0, g1, others = _b_gap_parts(m, r, j)
    _, sig = game_values((1.0 - i_val) * g0 + i_val * g1)
    full = np.zeros(m.cols)
    full[others] = sig[0] / sig[0].sum()
    return MixedStrategy(full)


def find_nodes(m: BimatrixGame, r: BimatrixGame, oracle: OracleFunction | None = None,
               grid: int = GRID_CELLS) -> list[NodeEvent]:
    """Locate every change in dominance status of B's pure strategies.

    Margins are scanned on ``grid`` cells over ``[0, 1]`` and each sign change
    is refined by bracketing root search.  Payments are attached when an
    oracle curve is supplied (``None`` for unreachable levels).
    """
    events: list[NodeEvent] = []
    i_grid = np.linspace(0.0, 1.0, grid + 1)
    scale = max(1.0, float(np.abs(m.b).max()))
    eps = 1e-12 * scale
    for j in range(m.cols if m.cols > 1 else 0):
        margins = dominance_margins(m, r, j, i_grid)
        signs = np.where(margins > eps, 1, np.where(margins < -eps, -1, 0))
        found = []
        prev_k = None
        for k, s in enumerate(signs):
            if s == 0:
                continue
            if prev_k is not None and s != signs[prev_k]:
                lo, hi = i_grid[prev_k], i_grid[k]
                fn = lambda t: float(dominance_margins(m, r, j, t)[0])  # noqa: E731
                i_star = brentq(fn, lo, hi, xtol=NODE_XTOL, rtol=4 * np.finfo(float).eps)
                direction = "becomes_dominated" if s > 0 else "becomes_undominated"
                _check_crossing(m, r, j, i_star, direction, eps)
                side = min(1.0, i_star + 1e-9) if s > 0 else max(0.0, i_star - 1e-9)
                found.append((i_star, direction, _witness(m, r, j, side)))
            prev_k = k
        order = [d for _, d, _ in found]
        if order not in ([], ["becomes_dominated"], ["becomes_undominated"],
                         ["becomes_undominated", "becomes_dominated"]):
            raise InconsistentDominance(
                f"B strategy {j} changes dominance status in the order {order}"
            )
        for i_star, direction, wit in found:
            x_star = None
            if oracle is not None:
                try:
                    x_star = oracle.level_x(i_star)
                except LevelUnreachable:
                    x_star = None
            events.append(NodeEvent(i_star, j, direction, wit, x_star))
    events.sort(key=lambda e: (e.i_star, e.strategy))
    return events


def _check_crossing(m, r, j, i_star, direction, eps, delta=1e-6):
    lo, hi = i_star - delta, i_star + delta
    if lo < 0.0 or hi > 1.0:
        return
    before, after = dominance_margins(m, r, j, [lo, hi])
    if direction == "becomes_dominated":
        good = before <= eps and after >= -eps
    else:
        good = before >= -eps and after <= eps
    if not good:
        raise InconsistentDominance(
            f"B strategy {j}: margin does not cross zero at I={i_star!r} "
            f"(before {before!r}, after {after!r})"
        )


def node_levels(nodes) -> list[float]:
    """Distinct interior node positions in ``I``, merged within ``NODE_MERGE``."""
    levels: list[float] = []
    for e in sorted(nodes, key=lambda e: e.i_star):
        if e.i_star <= NODE_MERGE or e.i_star >= 1.0 - NODE_MERGE:
            continue
        if levels and e.i_star - levels[-1] <= NODE_MERGE:
            continue
        levels.append(e.i_star)
    return levels


def _rationalize(a: float, b: float, max_den: int = 10_000):
    fa = Fraction(a).limit_denominator(max_den)
    fb = Fraction(b).limit_denominator(max_den)
    if abs(float(fa) - a) > 1e-12 or abs(float(fb) - b) > 1e-12:
        return (a, b, 1.0)
    c = math.lcm(fa.denominator, fb.denominator)
    return (float(fa * c), float(fb * c), float(c))


def _kernel_coeffs(m: BimatrixGame, r: BimatrixGame, sa, sb):
    """Solve the indifference system in ``u_i = (1 - I) A_i`` symbolically in I."""
    s = len(sa)
    bsub = m.b[np.ix_(sa, sb)]
    k = np.zeros((s + 1, s + 1))
    k[:s, :s] = bsub.T
    k[:s, s] = -1.0
    k[s, :s] = 1.0
    c0 = np.zeros(s + 1)
    c0[s] = 1.0
    c1 = np.concatenate([-r.b[0, list(sb)], [-1.0]])
    if abs(np.linalg.det(k)) < 1e-12:
        return None
    sol0 = np.linalg.solve(k, c0)
    sol1 = np.linalg.solve(k, c1)
    return sol0[:s], sol1[:s]


def _sample_coeffs(m, r, sa, lo, hi):
    """Affine fit of ``u_i(I)`` through two interior cross-section solutions."""
    pts = (lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo))
    us = []
    for t in pts:
        eqs = solve_cross_section(cross_section(m, r, t))
        us.append((1.0 - t) * np.asarray(eqs[0][0])[list(sa)])
    b = (us[1] - us[0]) / (pts[1] - pts[0])
    a = us[0] - b * pts[0]
    return a, b


def _solve_at(m, r, t):
    eqs = solve_cross_section(cross_section(m, r, t))
    s_b = eqs[0][1]
    for _, q in eqs:
        if not q.allclose(s_b, 1e-8):
            raise NonUniqueInterior(
                f"cross-section at I={t:g} has {len(eqs)} equilibria with different "
                "B strategies; the interval analysis needs a unique equilibrium"
            )
    return eqs


def _affine_range(c0: np.ndarray, c1: np.ndarray, t: float):
    """Largest interval around ``t`` on which every ``c0 + c1 I >= 0``."""
    lo, hi = -math.inf, math.inf
    for a, b in zip(c0, c1):
        if abs(b) < 1e-15:
            continue
        root = -a / b
        if b > 0 and root < t:
            lo = max(lo, root)
        elif b < 0 and root > t:
            hi = min(hi, root)
    return lo, hi


def _branch_range(m, r, eqs, t):
    """Exact validity range in ``I`` of the equilibrium branch through ``t``.

    With both supports fixed, ``s_b`` is constant and ``u = (1 - I) s_a`` is
    affine in ``I``, so every equilibrium inequality is affine as well.
    Returns ``None`` when the branch is degenerate.
    """
    if not eqs.unique:
        return None
    s_a, s_b = eqs[0]
    sa, sb = s_a.support(), s_b.support()
    if len(sa) != len(sb):
        return None
    fit = _kernel_coeffs(m, r, sa, sb)
    if fit is None:
        return None
    a, b = fit
    rb = r.b[0]
    bsub = m.b[list(sa)]
    # B's payoff per column: u^T B_j + I r_j
    pay0, pay1 = a @ bsub, b @ bsub + rb
    s0 = sb[0]
    off = [j for j in range(m.cols) if j not in sb]
    c0 = np.concatenate([a, pay0[s0] - pay0[off]])
    c1 = np.concatenate([b, pay1[s0] - pay1[off]])
    return _affine_range(c0, c1, t)


def _split_points(m, r, lo, hi, depth=0):
    """Points in ``(lo, hi)`` where the cross-section equilibrium changes support."""
    if hi - lo <= 1e-10 or depth > 40:
        return []
    mid = 0.5 * (lo + hi)
    eqs = _solve_at(m, r, mid)
    rng_ = _branch_range(m, r, eqs, mid)
    if rng_ is None:
        return _split_by_bisection(m, r, lo, hi, eqs[0][1], depth)
    vlo, vhi = rng_
    out = []
    if vlo > lo + 1e-10:
        out += _split_points(m, r, lo, vlo, depth + 1) + [vlo]
    if vhi < hi - 1e-10:
        out += [vhi] + _split_points(m, r, vhi, hi, depth + 1)
    return out


def _split_by_bisection(m, r, lo, hi, s_b_mid, depth):
    ts = np.linspace(lo, hi, 11)[1:-1]
    sbs = [_solve_at(m, r, t)[0][1] for t in ts]
    for k in range(len(ts) - 1):
        if not sbs[k].allclose(sbs[k + 1], 1e-8):
            a, b = ts[k], ts[k + 1]
            sa_ = sbs[k]
            while b - a > 1e-12:
                c = 0.5 * (a + b)
                if _solve_at(m, r, c)[0][1].allclose(sa_, 1e-8):
                    a = c
                else:
                    b = c
            c = 0.5 * (a + b)
            return (_split_points(m, r, lo, c, depth + 1) + [c]
                    + _split_points(m, r, c, hi, depth + 1))
    return []


def interval_profile(m: BimatrixGame, r: BimatrixGame, nodes) -> list[IntervalAnalysis]:
    """Constant ``s_b``, value of information and ``s_a(I)`` on each interval.

    Intervals run between consecutive nodes and are further split wherever
    the cross-section equilibrium changes support without any dominance
    change (A's probability of a strategy reaching zero can force this).
    """
    levels = node_levels(nodes)
    bounds = [0.0]
    for lo, hi in zip([0.0, *levels], [*levels, 1.0]):
        bounds += _split_points(m, r, lo, hi) + [hi]
    out = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi - lo <= 1e-12:
            continue
        mid = 0.5 * (lo + hi)
        eqs = _solve_at(m, r, mid)
        s_b = eqs[0][1]
        v = information_value(m, r, s_b)
        b_support = s_b.support()
        coeffs = None
        a_support = None
        if eqs.unique:
            s_a = eqs[0][0]
            a_support = s_a.support()
            v_raw = value_of_information(m, r, s_a, s_b)
            if abs(v_raw - v) > 1e-10 * max(1.0, abs(v)):
                raise ConsistencyError(f"value of information mismatch {v_raw} vs {v}")
            fit = None
            if len(a_support) == len(b_support):
                fit = _kernel_coeffs(m, r, a_support, b_support)
            if fit is None:
                fit = _sample_coeffs(m, r, a_support, lo, hi)
            full = [(0.0, 0.0, 1.0)] * m.rows
            for idx, i in enumerate(a_support):
                full[i] = _rationalize(float(fit[0][idx]), float(fit[1][idx]))
            coeffs = tuple(full)
        ia = IntervalAnalysis(lo, hi, b_support, a_support, s_b, coeffs, v)
        if coeffs is not None:
            _verify_fit(m, r, ia)
        out.append(ia)
    return out


def _verify_fit(m, r, ia: IntervalAnalysis) -> None:
    """The rational form must give a cross-section equilibrium at three interior points."""
    for frac in (0.2, 0.5, 0.8):
        t = ia.i_lo + frac * (ia.i_hi - ia.i_lo)
        try:
            got = ia.s_a(t)
        except ValueError as exc:
            raise ConsistencyError(
                f"rational form on ({ia.i_lo:g}, {ia.i_hi:g}) leaves the simplex at I={t:g}"
            ) from exc
        gains = deviation_gains(cross_section(m, r, t), got, ia.s_b)
        if max(gains) > FIT_TOL:
            raise ConsistencyError(
                f"rational form on ({ia.i_lo:g}, {ia.i_hi:g}) is not an equilibrium at "
                f"I={t:g} (gains {gains})"
            )


def interval_at(intervals, i_val: float) -> IntervalAnalysis:
    for ia in intervals:
        if ia.i_lo <= i_val <= ia.i_hi:
            return ia
    raise ValueError(f"no interval contains I={i_val!r}")


def cached_nodes(m: BimatrixGame, r: BimatrixGame, grid: int = GRID_CELLS) -> tuple:
    """``find_nodes`` without payments, cached per game."""
    return _cached_nodes(m, r, int(grid))


def game_structure(m: BimatrixGame, r: BimatrixGame, grid: int = GRID_CELLS):
    """Nodes and interval analyses of a game, cached since they ignore the oracle."""
    return _game_structure(m, r, int(grid))


# one positional signature so default and explicit ``grid`` share cache entries
@lru_cache(maxsize=2048)
def _cached_nodes(m, r, grid):
    return tuple(find_nodes(m, r, grid=grid))


@lru_cache(maxsize=2048)
def _game_structure(m, r, grid):
    nodes = _cached_nodes(m, r, grid)
    return nodes, tuple(interval_profile(m, r, nodes))
