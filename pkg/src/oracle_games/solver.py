"""Equilibrium of the full oracle game.

The payment ``x`` is chosen where ``h(x) = V(x) I'(x) - 1`` changes sign.
``V`` is piecewise constant between nodes and ``I'`` is nonincreasing, so
each inter-node interval contributes at most one crossing and each node at
most one jump.  All candidates are collected; a well-posed game yields
exactly one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateOracle,
    LevelUnreachable,
    MultipleBaseEquilibria,
    NoEquilibriumFound,
    NoMixExists,
    NonMonotoneValue,
    NotNormalized,
    OracleGameError,
    SlopeOutOfRange,
)
from .game import (
    BimatrixGame,
    MixedStrategy,
    cross_section,
    full_payoff,
    information_value,
    maximal_matrix,
)
from .nash import deviation_gains, pure_equilibria, solve_cross_section
from .nodes import IntervalAnalysis, game_structure
from .oracle import OracleFunction, family, shift_to_zero

CASES = ("interior_zero", "interval_interior", "node_mix", "saturated_full_info", "pure_base")
H_TOL = 1e-12
EQ_TOL = 1e-7


@dataclass(frozen=True)
class OracleEquilibrium:
    s_a: MixedStrategy
    s_b: MixedStrategy
    x: float
    i_val: float
    case_label: str
    e_a: float
    e_b: float
    v_at_eq: float
    x_multiplicity: tuple = (0.0, 0.0)
    node_i: float | None = None
    mix_p: float | None = None
    case_index: int = 1

    def as_dict(self) -> dict:
        return {
            "case": self.case_label,
            "case_index": self.case_index,
            "x": self.x,
            "I": self.i_val,
            "s_a": np.asarray(self.s_a).tolist(),
            "s_b": np.asarray(self.s_b).tolist(),
            "E_a": self.e_a,
            "E_b": self.e_b,
            "V": self.v_at_eq,
            "x_multiplicity": list(self.x_multiplicity),
            "node_I": self.node_i,
            "mix_p": self.mix_p,
        }


def payment_bound(m: BimatrixGame, f: OracleFunction) -> float:
    """Largest payment worth considering: saturation/cap, else A's payoff range."""
    end = f.x_end()
    if math.isfinite(end) and end > 0:
        return end
    return max(m.payoff_range(), 1.0)


def node_mixture(v_below: float, v_above: float, i_slope_at_node: float,
                 s_below: MixedStrategy, s_above: MixedStrategy, tol: float = 1e-9):
    """Weight ``p`` with ``p V_below + (1 - p) V_above = 1 / I'`` and the mixed ``beta``."""
    target = 0.0 if math.isinf(i_slope_at_node) else 1.0 / i_slope_at_node
    lo, hi = min(v_below, v_above), max(v_below, v_above)
    if not lo - tol <= target <= hi + tol:
        raise NoMixExists(
            f"1/I' = {target!r} lies outside the value range [{lo!r}, {hi!r}]"
        )
    if hi - lo <= tol:
        p = 1.0
    else:
        p = float(np.clip((target - v_above) / (v_below - v_above), 0.0, 1.0))
    beta = p * np.asarray(s_below) + (1.0 - p) * np.asarray(s_above)
    return p, MixedStrategy(beta)


def _h(v: float, slope: float) -> float:
    if v <= 0.0:
        return -1.0
    return math.inf if math.isinf(slope) else v * slope - 1.0


@dataclass(frozen=True)
class _Segment:
    ia: IntervalAnalysis
    xl: float
    xh: float
    v: float


def _segments(intervals, j: OracleFunction, x_end: float) -> list[_Segment]:
    """Map reachable I-intervals onto payment intervals."""
    top = j.sup_value()
    out = []
    for ia in intervals:
        if ia.i_lo >= top - 1e-12 and out:
            break
        xl = 0.0 if ia.i_lo <= 0.0 else j.level_x(ia.i_lo)
        xh = x_end if ia.i_hi >= top else j.level_x(ia.i_hi)
        out.append(_Segment(ia, xl, xh, max(ia.v, 0.0)))
    return out


def _slope(j: OracleFunction, x: float, side: str, x_end: float) -> float:
    if side == "left" and x <= 0.0:
        return j.derivative(0.0, "right")
    if side == "right" and x >= x_end:
        return 0.0 if x_end > 0 else j.derivative(0.0, "right")
    return j.derivative(x, side)


def _multiplicity(j: OracleFunction, v: float, x: float, lo: float, hi: float):
    """Payment set sharing the same equilibrium when ``I'`` is flat at ``1 / V``."""
    if v <= 0:
        return (x, x)
    try:
        a, b = j.slope_x(1.0 / v)
    except SlopeOutOfRange:
        return (x, x)
    if a - 1e-12 <= x <= b + 1e-12:
        return (max(a, lo), min(b, hi))
    return (x, x)


def _silent_strategy(n: BimatrixGame, r: BimatrixGame, ia: IntervalAnalysis, i_val: float,
                     s_b: MixedStrategy) -> MixedStrategy:
    if ia.a_unique:
        return ia.s_a(i_val)
    t = min(max(i_val, ia.i_lo), ia.i_hi)
    for p, q in solve_cross_section(cross_section(n, r, t)):
        if q.allclose(s_b, 1e-8):
            return p
    raise ConsistencyError(f"no cross-section equilibrium at I={t!r} matches s_b={s_b}")


def _candidates(segs: list[_Segment], j: OracleFunction, x_end: float):
    cands = []
    first = segs[0]
    if _h(first.v, _slope(j, 0.0, "right", x_end)) <= H_TOL:
        cands.append(("interior_zero", 0))
    for k, sg in enumerate(segs):
        if sg.xh <= sg.xl:
            continue
        hr = _h(sg.v, _slope(j, sg.xl, "right", x_end))
        hl = _h(sg.v, _slope(j, sg.xh, "left", x_end))
        if hr > H_TOL and hl < -H_TOL:
            cands.append(("interval_interior", k))
        last = k == len(segs) - 1
        if not last:
            nxt = segs[k + 1]
            z = sg.xh
            if z < x_end and hl >= -H_TOL and _h(nxt.v, _slope(j, z, "right", x_end)) <= H_TOL:
                cands.append(("node_mix", k))
        elif x_end > 0 and hl >= -H_TOL:
            cands.append(("saturated_full_info", k))
    return cands


def _build(kind, k, segs, n, r, j, x_end):
    sg = segs[k]
    ia = sg.ia
    node_i = mix_p = None
    if kind == "interior_zero":
        x = 0.0
        s_b = ia.s_b
        s_a = _silent_strategy(n, r, ia, 0.0, s_b)
        mult = _multiplicity(j, sg.v, x, sg.xl, sg.xh)
    elif kind == "interval_interior":
        try:
            a, b = j.slope_x(1.0 / sg.v)
            x, mult = a, (a, b)
        except SlopeOutOfRange as exc:
            x = exc.fallback
            mult = (x, x)
        x = min(max(x, sg.xl), sg.xh)
        mult = (max(mult[0], sg.xl), min(mult[1], sg.xh))
        s_b = ia.s_b
        s_a = _silent_strategy(n, r, ia, float(j.eval(x)), s_b)
    elif kind == "node_mix":
        nxt = segs[k + 1]
        x = sg.xh
        node_i = ia.i_hi
        left = _slope(j, x, "left", x_end)
        right = _slope(j, x, "right", x_end)
        lo_t = 0.0 if math.isinf(left) else 1.0 / left
        hi_t = math.inf if right <= 0 else 1.0 / right
        s_a, s_b, mix_p = _node_profile(n, r, ia, nxt.ia, node_i, lo_t, hi_t)
        mult = (x, x)
    else:
        x = x_end
        s_b = ia.s_b
        s_a = _silent_strategy(n, r, ia, float(j.eval(x)), s_b)
        mult = (x, x)
    return x, s_a, s_b, mult, node_i, mix_p


def _node_profile(n, r, below: IntervalAnalysis, above: IntervalAnalysis, i_star: float,
                  lo_t: float, hi_t: float):
    """Cross-section equilibrium at a node whose value of information lies in ``[lo_t, hi_t]``.

    Two equilibria sharing A's strategy span a segment of equilibria along
    which ``V`` is linear.  The segment joining the one-sided limits is
    tried first; it is the only one needed for strictly competitive games.
    """
    ms = cross_section(n, r, i_star)
    alpha = _silent_strategy(n, r, below, i_star, below.s_b)
    pool = [(alpha, below.s_b)]
    try:
        pool.append((_silent_strategy(n, r, above, i_star, above.s_b), above.s_b))
    except (ConsistencyError, ValueError):
        pass
    pool = [(p, q) for p, q in pool if max(deviation_gains(ms, p, q)) <= 1e-9]
    pool += [e for e in solve_cross_section(ms)]
    values = [information_value(n, r, q) for _, q in pool]

    def pick(vi, vj):
        lo, hi = min(vi, vj), max(vi, vj)
        t = max(lo_t, lo)
        return t if t <= min(hi_t, hi) + 1e-12 else None

    first = pool[0]
    order = sorted(range(len(pool)), key=lambda i: not pool[i][0].allclose(first[0], 1e-9))
    for a_i in order:
        for b_i in order:
            p_a, q_a = pool[a_i]
            p_b, q_b = pool[b_i]
            if a_i > b_i or not p_a.allclose(p_b, 1e-8):
                continue
            t = pick(values[a_i], values[b_i])
            if t is None:
                continue
            p, beta = node_mixture(values[a_i], values[b_i], 1.0 / t if t > 0 else math.inf,
                                   q_a, q_b)
            return p_a, beta, p
    raise NoMixExists(
        f"no equilibrium of the cross-section at I={i_star!r} has V in [{lo_t!r}, {hi_t!r}]"
    )


def case_index(kind: str, k: int) -> int:
    """Ordinal of the solution region: zero payment, then interval 0, node 0, interval 1, ..."""
    if kind in ("interior_zero", "pure_base"):
        return 1
    if kind == "interval_interior":
        return 2 * k + 2
    return 2 * k + 3


def _finish(m, r, f, s_a, s_b, x, case, mult=None, node_i=None, mix_p=None,
            index=1) -> OracleEquilibrium:
    i_val = float(f.eval(x))
    e_a, e_b = full_payoff(m, r, s_a, s_b, i_val, x)
    v = information_value(m, r, s_b)
    return OracleEquilibrium(s_a, s_b, float(x), i_val, case, float(e_a), float(e_b), float(v),
                             tuple(mult) if mult else (float(x), float(x)), node_i, mix_p, index)


def _check(m, r, eq: OracleEquilibrium) -> None:
    ga, gb = deviation_gains(cross_section(m, r, eq.i_val), eq.s_a, eq.s_b)
    if max(ga, gb) > EQ_TOL:
        raise ConsistencyError(
            f"{eq.case_label} profile is not a cross-section equilibrium at I={eq.i_val!r} "
            f"(gains {ga!r}, {gb!r})"
        )


def solve_oracle_game(m: BimatrixGame, f: OracleFunction, *, base_profile=None,
                      grid: int = 1024) -> OracleEquilibrium:
    """Equilibrium ``(s_a, s_b, x)`` of the game ``m`` played with oracle ``f``.

    ``base_profile`` selects one of several base-game equilibria; the
    selected branch is only followed when it stays at ``x = 0``.
    """
    if not f.is_normalized():
        raise NotNormalized(f"{f.describe()} is not nondecreasing and concave; normalize it first")
    r = maximal_matrix(m)
    try:
        n, j = shift_to_zero(m, f)
    except DegenerateOracle:
        return _full_information(m, r, f)
    x_end = payment_bound(m, j)

    pures = pure_equilibria(n)
    if pures and base_profile is None:
        i, jj = pures[0]
        eq = _finish(m, r, f, MixedStrategy.pure(m.rows, i), MixedStrategy.pure(m.cols, jj),
                     0.0, "pure_base")
        _check(m, r, eq)
        return eq

    if base_profile is not None:
        s_a, s_b = (MixedStrategy(np.asarray(p, dtype=float)) for p in base_profile)
        v = max(information_value(n, r, s_b), 0.0)
        if _h(v, _slope(j, 0.0, "right", x_end)) <= H_TOL:
            eq = _finish(m, r, f, s_a, s_b, 0.0, "interior_zero")
            _check(m, r, eq)
            return eq
        raise MultipleBaseEquilibria(
            len(solve_cross_section(n)),
        )
    base = solve_cross_section(n)
    if len(base) > 1:
        raise MultipleBaseEquilibria(len(base))

    _, intervals = game_structure(n, r, grid)
    segs = _segments(intervals, j, x_end)
    cands = _candidates(segs, j, x_end)
    if not cands:
        raise NoEquilibriumFound(f"no sign change of V I' - 1 for {f.describe()}")
    found, rejected = [], []
    for kind, k in cands:
        try:
            x, s_a, s_b, mult, node_i, mix_p = _build(kind, k, segs, n, r, j, x_end)
            eq = _finish(m, r, f, s_a, s_b, x, kind, mult, node_i, mix_p, case_index(kind, k))
            _check(m, r, eq)
        except (NoMixExists, ConsistencyError) as exc:
            rejected.append(f"{kind}: {exc}")
            continue
        found.append(eq)
    if not found:
        raise NoEquilibriumFound("candidate payments failed: " + "; ".join(rejected))
    eq = found[0]
    lo, hi = eq.x_multiplicity
    for other in found[1:]:
        if not lo - 1e-12 <= other.x <= hi + 1e-12:
            raise NonMonotoneValue(
                "several payments satisfy the equilibrium conditions: "
                + ", ".join(f"{e.case_label} at x={e.x:.12g}" for e in found)
            )
    return eq


def _full_information(m, r, f) -> OracleEquilibrium:
    """``I(0) = 1``: A always learns B's move, so B just maximises against ``R``."""
    eqs = solve_cross_section(r)
    s_b = eqs[0][1]
    if any(not q.allclose(s_b, 1e-8) for _, q in eqs):
        raise MultipleBaseEquilibria(len(eqs))
    eq = _finish(m, r, f, eqs[0][0], s_b, 0.0, "saturated_full_info")
    _check(m, r, eq)
    return eq


def solve_multi(m: BimatrixGame, f: OracleFunction, subsupports) -> list[OracleEquilibrium]:
    """Solve each restricted subgame separately and embed the results.

    When a subgame has several base equilibria, the one whose support is the
    whole subgame is selected.
    """
    out = []
    for idx, (rows, cols) in enumerate(subsupports):
        rows, cols = tuple(int(i) for i in rows), tuple(int(c) for c in cols)
        sub = m.submatrix(rows, cols)
        try:
            try:
                eq = solve_oracle_game(sub, f)
            except MultipleBaseEquilibria:
                full = [(p, q) for p, q in solve_cross_section(sub)
                        if len(p.support()) == sub.rows and len(q.support()) == sub.cols]
                if len(full) != 1:
                    raise
                eq = solve_oracle_game(sub, f, base_profile=full[0])
        except OracleGameError as exc:
            exc.subgame = idx
            exc.args = (f"subgame {idx} {rows}x{cols}: {exc}",)
            raise
        out.append(OracleEquilibrium(
            eq.s_a.embed(rows, m.rows), eq.s_b.embed(cols, m.cols), eq.x, eq.i_val,
            eq.case_label, eq.e_a, eq.e_b, eq.v_at_eq, eq.x_multiplicity, eq.node_i, eq.mix_p,
            eq.case_index,
        ))
    return out


def harmful_info_profile(m: BimatrixGame, family_name: str, k_grid, x_cap=None):
    """``(k, equilibrium)`` pairs along a one-parameter oracle family."""
    return [(float(k), solve_oracle_game(m, family(family_name, float(k), x_cap=x_cap)))
            for k in k_grid]
