"""Equilibria and dominance for a fixed (cross-section) bimatrix game.

All equilibria are found by vertex enumeration of the two best-response
polytopes, which also handles degenerate games: a continuum of equilibria
is reported through its extreme points.  Dominance margins are values of
small zero-sum games, computed by exhaustive square-kernel enumeration
(batched over many games at once) with a linear-programming fallback.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.optimize import linprog

from .errors import NoEquilibriumFound, TooLarge
from .game import BimatrixGame, MixedStrategy

MAX_STRATEGIES = 12
BR_TOL = 1e-9
MERGE_TOL = 1e-8
DOMINANCE_TOL = 1e-9
ENUM_LIMIT = 8

Player = Literal["A", "B"]


@dataclass(frozen=True)
class EquilibriumSet:
    profiles: tuple
    unique: bool

    def __len__(self):
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)

    def __getitem__(self, k):
        return self.profiles[k]


@dataclass(frozen=True)
class DominanceReport:
    player: str
    strategy: int
    status: str
    witness: MixedStrategy
    margin: float

    @property
    def dominated(self) -> bool:
        return self.status != "undominated"


# -- zero-sum values --------------------------------------------------------
def _solve_batch(mats: np.ndarray, rhs: np.ndarray):
    """Solve many small systems, flagging (near-)singular ones as invalid."""
    n = mats.shape[-1]
    scale = np.abs(mats).max(axis=(-2, -1))
    scale = np.where(scale > 0, scale, 1.0)
    det = np.linalg.det(mats / scale[:, None, None])
    ok = np.abs(det) > 1e-11
    safe = np.where(ok[:, None, None], mats, np.eye(n))
    sol = np.linalg.solve(safe, np.broadcast_to(rhs, mats.shape[:-1])[..., None])[..., 0]
    return sol, ok


def _equalisers(sub: np.ndarray):
    """Equalising strategies of square zero-sum kernels ``sub`` (shape ``(N, s, s)``).

    Returns ``(sigma|v, ok_sigma, tau, ok_tau)``; sizes one and two use closed
    forms, larger kernels a batched linear solve.
    """
    n, s, _ = sub.shape
    if s == 1:
        ones = np.ones((n, 1))
        return np.hstack([ones, sub[:, 0, :]]), np.ones(n, bool), ones, np.ones(n, bool)
    if s == 2:
        a, b, c, d = sub[:, 0, 0], sub[:, 0, 1], sub[:, 1, 0], sub[:, 1, 1]
        den = a - b - c + d
        scale = np.maximum(np.abs(sub).max(axis=(1, 2)), 1e-300)
        ok = np.abs(den) > 1e-11 * scale
        den = np.where(ok, den, 1.0)
        s1 = (d - c) / den
        t1 = (d - b) / den
        v = (a * d - b * c) / den
        return (np.column_stack([s1, 1.0 - s1, v]), ok,
                np.column_stack([t1, 1.0 - t1]), ok)
    ones = np.ones((n, 1, s))
    corner = np.zeros((n, 1, 1))
    neg = -np.ones((n, s, 1))
    rhs = np.zeros(s + 1)
    rhs[-1] = 1.0
    sys_sigma = np.concatenate(
        [np.concatenate([sub.transpose(0, 2, 1), neg], axis=2),
         np.concatenate([ones, corner], axis=2)], axis=1)
    sys_tau = np.concatenate(
        [np.concatenate([sub, neg], axis=2),
         np.concatenate([ones, corner], axis=2)], axis=1)
    sol_s, ok_s = _solve_batch(sys_sigma, rhs)
    sol_t, ok_t = _solve_batch(sys_tau, rhs)
    return sol_s, ok_s, sol_t[:, :s], ok_t


@lru_cache(maxsize=None)
def _square_index(e: int, d: int, s: int):
    """Row and column index sets of every ``s x s`` submatrix of an ``e x d`` matrix."""
    S = np.array(list(itertools.combinations(range(d), s)))
    T = np.array(list(itertools.combinations(range(e), s)))
    rows = np.tile(T, (len(S), 1))
    cols = np.repeat(S, len(T), axis=0)
    return rows, cols


def game_values(g: np.ndarray, tol: float | None = None):
    """Values and maximin strategies of zero-sum games ``g[k]`` (row player maximises).

    ``g`` has shape ``(K, p, q)``.  Every pair of equal-size supports is tried
    and the equalising solution kept when it is optimal for both players; a
    square nonsingular kernel always exists, so the enumeration is exhaustive.
    Entries that fail numerically come back as ``nan`` for the caller to
    retry with an LP.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim == 2:
        g = g[None]
    K, p, q = g.shape
    if tol is None:
        tol = DOMINANCE_TOL * max(1.0, float(np.abs(g).max(initial=0.0)))
    values = np.full(K, np.nan)
    sigmas = np.full((K, p), np.nan)
    for s in range(1, min(p, q) + 1):
        todo = np.isnan(values)
        if not todo.any():
            break
        idx = np.flatnonzero(todo)
        gg = g[idx]
        T_arr, S_arr = _square_index(q, p, s)
        # sub[pair, k] = gg[k][S, T]
        sub = gg[:, S_arr[:, :, None], T_arr[:, None, :]].transpose(1, 0, 2, 3)
        P, Kk = sub.shape[0], sub.shape[1]
        sub = sub.reshape(P * Kk, s, s)
        sol_s, ok_s, sol_t, ok_t = _equalisers(sub)
        sig = sol_s[:, :s].reshape(P, Kk, s)
        v = sol_s[:, s].reshape(P, Kk)
        tau = sol_t.reshape(P, Kk, s)
        ok = (ok_s & ok_t).reshape(P, Kk)
        ok &= np.all(sig >= -tol, axis=2) & np.all(tau >= -tol, axis=2)
        pi = np.arange(P)[:, None, None]
        ki = np.arange(Kk)[None, :, None]
        full_sig = np.zeros((P, Kk, p))
        full_tau = np.zeros((P, Kk, q))
        full_sig[pi, ki, S_arr[:, None, :]] = sig
        full_tau[pi, ki, T_arr[:, None, :]] = tau
        col_pay = np.matmul(full_sig[:, :, None, :], gg)[:, :, 0, :]
        row_pay = np.matmul(gg, full_tau[..., None])[..., 0]
        ok &= np.all(col_pay >= v[..., None] - tol, axis=2)
        ok &= np.all(row_pay <= v[..., None] + tol, axis=2)
        found = ok.any(axis=0)
        first = ok.argmax(axis=0)
        sel = np.flatnonzero(found)
        values[idx[sel]] = v[first[sel], sel]
        sigmas[idx[sel]] = np.clip(full_sig[first[sel], sel], 0.0, None)
    bad = np.flatnonzero(np.isnan(values))
    for k in bad:
        values[k], sigmas[k] = _game_value_lp(g[k])
    return values, sigmas


def _game_value_lp(g: np.ndarray):
    p, q = g.shape
    # variables (sigma_1..sigma_p, t); maximise t s.t. sigma^T g[:, c] >= t
    c = np.zeros(p + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-g.T, np.ones((q, 1))])
    a_eq = np.hstack([np.ones((1, p)), np.zeros((1, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(q), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * p + [(None, None)], method="highs")
    if not res.success:
        raise NoEquilibriumFound(f"zero-sum value LP failed: {res.message}")
    sigma = np.clip(res.x[:p], 0.0, None)
    return float(-res.fun), sigma / sigma.sum()


# -- dominance --------------------------------------------------------------
def gap_matrix(game: BimatrixGame, player: Player, j: int) -> tuple[np.ndarray, list[int]]:
    """Payoff gaps ``others x opponents`` of each alternative over strategy ``j``."""
    if player == "B":
        pay = game.b.T
    elif player == "A":
        pay = game.a
    else:
        raise ValueError("player must be 'A' or 'B'")
    others = [k for k in range(pay.shape[0]) if k != j]
    return pay[others] - pay[j][None, :], others


def dominance_margin(game: BimatrixGame, player: Player, j: int) -> float:
    """Largest worst-case gain a mixture of the other strategies has over ``j``."""
    gaps, others = gap_matrix(game, player, j)
    if not others:
        return -np.inf
    v, _ = game_values(gaps)
    return float(v[0])


def _weak_witness(gaps: np.ndarray, tol: float):
    p, q = gaps.shape
    res = linprog(-gaps.sum(axis=1), A_ub=-gaps.T, b_ub=np.full(q, 0.5 * tol),
                  A_eq=np.ones((1, p)), b_eq=[1.0], bounds=[(0, None)] * p,
                  method="highs")
    if not res.success:
        return None
    sigma = np.clip(res.x, 0.0, None)
    return sigma / sigma.sum()


def dominance_status(game: BimatrixGame, player: Player, j: int,
                     mode: Literal["weak", "strict"] = "weak",
                     tol: float = DOMINANCE_TOL) -> DominanceReport:
    """Is pure strategy ``j`` of ``player`` dominated by a mixture of the others?"""
    size = game.rows if player == "A" else game.cols
    if not 0 <= j < size:
        raise IndexError(f"strategy {j} out of range for player {player}")
    gaps, others = gap_matrix(game, player, j)
    if not others:
        return DominanceReport(player, j, "undominated", MixedStrategy.pure(size, j), -np.inf)
    v, sig = game_values(gaps)
    margin, sigma = float(v[0]), sig[0]
    status = "undominated"
    if margin > tol:
        status = "strictly_dominated"
    elif mode == "weak" and margin >= -tol:
        weak = _weak_witness(gaps, tol)
        if weak is not None:
            row_gaps = weak @ gaps
            if row_gaps.min() >= -tol and row_gaps.max() > tol:
                status = "weakly_dominated"
                sigma = weak
                margin = max(float(row_gaps.min()), 0.0)
    full = np.zeros(size)
    full[others] = sigma / sigma.sum()
    return DominanceReport(player, j, status, MixedStrategy(full), margin)


# -- equilibria -------------------------------------------------------------
def _positive(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(), x.max()
    span = hi - lo
    return (x - lo) / (span if span > 0 else 1.0) + 1.0


def _vertices(c: np.ndarray, tol: float):
    """Nonzero vertices of ``{z >= 0 : c z <= 1}`` with their tight sets.

    Returns ``(z, coord_tight, cons_tight)``.
    """
    e, d = c.shape
    zs, zt, ct = [], [], []
    for s in range(1, min(d, e) + 1):
        rows, cols = _square_index(e, d, s)
        mats = c[rows[:, :, None], cols[:, None, :]]
        sol, ok = _solve_batch(mats, np.ones(s))
        z = np.zeros((len(cols), d))
        np.put_along_axis(z, cols, sol, axis=1)
        lhs = z @ c.T
        ok &= np.all(sol >= -tol, axis=1) & np.all(lhs <= 1.0 + tol, axis=1)
        z, lhs = z[ok], lhs[ok]
        zs.append(np.clip(z, 0.0, None))
        zt.append(z <= tol)
        ct.append(lhs >= 1.0 - tol)
    if not zs:
        return np.zeros((0, d)), np.zeros((0, d), bool), np.zeros((0, e), bool)
    z = np.concatenate(zs)
    # adding 0.0 turns -0.0 into 0.0 so equal rows have equal bytes
    key = np.round(z, 9) + 0.0
    first = {}
    for k, row in enumerate(key):
        first.setdefault(row.tobytes(), k)
    keep = np.fromiter(first.values(), dtype=int)
    return z[keep], np.concatenate(zt)[keep], np.concatenate(ct)[keep]


def deviation_gains(game: BimatrixGame, s_a, s_b) -> tuple[float, float]:
    """Best pure-deviation gains of A and B against a profile."""
    p = np.asarray(s_a, dtype=float)
    q = np.asarray(s_b, dtype=float)
    ua = game.a @ q
    ub = p @ game.b
    return float(ua.max() - p @ ua), float(ub.max() - ub @ q)


def is_equilibrium(game: BimatrixGame, s_a, s_b, tol: float = BR_TOL) -> bool:
    ga, gb = deviation_gains(game, s_a, s_b)
    return ga <= tol and gb <= tol


def _merge(profiles, tol):
    out = []
    for p, q in profiles:
        if not any(np.abs(p - p2).max() <= tol and np.abs(q - q2).max() <= tol for p2, q2 in out):
            out.append((p, q))
    return out


def solve_cross_section(game: BimatrixGame) -> EquilibriumSet:
    """All extreme Nash equilibria of a bimatrix game."""
    m, n = game.shape
    if max(m, n) > MAX_STRATEGIES:
        raise TooLarge(f"{m}x{n} exceeds the {MAX_STRATEGIES}-strategy enumeration limit")
    a = _positive(game.a)
    b = _positive(game.b)
    tol = 1e-10
    # P: x in R^m, x >= 0, B^T x <= 1   labels: i (x_i = 0), m + j (tight column)
    xp, xz, xc = _vertices(b.T, tol)
    lab_p = np.concatenate([xz, xc], axis=1)
    # Q: y in R^n, A y <= 1, y >= 0     labels: i (tight row), m + j (y_j = 0)
    yq, yz, yc = _vertices(a, tol)
    lab_q = np.concatenate([yc, yz], axis=1)
    complete = (lab_p[:, None, :] | lab_q[None, :, :]).all(axis=2)
    found = []
    for u, w in zip(*np.nonzero(complete)):
        p = xp[u] / xp[u].sum()
        q = yq[w] / yq[w].sum()
        p[p < 1e-13] = 0.0
        q[q < 1e-13] = 0.0
        p, q = p / p.sum(), q / q.sum()
        if is_equilibrium(game, p, q):
            found.append((p, q))
    found = _merge(found, MERGE_TOL)
    if not found:
        raise NoEquilibriumFound(f"no equilibrium found for {game!r}")
    found.sort(key=lambda pq: (tuple(-pq[0]), tuple(-pq[1])))
    profiles = tuple((MixedStrategy(p), MixedStrategy(q)) for p, q in found)
    return EquilibriumSet(profiles, len(profiles) == 1)


def pure_equilibria(game: BimatrixGame, tol: float = 1e-12) -> list[tuple[int, int]]:
    """Cells that are simultaneously A's column-best and B's row-best."""
    a_best = game.a >= game.a.max(axis=0, keepdims=True) - tol
    b_best = game.b >= game.b.max(axis=1, keepdims=True) - tol
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(a_best & b_best))]
