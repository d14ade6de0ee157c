"""Payoff matrices, mixed strategies and the oracle payoff arithmetic.

A two-player game is stored as two ``m x n`` float arrays: ``a`` holds the
payoffs of player A (rows) and ``b`` those of player B (columns).  When A
buys from the oracle, the response case is described by the *maximal
matrix* ``R``, in which every cell of column ``j`` is a copy of the cell of
A's best response to ``j``.  The game perceived at response probability
``I`` is the cell-wise blend ``(1 - I) M + I R``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    AmbiguousBestResponse,
    ConsistencyError,
    NegativePayment,
    NotMaximalMatrix,
    ShapeMismatch,
)

PROB_TOL = 1e-9
SUPPORT_TOL = 1e-9
TIE_TOL = 1e-12


class PayoffPair(NamedTuple):
    a: float
    b: float


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    """An ``m x n`` grid of (A-payoff, B-payoff) pairs."""

    a: np.ndarray
    b: np.ndarray
    row_labels: tuple | None = None
    col_labels: tuple | None = None

    def __post_init__(self):
        a = _frozen(self.a)
        b = _frozen(self.b)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ShapeMismatch(f"payoff matrix must be 2-d and non-empty, got shape {a.shape}")
        if a.shape != b.shape:
            raise ShapeMismatch(f"A and B payoff shapes differ: {a.shape} vs {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("payoffs must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for name, size in (("row_labels", a.shape[0]), ("col_labels", a.shape[1])):
            labels = getattr(self, name)
            if labels is not None:
                labels = tuple(str(s) for s in labels)
                if len(labels) != size:
                    raise ShapeMismatch(f"{name} has {len(labels)} entries, expected {size}")
                object.__setattr__(self, name, labels)

    @classmethod
    def from_pairs(cls, cells, row_labels=None, col_labels=None) -> "BimatrixGame":
        """Build a game from a nested ``rows x cols x 2`` list of payoff pairs."""
        arr = np.asarray(cells, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ShapeMismatch(
                f"expected a rows x cols x 2 nested list of payoff pairs, got shape {arr.shape}"
            )
        return cls(arr[:, :, 0], arr[:, :, 1], row_labels, col_labels)

    @classmethod
    def zero_sum(cls, a) -> "BimatrixGame":
        a = np.asarray(a, dtype=float)
        return cls(a, -a)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def cell(self, i: int, j: int) -> PayoffPair:
        return PayoffPair(float(self.a[i, j]), float(self.b[i, j]))

    def to_pairs(self) -> list:
        return np.stack([self.a, self.b], axis=-1).tolist()

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "BimatrixGame":
        rows, cols = list(rows), list(cols)
        rl = None if self.row_labels is None else [self.row_labels[i] for i in rows]
        cl = None if self.col_labels is None else [self.col_labels[j] for j in cols]
        return BimatrixGame(self.a[np.ix_(rows, cols)], self.b[np.ix_(rows, cols)], rl, cl)

    def payoff_range(self) -> float:
        """Spread of A's payoffs, the default bound on rational oracle payments."""
        return float(self.a.max() - self.a.min())

    def is_strictly_competitive(self, tol: float = TIE_TOL) -> bool:
        """True when every pair of outcomes is ranked oppositely by A and B."""
        a = self.a.ravel()
        b = self.b.ravel()
        da = a[:, None] - a[None, :]
        db = b[:, None] - b[None, :]
        sa = np.where(np.abs(da) <= tol, 0, np.sign(da))
        sb = np.where(np.abs(db) <= tol, 0, np.sign(db))
        return bool(np.all(sa == -sb))

    def __eq__(self, other):
        if not isinstance(other, BimatrixGame):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes(), self.shape))

    def __repr__(self):
        return f"BimatrixGame({self.to_pairs()!r})"


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability vector over one player's pure strategies.

    Entries within ``PROB_TOL`` below zero are clipped; anything else outside
    ``[0, 1]`` or a sum away from one raises ``ValueError``.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise ValueError("a mixed strategy needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise ValueError(f"non-finite probabilities: {p}")
        if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
            raise ValueError(f"probabilities outside [0, 1]: {p}")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def pure(cls, n: int, i: int) -> "MixedStrategy":
        p = np.zeros(n)
        p[i] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, n: int) -> "MixedStrategy":
        return cls(np.full(n, 1.0 / n))

    def support(self, threshold: float = SUPPORT_TOL) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.probs > threshold))

    def is_pure(self) -> bool:
        return len(self.support()) == 1

    def embed(self, indices: Sequence[int], size: int) -> "MixedStrategy":
        """Place this strategy on ``indices`` of a longer, zero-padded vector."""
        p = np.zeros(size)
        p[list(indices)] = self.probs
        return MixedStrategy(p)

    def allclose(self, other, atol: float = 1e-9) -> bool:
        return np.allclose(self.probs, np.asarray(other, dtype=float), rtol=0, atol=atol)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs.tolist())

    def __repr__(self):
        return f"MixedStrategy({np.array2string(self.probs, precision=6, separator=', ')})"


@dataclass(frozen=True)
class BestResponseMap:
    """``alpha[j]`` is the row of A's best response to column ``j``."""

    alpha: tuple[int, ...]

    def __getitem__(self, j):
        return self.alpha[j]

    def __len__(self):
        return len(self.alpha)


def _as_probs(s, size: int, who: str) -> np.ndarray:
    p = np.asarray(s, dtype=float).ravel()
    if p.size != size:
        raise ShapeMismatch(f"{who} strategy has {p.size} entries, game needs {size}")
    return p


def best_response_indices(game: BimatrixGame) -> BestResponseMap:
    """A's best response to each pure column.

    Ties are accepted only when the tied cells are identical payoff pairs, in
    which case the lowest row wins.
    """
    alpha = []
    for j in range(game.cols):
        col = game.a[:, j]
        best = col.max()
        rows = np.flatnonzero(col >= best - TIE_TOL)
        if rows.size > 1:
            bvals = game.b[rows, j]
            if np.ptp(bvals) > TIE_TOL:
                raise AmbiguousBestResponse(j, rows.tolist())
        alpha.append(int(rows[0]))
    return BestResponseMap(tuple(alpha))


def maximal_matrix(game: BimatrixGame) -> BimatrixGame:
    alpha = np.array(best_response_indices(game).alpha)
    cols = np.arange(game.cols)
    a_row = game.a[alpha, cols]
    b_row = game.b[alpha, cols]
    return BimatrixGame(
        np.tile(a_row, (game.rows, 1)),
        np.tile(b_row, (game.rows, 1)),
        game.row_labels,
        game.col_labels,
    )


def cross_section(m: BimatrixGame, r: BimatrixGame, i_val: float) -> BimatrixGame:
    """The blended game ``(1 - I) M + I R`` seen at response probability ``I``."""
    if m.shape != r.shape:
        raise ShapeMismatch(f"game shapes differ: {m.shape} vs {r.shape}")
    if not 0.0 <= i_val <= 1.0:
        raise ValueError(f"response probability {i_val!r} outside [0, 1]")
    # exact endpoints keep I=0 and I=1 bit-identical to M and R
    if i_val == 0.0:
        return m
    if i_val == 1.0:
        return r
    w = 1.0 - i_val
    return BimatrixGame(
        w * m.a + i_val * r.a, w * m.b + i_val * r.b, m.row_labels, m.col_labels
    )


def expected_payoffs(game: BimatrixGame, s_a, s_b) -> PayoffPair:
    p = _as_probs(s_a, game.rows, "A")
    q = _as_probs(s_b, game.cols, "B")
    return PayoffPair(float(p @ game.a @ q), float(p @ game.b @ q))


def _check_maximal(r: BimatrixGame) -> None:
    if np.ptp(r.a, axis=0).max() > 1e-12 or np.ptp(r.b, axis=0).max() > 1e-12:
        raise NotMaximalMatrix("rows of the maximal matrix must be identical")


def response_payoff(m: BimatrixGame, r: BimatrixGame, s_b) -> float:
    """A's expected payoff when the oracle responds (row choice is irrelevant)."""
    if m.shape != r.shape:
        raise ShapeMismatch(f"game shapes differ: {m.shape} vs {r.shape}")
    _check_maximal(r)
    q = _as_probs(s_b, r.cols, "B")
    return float(r.a[0] @ q)


def response_payoff_b(r: BimatrixGame, s_b) -> float:
    """B's expected payoff when the oracle responds."""
    _check_maximal(r)
    q = _as_probs(s_b, r.cols, "B")
    return float(r.b[0] @ q)


def value_of_information(m: BimatrixGame, r: BimatrixGame, s_a, s_b) -> float:
    """Marginal gain to A from a higher response probability, ``E_r - E_n``.

    Computed from the raw pair; non-negative whenever ``s_a`` is a best
    response to ``s_b`` in ``m``.
    """
    return response_payoff(m, r, s_b) - expected_payoffs(m, s_a, s_b).a


def information_value(m: BimatrixGame, r: BimatrixGame, s_b) -> float:
    """Value of information when A's silent-case play is optimal against ``s_b``.

    Any best response of A in a cross-section is also a best response in
    ``m``, so the silent payoff is ``max_i (M s_b)_i`` and the value depends on
    ``s_b`` alone.
    """
    q = _as_probs(s_b, m.cols, "B")
    return response_payoff(m, r, q) - float((m.a @ q).max())


def full_payoff(m, r, s_a, s_b, i_val: float, x: float) -> PayoffPair:
    """Expected payoffs in the oracle game with payment ``x`` and response rate ``i_val``."""
    if x < 0:
        raise NegativePayment(f"payment {x!r} is negative")
    if not 0.0 <= i_val <= 1.0:
        raise ValueError(f"response probability {i_val!r} outside [0, 1]")
    silent = expected_payoffs(m, s_a, s_b)
    e_r = response_payoff(m, r, s_b)
    e_r_b = response_payoff_b(r, s_b)
    return PayoffPair(
        silent.a * (1.0 - i_val) + e_r * i_val - x,
        silent.b * (1.0 - i_val) + e_r_b * i_val,
    )


def check_nonnegative_value(v: float, tol: float = 1e-9) -> float:
    if v < -tol:
        raise ConsistencyError(f"value of information {v!r} is negative at an equilibrium")
    return v
