"""Oracle response-probability curves ``I(x)`` and their normalisation.

Four analytic families are built in (``sqrt_k``, ``sqrt_shift``,
``linear_slope``, ``constant_c``) together with ``piecewise_linear`` curves
given by breakpoints.  Every curve is capped at probability one and may carry
a payment bound ``x_cap`` beyond which it stays flat.

Normalisation turns an arbitrary sampled curve into an equivalent one that
is nondecreasing (running maximum), weakly concave (upper concave
envelope) and starts at zero (by folding ``I(0)`` into the game).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateOracle,
    EmptyInput,
    LevelUnreachable,
    NegativePayment,
    OutsideDomain,
    SlopeOutOfRange,
)
from .game import BimatrixGame, cross_section, maximal_matrix

KINDS = ("sqrt_k", "sqrt_shift", "linear_slope", "constant_c", "piecewise_linear")
PARAM_NAMES = {
    "sqrt_k": ("k",),
    "sqrt_shift": ("a",),
    "linear_slope": ("b",),
    "constant_c": ("c",),
    "piecewise_linear": (),
}
GRID_POINTS = 4096
LEVEL_TOL = 1e-12
SLOPE_RTOL = 1e-12


@dataclass(frozen=True)
class OracleFunction:
    kind: str
    params: tuple = ()
    points: tuple | None = None
    x_cap: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown oracle family {self.kind!r}; choose from {KINDS}")
        params = tuple(float(p) for p in self.params)
        if len(params) != len(PARAM_NAMES[self.kind]):
            raise ValueError(f"{self.kind} takes parameters {PARAM_NAMES[self.kind]}")
        object.__setattr__(self, "params", params)
        if self.x_cap is not None:
            if not self.x_cap > 0 or not math.isfinite(self.x_cap):
                raise ValueError(f"x_cap must be positive and finite, got {self.x_cap!r}")
            object.__setattr__(self, "x_cap", float(self.x_cap))
        if self.kind == "piecewise_linear":
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
                raise ValueError("piecewise_linear needs a list of (x, I) breakpoints")
            if pts[0, 0] != 0.0:
                raise ValueError("piecewise_linear breakpoints must start at x = 0")
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise ValueError("piecewise_linear breakpoints must be strictly increasing in x")
            if np.any(pts[:, 1] < 0) or np.any(pts[:, 1] > 1):
                raise ValueError("piecewise_linear values must lie in [0, 1]")
            object.__setattr__(self, "points", tuple(map(tuple, pts.tolist())))
        else:
            object.__setattr__(self, "points", None)
            (p,) = params
            if self.kind == "constant_c":
                if not 0.0 <= p <= 1.0:
                    raise ValueError("constant_c needs 0 <= c <= 1")
            elif self.kind == "sqrt_shift":
                if p < 0:
                    raise ValueError("sqrt_shift needs a >= 0")
            elif not p > 0:
                raise ValueError(f"{self.kind} needs a positive parameter")

    # -- helpers ----------------------------------------------------------
    @property
    def param(self) -> float:
        return self.params[0]

    def _xs_vs(self):
        pts = np.asarray(self.points)
        return pts[:, 0], pts[:, 1]

    def saturation_point(self) -> float:
        """Smallest payment at which the uncapped curve reaches one (inf if never)."""
        if self.kind == "sqrt_k":
            return 1.0 / self.param
        if self.kind == "sqrt_shift":
            return 1.0 + 2.0 * math.sqrt(self.param)
        if self.kind == "linear_slope":
            return 1.0 / self.param
        if self.kind == "constant_c":
            return 0.0 if self.param >= 1.0 else math.inf
        xs, vs = self._xs_vs()
        hit = np.flatnonzero(vs >= 1.0)
        return float(xs[hit[0]]) if hit.size else math.inf

    def x_end(self) -> float:
        """Payment beyond which nothing changes: saturation or the cap."""
        x1 = self.saturation_point()
        if self.kind == "piecewise_linear" and not math.isfinite(x1):
            x1 = self._xs_vs()[0][-1]
        return x1 if self.x_cap is None else min(x1, self.x_cap)

    def sup_value(self) -> float:
        return float(self.eval(self.x_end()))

    def with_cap(self, x_cap: float | None) -> "OracleFunction":
        return replace(self, x_cap=x_cap)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        """Nondecreasing and weakly concave (the analytic families always are)."""
        if self.kind != "piecewise_linear":
            return True
        xs, vs = self._xs_vs()
        if len(xs) < 2:
            return True
        slopes = np.diff(vs) / np.diff(xs)
        return bool(np.all(slopes >= -tol) and np.all(np.diff(slopes) <= tol))

    # -- evaluation -------------------------------------------------------
    def _raw(self, x):
        kind, xx = self.kind, np.minimum(x, self.saturation_point())
        if kind == "sqrt_k":
            return np.sqrt(self.param * xx)
        if kind == "sqrt_shift":
            a = self.param
            # rationalised form avoids cancellation near x = 0
            return xx / (np.sqrt(xx + a) + math.sqrt(a)) if a > 0 else np.sqrt(xx)
        if kind == "linear_slope":
            return self.param * xx
        if kind == "constant_c":
            return np.full_like(np.asarray(x, dtype=float), self.param)
        xs, vs = self._xs_vs()
        return np.interp(x, xs, vs)

    def eval(self, x):
        """Response probability at payment ``x`` (scalar or array)."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise NegativePayment(f"payment must be nonnegative, got {x!r}")
        if self.x_cap is not None:
            arr = np.minimum(arr, self.x_cap)
        out = np.clip(self._raw(arr), 0.0, 1.0)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval

    def derivative(self, x: float, side: str = "right") -> float:
        """One-sided derivative; ``inf`` for an infinite initial slope."""
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if x < 0:
            raise OutsideDomain(f"payment {x!r} is negative")
        if x == 0 and side == "left":
            raise OutsideDomain("only the right derivative exists at x = 0")
        if self.x_cap is not None:
            if x > self.x_cap:
                raise OutsideDomain(f"payment {x!r} exceeds x_cap {self.x_cap!r}")
            if x == self.x_cap and side == "right":
                raise OutsideDomain("only the left derivative exists at x_cap")
        kind = self.kind
        if kind == "piecewise_linear":
            xs, vs = self._xs_vs()
            slopes = np.diff(vs) / np.diff(xs)
            if side == "right":
                idx = int(np.searchsorted(xs, x, side="right")) - 1
            else:
                idx = int(np.searchsorted(xs, x, side="left")) - 1
            if idx < 0 or idx >= slopes.size:
                return 0.0
            return float(slopes[idx])
        x1 = self.saturation_point()
        if (side == "right" and x >= x1) or (side == "left" and x > x1):
            return 0.0
        if kind == "sqrt_k":
            return math.inf if x == 0 else math.sqrt(self.param) / (2.0 * math.sqrt(x))
        if kind == "sqrt_shift":
            s = x + self.param
            return math.inf if s == 0 else 0.5 / math.sqrt(s)
        if kind == "linear_slope":
            return self.param
        return 0.0

    def level_x(self, a: float) -> float:
        """Smallest payment ``x`` with ``I(x) = a``."""
        i0 = self.eval(0.0)
        top = self.sup_value()
        if a < i0 - LEVEL_TOL or a > top + LEVEL_TOL:
            raise LevelUnreachable(f"level {a!r} outside the attainable range [{i0}, {top}]")
        if a <= i0:
            return 0.0
        if a >= top:
            a = top
        kind = self.kind
        if kind == "sqrt_k":
            x = a * a / self.param
        elif kind == "sqrt_shift":
            ra = math.sqrt(self.param)
            x = a * a + 2.0 * a * ra
        elif kind == "linear_slope":
            x = a / self.param
        elif kind == "constant_c":
            x = 0.0
        else:
            xs, vs = self._xs_vs()
            j = int(np.flatnonzero(vs >= a)[0])
            if vs[j] == a or j == 0:
                x = float(xs[j])
            else:
                x = float(xs[j - 1] + (a - vs[j - 1]) * (xs[j] - xs[j - 1]) / (vs[j] - vs[j - 1]))
        if self.x_cap is not None:
            x = min(x, self.x_cap)
        return x

    def slope_x(self, b: float) -> tuple[float, float]:
        """Closed interval of payments where the derivative equals ``b``.

        Raises :class:`SlopeOutOfRange` carrying ``sup {x : I'(x) >= b}`` when
        the slope is never attained.
        """
        if not b > 0:
            raise ValueError("slope must be positive")
        end = self.x_end()
        kind = self.kind
        if kind in ("sqrt_k", "sqrt_shift"):
            if kind == "sqrt_k":
                x = self.param / (4.0 * b * b)
            else:
                x = 0.25 / (b * b) - self.param
            if x < 0:
                raise SlopeOutOfRange(b, 0.0)
            if x > end:
                raise SlopeOutOfRange(b, end)
            return (x, x)
        if kind == "linear_slope":
            b0 = self.param
            if abs(b - b0) <= SLOPE_RTOL * max(1.0, b0):
                return (0.0, end)
            raise SlopeOutOfRange(b, end if b < b0 else 0.0)
        if kind == "constant_c":
            raise SlopeOutOfRange(b, 0.0)
        xs, vs = self._xs_vs()
        if self.x_cap is not None:
            keep = xs < self.x_cap
            xs_c = np.append(xs[keep], self.x_cap)
            vs_c = np.append(vs[keep], self.eval(self.x_cap))
            xs, vs = xs_c, vs_c
        if xs.size < 2:
            raise SlopeOutOfRange(b, 0.0)
        slopes = np.diff(vs) / np.diff(xs)
        hit = np.flatnonzero(np.abs(slopes - b) <= SLOPE_RTOL * max(1.0, b))
        if hit.size:
            return (float(xs[hit[0]]), float(xs[hit[-1] + 1]))
        steep = np.flatnonzero(slopes >= b)
        raise SlopeOutOfRange(b, float(xs[steep[-1] + 1]) if steep.size else 0.0)

    def describe(self) -> str:
        if self.kind == "piecewise_linear":
            body = f"{len(self.points)} breakpoints"
        else:
            body = ", ".join(f"{n}={v:g}" for n, v in zip(PARAM_NAMES[self.kind], self.params))
        cap = "" if self.x_cap is None else f", x_cap={self.x_cap:g}"
        return f"{self.kind}({body}{cap})"


def sqrt_k(k: float, x_cap=None) -> OracleFunction:
    """``I(x) = sqrt(k x)``, capped at one."""
    return OracleFunction("sqrt_k", (k,), x_cap=x_cap)


def sqrt_shift(a: float, x_cap=None) -> OracleFunction:
    """``I(x) = sqrt(x + a) - sqrt(a)``; ``a = 1`` gives ``sqrt(x + 1) - 1``."""
    return OracleFunction("sqrt_shift", (a,), x_cap=x_cap)


def linear_slope(b: float, x_cap=None) -> OracleFunction:
    return OracleFunction("linear_slope", (b,), x_cap=x_cap)


def constant_c(c: float, x_cap=None) -> OracleFunction:
    return OracleFunction("constant_c", (c,), x_cap=x_cap)


def piecewise_linear(points, x_cap=None) -> OracleFunction:
    return OracleFunction("piecewise_linear", points=tuple(map(tuple, points)), x_cap=x_cap)


def family(name: str, k: float, x_cap=None) -> OracleFunction:
    """One-parameter families used by sweeps; larger ``k`` means cheaper information."""
    makers = {"sqrt_k": sqrt_k, "linear_slope": linear_slope, "sqrt_shift": sqrt_shift}
    if name not in makers:
        raise ValueError(f"no sweepable family {name!r}; choose from {sorted(makers)}")
    return makers[name](k, x_cap=x_cap)


# -- free-function aliases mirroring the method names --------------------
def derivative(f: OracleFunction, x: float, side: str = "right") -> float:
    return f.derivative(x, side)


def level_x(f: OracleFunction, a: float) -> float:
    return f.level_x(a)


def slope_x(f: OracleFunction, b: float) -> tuple[float, float]:
    return f.slope_x(b)


# -- normalisation ------------------------------------------------------
@dataclass(frozen=True)
class NormalizationReport:
    original: OracleFunction
    envelope: OracleFunction
    concave: OracleFunction
    shifted_game_required: bool
    shift_c: float
    grid: np.ndarray = field(repr=False, default=None)


def sample(f: OracleFunction, x_cap: float | None = None, n: int = GRID_POINTS) -> np.ndarray:
    """``(n, 2)`` array of ``(x, I(x))`` on a uniform grid over ``[0, x_cap]``."""
    cap = x_cap if x_cap is not None else f.x_cap
    if cap is None:
        cap = f.saturation_point()
        if f.kind == "piecewise_linear" and not math.isfinite(cap):
            cap = f._xs_vs()[0][-1]
        if not math.isfinite(cap) or cap <= 0:
            raise ValueError(f"{f.describe()} needs an explicit x_cap to be sampled")
    xs = np.linspace(0.0, cap, n)
    if f.kind == "piecewise_linear":
        bx = np.asarray([p[0] for p in f.points])
        xs = np.union1d(xs, bx[bx <= cap])
    return np.column_stack([xs, f.eval(xs)])


def monotone_envelope(samples: Sequence[Sequence[float]]) -> OracleFunction:
    """Running maximum ``J1(x) = sup {I(a) : a <= x}`` of sorted samples."""
    pts = np.asarray(samples, dtype=float)
    if pts.size == 0:
        raise EmptyInput("no samples given")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("samples must be (x, I) pairs")
    if np.any(np.diff(pts[:, 0]) < 0):
        raise ValueError("samples must be sorted by x")
    return piecewise_linear(np.column_stack([pts[:, 0], np.maximum.accumulate(pts[:, 1])]))


def _upper_hull(xs: np.ndarray, vs: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (xs[a] - xs[o]) * (vs[i] - vs[o]) - (vs[a] - vs[o]) * (xs[i] - xs[o])
            # drop a when it lies on or below the chord o -> i
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def concavify(f: OracleFunction, x_cap: float | None = None, n: int = GRID_POINTS) -> OracleFunction:
    """Least concave majorant, returned as a piecewise-linear curve.

    Piecewise input is used at its own breakpoints; analytic families are
    sampled on ``n`` grid points first.
    """
    if f.kind == "piecewise_linear" and x_cap is None:
        pts = np.asarray(f.points, dtype=float)
    else:
        pts = sample(f, x_cap, n)
    xs, vs = pts[:, 0], pts[:, 1]
    if xs.size == 1:
        return piecewise_linear(pts, x_cap=f.x_cap)
    hull = _upper_hull(xs, vs)
    return piecewise_linear(np.column_stack([xs[hull], vs[hull]]), x_cap=f.x_cap)


def normalize(f: OracleFunction, x_cap: float | None = None, n: int = GRID_POINTS) -> NormalizationReport:
    """Envelope then concavify, recording whether a game shift is still needed."""
    grid = sample(f, x_cap, n)
    env = monotone_envelope(grid)
    hull = concavify(env)
    c = float(hull.eval(0.0))
    return NormalizationReport(f, env, hull, c > 0.0, c, grid)


def shift_to_zero(m: BimatrixGame, f: OracleFunction):
    """Fold ``c = I(0)`` into the game: ``N = M_c`` and ``J = (I - c) / (1 - c)``.

    The identity ``N_{J(x)} = M_{I(x)}`` holds for every payment ``x``.
    """
    c = float(f.eval(0.0))
    if c == 0.0:
        return m, f
    if c >= 1.0 - LEVEL_TOL:
        raise DegenerateOracle("I(0) = 1: full information at zero cost")
    r = maximal_matrix(m)
    n_game = cross_section(m, r, c)
    if f.kind == "piecewise_linear":
        pts = np.asarray(f.points, dtype=float)
        pts[:, 1] = np.clip((pts[:, 1] - c) / (1.0 - c), 0.0, 1.0)
        j = piecewise_linear(pts, x_cap=f.x_cap)
    else:
        # only constant_c starts above zero among the analytic families
        j = constant_c(0.0, x_cap=f.x_cap)
    return n_game, j
