"""Parameter sweeps over one-parameter oracle families (``I = sqrt(k x)`` etc.)."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import OracleGameError
from .game import BimatrixGame, maximal_matrix
from .oracle import family
from .solver import OracleEquilibrium, solve_oracle_game

HEADER = ("k", "case", "x_e", "I_xe", "E_a", "E_b", "V", "node_flags", "label", "error")
JOBS_ENV = "ORACLE_GAMES_JOBS"


@dataclass(frozen=True)
class SweepConfig:
    family: str = "sqrt_k"
    k_from: float = 0.1
    k_to: float = 5.0
    steps: int = 500
    x_cap: float | None = None
    verify: bool = False
    jobs: int | None = None

    def ks(self) -> np.ndarray:
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if not self.k_to > self.k_from > 0:
            raise ValueError("need 0 < k_from < k_to")
        return np.linspace(self.k_from, self.k_to, self.steps)


@dataclass(frozen=True)
class SweepRow:
    k: float
    case: int | None
    case_label: str
    x_e: float
    i_at_x_e: float
    e_a: float
    e_b: float
    v_at_eq: float
    node_flags: str
    error: str = ""
    equilibrium: OracleEquilibrium | None = None

    def cells(self) -> list[str]:
        num = lambda v: "" if v is None or v != v else f"{v:.12g}"  # noqa: E731
        return [num(self.k), "" if self.case is None else str(self.case), num(self.x_e),
                num(self.i_at_x_e), num(self.e_a), num(self.e_b), num(self.v_at_eq),
                self.node_flags, self.case_label, self.error]


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _flags(eq: OracleEquilibrium) -> str:
    flags = []
    if eq.node_i is not None:
        flags.append(f"node@I={eq.node_i:.12g}")
    lo, hi = eq.x_multiplicity
    if hi > lo:
        flags.append(f"flat[{lo:.12g},{hi:.12g}]")
    return ";".join(flags)


def sweep_row(m: BimatrixGame, name: str, k: float, x_cap=None, verify: bool = False) -> SweepRow:
    nan = float("nan")
    f = family(name, float(k), x_cap=x_cap)
    try:
        eq = solve_oracle_game(m, f)
    except OracleGameError as exc:
        return SweepRow(float(k), None, "", nan, nan, nan, nan, nan, "",
                        f"{type(exc).__name__}: {exc}")
    err = ""
    if verify:
        from .verify import deviation_check

        cert = deviation_check(m, maximal_matrix(m), f, eq)
        if not cert.passed:
            err = f"verification failed: {cert.worst_deviation}"
    return SweepRow(float(k), eq.case_index, eq.case_label, eq.x, eq.i_val, eq.e_a, eq.e_b,
                    eq.v_at_eq, _flags(eq), err, eq)


def _row_task(args):
    return sweep_row(*args)


def sweep(m: BimatrixGame, cfg: SweepConfig) -> list[SweepRow]:
    """One row per ``k`` in increasing order, computed in parallel when ``jobs > 1``."""
    tasks = [(m, cfg.family, float(k), cfg.x_cap, cfg.verify) for k in cfg.ks()]
    jobs = cfg.jobs or default_jobs()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row_task, tasks, chunksize=8))
    return [_row_task(t) for t in tasks]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for row in rows:
        w.writerow(row.cells())
    return buf.getvalue()


def _case_at(m, name, k, x_cap):
    return solve_oracle_game(m, family(name, k, x_cap=x_cap)).case_index


def locate_case_boundaries(m: BimatrixGame, rows, name: str = "sqrt_k", x_cap=None,
                           tol: float = 1e-9) -> list[tuple[float, int, int]]:
    """Refine each change of case between adjacent sweep rows by bisection on ``k``."""
    out = []
    good = [r for r in rows if r.case is not None]
    for a, b in zip(good[:-1], good[1:]):
        if a.case == b.case:
            continue
        lo, hi = a.k, b.k
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _case_at(m, name, mid, x_cap) == a.case:
                lo = mid
            else:
                hi = mid
        out.append((0.5 * (lo + hi), a.case, b.case))
    return out
