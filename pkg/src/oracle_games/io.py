"""JSON game and oracle files.

Game file::

    {"payoffs": [[[1, -1], [0, 0]], [[0, 0], [2, -2]]],
     "row_labels": ["A1", "A2"], "col_labels": ["B1", "B2"],
     "class": "strictly_competitive"}

Oracle file::

    {"family": "sqrt_k", "params": {"k": 1.0}, "x_cap": null}
    {"family": "piecewise_linear", "points": [[0, 0], [1, 0.5], [3, 1]]}

Samples file (input to normalisation; need not be monotone)::

    {"samples": [[0, 0.1], [0.5, 0.4], [1, 0.3]]}

Errors point at the offending line and column of the file.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import SpecFileError
from .game import BimatrixGame
from .oracle import KINDS, PARAM_NAMES, OracleFunction

GAME_CLASSES = ("general", "strictly_competitive")


def _position(text: str, key: str | None):
    """1-based (line, column) of the first ``"key"`` in ``text``."""
    if key is None:
        return None, None
    hit = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not hit:
        return None, None
    line = text.count("\n", 0, hit.start()) + 1
    col = hit.start() - (text.rfind("\n", 0, hit.start()) + 1) + 1
    return line, col


def _load(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecFileError(f"cannot read file: {exc.strerror}", path) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(exc.msg, path, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise SpecFileError("top level must be an object", path, 1, 1)
    return path, text, data


def _fail(msg, path, text, key):
    line, col = _position(text, key)
    return SpecFileError(msg, path, line, col)


def _number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def parse_game(data: dict, path=None, text: str = "") -> BimatrixGame:
    cells = data.get("payoffs")
    if not isinstance(cells, list) or not cells:
        raise _fail("'payoffs' must be a non-empty list of rows", path, text, "payoffs")
    width = None
    for i, row in enumerate(cells):
        if not isinstance(row, list) or not row:
            raise _fail(f"row {i} must be a non-empty list of [a, b] pairs", path, text, "payoffs")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise _fail(f"row {i} has {len(row)} cells, expected {width}", path, text, "payoffs")
        for j, cell in enumerate(row):
            if not (isinstance(cell, list) and len(cell) == 2 and all(map(_number, cell))):
                raise _fail(f"cell ({i}, {j}) must be a pair of finite numbers",
                            path, text, "payoffs")
    labels = {}
    for key, size in (("row_labels", len(cells)), ("col_labels", width)):
        lab = data.get(key)
        if lab is not None:
            if not (isinstance(lab, list) and len(lab) == size and all(isinstance(s, str) for s in lab)):
                raise _fail(f"'{key}' must list {size} strings", path, text, key)
            labels[key] = lab
    game = BimatrixGame.from_pairs(cells, **labels)
    declared = data.get("class", "general")
    if declared not in GAME_CLASSES:
        raise _fail(f"'class' must be one of {GAME_CLASSES}", path, text, "class")
    if declared == "strictly_competitive" and not game.is_strictly_competitive():
        raise _fail("game is declared strictly_competitive but some pair of cells ranks "
                    "the same way for both players", path, text, "class")
    return game


def read_game(path) -> BimatrixGame:
    path, text, data = _load(path)
    return parse_game(data, path, text)


def game_to_dict(game: BimatrixGame, declared: str | None = None) -> dict:
    out = {"payoffs": game.to_pairs()}
    if game.row_labels is not None:
        out["row_labels"] = list(game.row_labels)
    if game.col_labels is not None:
        out["col_labels"] = list(game.col_labels)
    if declared is not None:
        out["class"] = declared
    return out


def write_game(game: BimatrixGame, path, declared: str | None = None) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game, declared), indent=2) + "\n",
                          encoding="utf-8")


def parse_oracle(data: dict, path=None, text: str = "") -> OracleFunction:
    kind = data.get("family")
    if kind not in KINDS:
        raise _fail(f"'family' must be one of {KINDS}", path, text, "family")
    x_cap = data.get("x_cap")
    if x_cap is not None and not (_number(x_cap) and x_cap > 0):
        raise _fail("'x_cap' must be a positive number or null", path, text, "x_cap")
    try:
        if kind == "piecewise_linear":
            pts = data.get("points")
            if not isinstance(pts, list) or not all(
                    isinstance(p, list) and len(p) == 2 and all(map(_number, p)) for p in pts):
                raise _fail("'points' must be a list of [x, I] pairs", path, text, "points")
            return OracleFunction(kind, points=tuple(map(tuple, pts)), x_cap=x_cap)
        params = data.get("params", {})
        names = PARAM_NAMES[kind]
        if isinstance(params, dict):
            missing = [n for n in names if n not in params]
            if missing:
                raise _fail(f"{kind} needs parameter(s) {missing}", path, text, "params")
            values = [params[n] for n in names]
        elif isinstance(params, list):
            values = params
        else:
            raise _fail("'params' must be an object or a list", path, text, "params")
        if not all(map(_number, values)):
            raise _fail("parameters must be finite numbers", path, text, "params")
        return OracleFunction(kind, tuple(values), x_cap=x_cap)
    except SpecFileError:
        raise
    except ValueError as exc:
        raise _fail(str(exc), path, text, "points" if kind == "piecewise_linear" else "params")


def read_oracle(path) -> OracleFunction:
    path, text, data = _load(path)
    return parse_oracle(data, path, text)


def oracle_to_dict(f: OracleFunction) -> dict:
    out: dict = {"family": f.kind}
    if f.kind == "piecewise_linear":
        out["points"] = [list(p) for p in f.points]
    else:
        out["params"] = dict(zip(PARAM_NAMES[f.kind], f.params))
    out["x_cap"] = f.x_cap
    return out


def write_oracle(f: OracleFunction, path) -> None:
    Path(path).write_text(json.dumps(oracle_to_dict(f), indent=2) + "\n", encoding="utf-8")


def read_curve(path):
    """Either an oracle file or a samples file: returns ``(oracle or None, samples or None)``."""
    path, text, data = _load(path)
    if "samples" in data:
        pts = data["samples"]
        if not isinstance(pts, list) or not all(
                isinstance(p, list) and len(p) == 2 and all(map(_number, p)) for p in pts):
            raise _fail("'samples' must be a list of [x, I] pairs", path, text, "samples")
        arr = np.asarray(pts, dtype=float).reshape(-1, 2)
        return None, arr[np.argsort(arr[:, 0], kind="stable")]
    return parse_oracle(data, path, text), None
