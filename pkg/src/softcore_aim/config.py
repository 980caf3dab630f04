"""Run configuration: flat ``key = value`` text with a typed schema.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Numeric parameters accept arithmetic expressions (``20/3``, ``sqrt(2)``,
``-2/(3+1)``).  Integer and decimal literals are kept exact, so ``0.89442``
means exactly 89442/100000.  Expressions are stored verbatim and evaluated at
the working precision when a command runs.
"""
from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from .errors import ConfigError

MODES = ("solve", "exact", "constraints", "wavefunction", "radius", "table")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class Key:
    kind: str  # expr | int | intlist | str | choice
    default: object = None
    choices: tuple = ()
    doc: str = ""


SCHEMA = {
    "mode": Key("choice", None, MODES, "command to run"),
    # potential and quantum numbers
    "a": Key("expr", None, doc="softcore strength (energy x length)"),
    "b": Key("expr", None, doc="oscillator strength, potential term b^2 r^2 (b > 0)"),
    "c": Key("expr", None, doc="linear strength (energy / length)"),
    "beta": Key("expr", "0", doc="core softening length (>= 0)"),
    "d": Key("intlist", "3", doc="dimension(s), e.g. 4 or 4,5"),
    "ell": Key("intlist", "0", doc="angular momentum, e.g. 0 or 0..5"),
    "R": Key("expr", None, doc="box radius (length); omit for soft confinement"),
    # precision and AIM
    "digits": Key("int", None, doc="reported significant digits (default $SOFTCORE_AIM_DIGITS or 50)"),
    "guard_digits": Key("int", "10"),
    "r0": Key("expr", "auto", doc="AIM evaluation point (length) or auto"),
    "nmin": Key("int", "20", doc="first N of the schedule"),
    "nstep": Key("int", "10"),
    "nmax": Key("int", "200", doc="last N of the schedule"),
    "tol": Key("expr", None, doc="convergence tolerance between successive N (default 10^(20-digits))"),
    "e_min": Key("expr", None, doc="lower end of the energy scan"),
    "e_max": Key("expr", None, doc="upper end of the energy scan"),
    "count": Key("int", "1", doc="number of levels per (d, ell)"),
    "grid_per_unit": Key("int", "64", doc="scan points per unit energy"),
    "variant": Key("choice", "generic", ("generic", "factored")),
    # exact / constraints / wavefunction
    "family": Key("str", None, doc="catalog family (soft|pure|box) or constraint family"),
    "degree": Key("int", None),
    "free": Key("str", None, doc="parameter solved from the constraints"),
    "lo": Key("expr", None, doc="lower end of the free-parameter range"),
    "hi": Key("expr", None, doc="upper end of the free-parameter range"),
    "equation": Key("int", None),
    "root_index": Key("int", "0"),
    "r_min": Key("expr", "0.01"),
    "r_max": Key("expr", "5"),
    "r_step": Key("expr", "0.01"),
    # radius
    "energy": Key("expr", None, doc="target energy for the radius search"),
    "r_lo": Key("expr", None),
    "r_hi": Key("expr", None),
    # table
    "table": Key("choice", None, ("I", "II", "III", "IV", "V", "VI", "VII")),
    # output
    "out": Key("str", None, doc="output path (stdout when omitted)"),
    "format": Key("choice", "csv", FORMATS),
}

_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_FUNCS = {"sqrt": mpmath.sqrt, "exp": mpmath.exp, "log": mpmath.log}


def _real(x):
    return mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else x


def _eval(node, text: str):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        # exact value of the literal as written, not its binary float
        return Fraction(ast.get_source_segment(text, node))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        base, exp = _eval(node.left, text), _eval(node.right, text)
        if isinstance(exp, Fraction) and exp.denominator == 1:
            return base ** int(exp)
        return _real(base) ** _real(exp)
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
        left, right = _eval(node.left, text), _eval(node.right, text)
        if isinstance(node.op, ast.Div) and right == 0:
            raise ZeroDivisionError("division by zero")
        return _BIN[type(node.op)](left, right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id}() takes one argument")
        return _FUNCS[node.func.id](_real(_eval(node.args[0], text)))
    if isinstance(node, ast.Name) and node.id == "pi":
        return +mpmath.pi
    raise ValueError("only numbers, + - * / **, sqrt/exp/log and pi are allowed")


def evaluate_expr(text: str):
    """Evaluate a numeric expression; exact Fractions unless a function forces mpf."""
    text = text.strip()
    tree = ast.parse(text, mode="eval")
    return _eval(tree.body, text)


def _parse_intlist(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty integer list")
    return out


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)

    def raw(self, key: str):
        if key in self.values:
            return self.values[key]
        return SCHEMA[key].default

    def has(self, key: str) -> bool:
        return self.raw(key) is not None

    def get(self, key: str):
        """Typed value (expressions evaluated at the current mpmath precision)."""
        raw = self.raw(key)
        if raw is None:
            return None
        kind = SCHEMA[key].kind
        try:
            if kind == "expr":
                return None if raw == "auto" else evaluate_expr(raw)
            if kind == "int":
                return int(raw)
            if kind == "intlist":
                return _parse_intlist(raw)
            return raw
        except (ValueError, SyntaxError, ZeroDivisionError, TypeError) as exc:
            raise ConfigError(f"bad value {raw!r}: {exc}", line=self.lines.get(key), field=key) from None

    def require(self, *keys):
        missing = [k for k in keys if not self.has(k)]
        if missing:
            raise ConfigError(f"missing required key(s) for mode {self.raw('mode')}: {', '.join(missing)}")

    def set(self, key: str, value):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", field=key)
        self.values[key] = str(value)
        self.lines.pop(key, None)
        _validate(self, key)

    def resolved(self) -> dict:
        """Every schema key with its effective raw value (manifest form)."""
        return {k: self.raw(k) for k in SCHEMA if self.raw(k) is not None}


def _validate(cfg: RunConfig, key: str):
    spec = SCHEMA[key]
    raw = cfg.values[key]
    line = cfg.lines.get(key)
    if spec.kind == "choice" and raw not in spec.choices:
        raise ConfigError(f"{raw!r} is not one of {', '.join(spec.choices)}", line=line, field=key)
    if spec.kind == "expr" and raw == "auto":
        if key != "r0":
            raise ConfigError("'auto' is only allowed for r0", line=line, field=key)
        return
    with mpmath.workdps(30):
        cfg.get(key)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` text, or a JSON manifest carrying a ``config`` object."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        items = data.get("config", data)
        if not isinstance(items, dict):
            raise ConfigError("JSON config must be an object")
        cfg = RunConfig()
        for key, value in items.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}", field=key)
            cfg.values[key] = str(value)
            _validate(cfg, key)
        return cfg
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line=lineno, field=key)
        if key in cfg.values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {cfg.lines[key]})", line=lineno, field=key)
        if not value:
            raise ConfigError("empty value", line=lineno, field=key)
        cfg.values[key] = value
        cfg.lines[key] = lineno
        _validate(cfg, key)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def schema_doc() -> str:
    rows = []
    for key, spec in SCHEMA.items():
        default = "" if spec.default is None else f" (default {spec.default})"
        kind = "|".join(spec.choices) if spec.kind == "choice" else spec.kind
        rows.append(f"{key:14s} {kind:12s} {spec.doc}{default}")
    return "\n".join(rows)
