"""Tiny arithmetic expression language for user-defined families.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``exp`` and ``log`` are the only functions; any other name is a free
variable (``theta`` for parameter mappings, ``x`` for the statistic).
Parsing either succeeds completely or raises a
:class:`~gminimax.errors.SpecificationError` pointing at the offending
position.  Evaluation is vectorized: variables may be numpy arrays.
"""

from __future__ import annotations

import math
import re
import warnings

import numpy as np

from .errors import SpecificationError
from .families import FamilySpec, validate_family

__all__ = ["parse_expression", "Expression", "family_from_config"]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCTIONS = {"exp": np.exp, "log": np.log}


class Expression:
    """Parsed expression: callable with keyword variables."""

    def __init__(self, source: str, ast, variables: frozenset[str]):
        self.source = source
        self._ast = ast
        self.variables = variables

    def __call__(self, **env):
        missing = self.variables - env.keys()
        if missing:
            raise SpecificationError(
                f"expression {self.source!r} needs variable(s) "
                f"{sorted(missing)}; got {sorted(env)}"
            )
        return _eval(self._ast, env)

    def __repr__(self):
        return f"Expression({self.source!r})"


def _eval(node, env):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return np.asarray(env[node[1]], dtype=float)
    if kind == "neg":
        return -_eval(node[1], env)
    if kind == "call":
        return _FUNCTIONS[node[1]](_eval(node[2], env))
    a = _eval(node[1], env)
    b = _eval(node[2], env)
    if kind == "+":
        return a + b
    if kind == "-":
        return a - b
    if kind == "*":
        return a * b
    if kind == "/":
        return a / b
    if kind == "^":
        return np.power(a, b)
    raise AssertionError(f"unknown node {kind}")


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN_RE.match(source, pos)
            if m is None or m.end() == pos:
                stripped = source[pos:].lstrip()
                if not stripped:
                    break
                at = len(source) - len(stripped)
                self._fail(at, f"unexpected character {source[at]!r}")
            if m.group("num") is not None:
                self.tokens.append(("num", m.group("num"), m.start("num")))
            elif m.group("name") is not None:
                self.tokens.append(("name", m.group("name"), m.start("name")))
            else:
                self.tokens.append(("op", m.group("op"), m.start("op")))
            pos = m.end()
        self.i = 0
        self.variables: set[str] = set()

    def _fail(self, pos: int, message: str):
        pointer = " " * pos + "^"
        raise SpecificationError(
            f"parse error at position {pos}: {message}\n"
            f"    {self.source}\n    {pointer}"
        )

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            self._fail(len(self.source), "unexpected end of expression")
        self.i += 1
        return tok

    def _expect_op(self, op: str):
        tok = self._peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            pos = tok[2] if tok else len(self.source)
            self._fail(pos, f"expected {op!r}")
        self.i += 1

    def parse(self):
        node = self._expr()
        tok = self._peek()
        if tok is not None:
            self._fail(tok[2], f"trailing input starting with {tok[1]!r}")
        return node

    def _expr(self):
        node = self._term()
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.i += 1
                node = (tok[1], node, self._term())
            else:
                return node

    def _term(self):
        node = self._unary()
        while True:
            tok = self._peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.i += 1
                node = (tok[1], node, self._unary())
            else:
                return node

    def _unary(self):
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.i += 1
            return ("neg", self._unary())
        return self._power()

    def _power(self):
        base = self._atom()
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.i += 1
            return ("^", base, self._unary())
        return base

    def _atom(self):
        tok = self._next()
        kind, text, pos = tok
        if kind == "num":
            return ("num", float(text))
        if kind == "name":
            nxt = self._peek()
            if nxt and nxt[0] == "op" and nxt[1] == "(":
                if text not in _FUNCTIONS:
                    self._fail(
                        pos,
                        f"unknown function {text!r} (only "
                        f"{sorted(_FUNCTIONS)} are available)",
                    )
                self.i += 1
                arg = self._expr()
                self._expect_op(")")
                return ("call", text, arg)
            self.variables.add(text)
            return ("var", text)
        if kind == "op" and text == "(":
            node = self._expr()
            self._expect_op(")")
            return node
        self._fail(pos, f"unexpected token {text!r}")


def parse_expression(source: str) -> Expression:
    """Parse to a vectorized callable, or fail with a position marker."""
    if not isinstance(source, str) or not source.strip():
        raise SpecificationError("expression must be a nonempty string")
    parser = _Parser(source)
    ast = parser.parse()
    return Expression(source, ast, frozenset(parser.variables))


# ---------------------------------------------------------------------------
# Expression-defined families
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = {"name", "support", "log_norm", "mean"}
_OPTIONAL_KEYS = {"mean_deriv", "stat", "mean_range", "jeffreys_shift"}


def _endpoint(v, side: str) -> float:
    if v is None:
        return -math.inf if side == "lo" else math.inf
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s == "-inf":
            return -math.inf
        raise SpecificationError(f"bad support endpoint {v!r}")
    return float(v)


def _theta_fn(expr: Expression, label: str):
    extra = expr.variables - {"theta"}
    if extra:
        raise SpecificationError(
            f"{label} may only use the variable 'theta'; found {sorted(extra)}"
        )

    def fn(th):
        return expr(theta=th)

    return fn


def family_from_config(cfg: dict) -> FamilySpec:
    """Build and validate a family from a config mapping.

    Required keys: ``name``, ``support`` (two endpoints, ``null`` for
    infinite), ``log_norm`` and ``mean`` (expressions in ``theta``).
    Optional: ``mean_deriv`` (finite-differenced with a warning when
    omitted), ``stat`` (expression in ``x``, default ``"x"``),
    ``mean_range``, ``jeffreys_shift``.  The constructed family is
    spot-checked; violations are reported as configuration errors.
    """
    if not isinstance(cfg, dict):
        raise SpecificationError("family config must be a mapping")
    unknown = set(cfg) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise SpecificationError(
            f"unknown family config key(s) {sorted(unknown)}; allowed: "
            f"{sorted(_REQUIRED_KEYS | _OPTIONAL_KEYS)}"
        )
    missing = _REQUIRED_KEYS - set(cfg)
    if missing:
        raise SpecificationError(f"family config missing key(s) {sorted(missing)}")

    support_raw = cfg["support"]
    if not isinstance(support_raw, (list, tuple)) or len(support_raw) != 2:
        raise SpecificationError("support must be a two-element list")
    support = (_endpoint(support_raw[0], "lo"), _endpoint(support_raw[1], "hi"))

    log_norm = _theta_fn(parse_expression(cfg["log_norm"]), "log_norm")
    mean = _theta_fn(parse_expression(cfg["mean"]), "mean")

    if "mean_deriv" in cfg and cfg["mean_deriv"] is not None:
        mean_deriv = _theta_fn(parse_expression(cfg["mean_deriv"]), "mean_deriv")
    else:
        warnings.warn(
            f"family {cfg['name']!r}: mean_deriv not supplied; using a "
            "central finite difference of mean",
            stacklevel=2,
        )

        def mean_deriv(th):
            th = np.asarray(th, dtype=float)
            h = 1e-6 * np.maximum(1.0, np.abs(th))
            # keep both probe points strictly inside the support
            if math.isfinite(support[0]):
                h = np.minimum(h, 0.5 * (th - support[0]))
            if math.isfinite(support[1]):
                h = np.minimum(h, 0.5 * (support[1] - th))
            return (np.asarray(mean(th + h)) - np.asarray(mean(th - h))) / (2 * h)

    stat_expr = parse_expression(cfg.get("stat") or "x")
    extra = stat_expr.variables - {"x"}
    if extra:
        raise SpecificationError(
            f"stat may only use the variable 'x'; found {sorted(extra)}"
        )

    mean_range = None
    if cfg.get("mean_range") is not None:
        mr = cfg["mean_range"]
        if not isinstance(mr, (list, tuple)) or len(mr) != 2:
            raise SpecificationError("mean_range must be a two-element list")
        mean_range = (_endpoint(mr[0], "lo"), _endpoint(mr[1], "hi"))

    shift = None
    if cfg.get("jeffreys_shift") is not None:
        js = cfg["jeffreys_shift"]
        if not isinstance(js, (list, tuple)) or len(js) != 2:
            raise SpecificationError("jeffreys_shift must be a two-element list")
        shift = (float(js[0]), float(js[1]))

    fam = FamilySpec(
        name=str(cfg["name"]),
        support=support,
        log_norm=log_norm,
        mean=mean,
        mean_deriv=mean_deriv,
        stat=lambda x: stat_expr(x=x),
        mean_range=mean_range,
        jeffreys_shift=shift,
    )
    problems = validate_family(fam)
    if problems:
        raise SpecificationError(
            f"family {fam.name!r} failed validation: " + "; ".join(problems)
        )
    return fam
