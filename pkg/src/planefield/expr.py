"""Scalar expression DSL with exact first-order differentiation.

Every metric entry, 1-form component and vector-field component in the
toolkit is a closed-form expression over the three coordinates of a chart.
Expressions are parsed once into an immutable AST and evaluated with
first-order jets (value plus the three chart partials), so downstream
geometry sees exact derivatives instead of finite differences.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-r^2`` is ``-(r^2)`` while ``2^-3`` still parses.  Numbers are decimal
with an optional exponent, identifiers are ``[a-zA-Z_][a-zA-Z0-9_]*``.

Built-in functions: ``sin``, ``cos``, ``exp``, ``sqrt``,
``smoothstep(a, b, x)`` and ``dsmoothstep(a, b, x)`` (the x-derivative of
``smoothstep``; emitted by code that constructs twisted metrics).  The
named constant ``pi`` is always in scope.

``smoothstep`` is the exp-based C-infinity step: with ``w = (x-a)/(b-a)``
and ``sigma(u) = exp(-1/u)`` for ``u > 0`` (0 otherwise), it returns
``sigma(w) / (sigma(w) + sigma(1-w))``: identically 0 for ``x <= a``,
identically 1 for ``x >= b`` and strictly increasing in between, with all
derivatives vanishing at both ends.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ArityError, DomainError, ParseError, UnknownIdentifierError

__all__ = [
    "Jet1", "Node", "Num", "Coord", "Const", "Neg", "BinOp", "Call",
    "parse", "eval_jet", "evaluate", "to_string", "substitute",
    "smoothstep", "smoothstep_deriv", "coord_indices",
    "CONSTANTS", "FUNCTIONS",
]

CONSTANTS: dict[str, float] = {"pi": math.pi}

# function name -> arity
FUNCTIONS: dict[str, int] = {
    "sin": 1, "cos": 1, "exp": 1, "sqrt": 1,
    "smoothstep": 3, "dsmoothstep": 3,
}


# ---------------------------------------------------------------------------
# first-order jets


class Jet1:
    """Value of a scalar together with its three chart partials.

    ``value`` has an arbitrary batch shape S and ``gradient`` has shape
    ``(3,) + S``; all arithmetic obeys the exact product/quotient/chain
    rules, never finite differences.  Instances are cheap containers and
    are safe to share between threads (nothing mutates them).
    """

    __slots__ = ("value", "gradient")

    def __init__(self, value, gradient):
        self.value = np.asarray(value, dtype=float)
        self.gradient = np.asarray(gradient, dtype=float)

    @classmethod
    def constant(cls, value, shape=()):
        v = np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
        return cls(v, np.zeros((3,) + shape))

    def _lift(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            return other
        return Jet1.constant(other, self.value.shape)

    def __add__(self, other):
        o = self._lift(other)
        return Jet1(self.value + o.value, self.gradient + o.gradient)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Jet1(self.value - o.value, self.gradient - o.gradient)

    def __rsub__(self, other):
        o = self._lift(other)
        return Jet1(o.value - self.value, o.gradient - self.gradient)

    def __mul__(self, other):
        o = self._lift(other)
        return Jet1(self.value * o.value,
                    self.gradient * o.value + self.value * o.gradient)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if np.any(o.value == 0.0):
            raise DomainError("divide", 0.0, "division by zero")
        inv = 1.0 / o.value
        return Jet1(self.value * inv,
                    (self.gradient - self.value * inv * o.gradient) * inv)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __neg__(self):
        return Jet1(-self.value, -self.gradient)

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("Jet1 ** expects a plain number")
        return _jet_pow_number(self, float(exponent))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Jet1(value={self.value!r}, gradient={self.gradient!r})"


def _jet_unary(j: Jet1, f: Callable, fd: Callable) -> Jet1:
    """Chain rule for a scalar function with known derivative."""
    return Jet1(f(j.value), fd(j.value) * j.gradient)


def jet_sin(j: Jet1) -> Jet1:
    return _jet_unary(j, np.sin, np.cos)


def jet_cos(j: Jet1) -> Jet1:
    return _jet_unary(j, np.cos, lambda v: -np.sin(v))


def jet_exp(j: Jet1) -> Jet1:
    return _jet_unary(j, np.exp, np.exp)


def jet_sqrt(j: Jet1) -> Jet1:
    v = j.value
    if np.any(v < 0.0):
        raise DomainError("sqrt", float(np.min(v)))
    root = np.sqrt(v)
    with np.errstate(divide="ignore"):
        d = np.where(root > 0.0, 0.5 / np.where(root > 0.0, root, 1.0), np.inf)
    # 0 * inf at the apex of sqrt: a constant argument has zero gradient there
    grad = np.where(j.gradient == 0.0, 0.0, d * j.gradient)
    return Jet1(root, grad)


def _jet_pow_number(base: Jet1, e: float) -> Jet1:
    if float(e).is_integer():
        n = int(e)
        if n == 0:
            return Jet1.constant(1.0, base.value.shape)
        if n < 0 and np.any(base.value == 0.0):
            raise DomainError("power", 0.0, f"0 raised to {n}")
        val = base.value ** n
        dval = n * base.value ** (n - 1)
        return Jet1(val, dval * base.gradient)
    if np.any(base.value <= 0.0):
        raise DomainError("power", float(np.min(base.value)),
                          "non-integer exponent requires a positive base")
    val = base.value ** e
    return Jet1(val, e * val / base.value * base.gradient)


def _jet_pow(base: Jet1, expo: Jet1) -> Jet1:
    # general b^e = exp(e log b); only reached for a non-constant exponent
    if np.any(base.value <= 0.0):
        raise DomainError("power", float(np.min(base.value)),
                          "non-integer exponent requires a positive base")
    logb = np.log(base.value)
    val = np.exp(expo.value * logb)
    grad = val * (expo.gradient * logb
                  + expo.value / base.value * base.gradient)
    return Jet1(val, grad)


# ---------------------------------------------------------------------------
# the C-infinity step and its first two derivatives


def _bump(u: np.ndarray) -> np.ndarray:
    """exp(-1/u) for u > 0, else 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    pos = u > 0.0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _bump_d1(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    pos = u > 0.0
    up = u[pos]
    out[pos] = np.exp(-1.0 / up) / (up * up)
    return out


def _bump_d2(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    pos = u > 0.0
    up = u[pos]
    out[pos] = np.exp(-1.0 / up) * (1.0 - 2.0 * up) / up ** 4
    return out


def _transition(w: np.ndarray) -> np.ndarray:
    n = _bump(w)
    return n / (n + _bump(1.0 - w))


def _transition_d1(w: np.ndarray) -> np.ndarray:
    n, m = _bump(w), _bump(1.0 - w)
    d = n + m
    return (_bump_d1(w) * m + n * _bump_d1(1.0 - w)) / (d * d)


def _transition_d2(w: np.ndarray) -> np.ndarray:
    n, m = _bump(w), _bump(1.0 - w)
    n1, m1 = _bump_d1(w), _bump_d1(1.0 - w)
    d = n + m
    a = n1 * m + n * m1
    a1 = _bump_d2(w) * m - n * _bump_d2(1.0 - w)
    d1 = n1 - m1
    return (a1 * d - 2.0 * a * d1) / d ** 3


def smoothstep(a, b, x):
    """C-infinity step: 0 for x <= a, 1 for x >= b, strictly increasing
    in between.  Accepts floats, arrays or :class:`Jet1` in any slot."""
    if any(isinstance(v, Jet1) for v in (a, b, x)):
        shape = next(v.value.shape for v in (a, b, x) if isinstance(v, Jet1))
        ja = a if isinstance(a, Jet1) else Jet1.constant(a, shape)
        jb = b if isinstance(b, Jet1) else Jet1.constant(b, shape)
        jx = x if isinstance(x, Jet1) else Jet1.constant(x, shape)
        if not np.all(ja.value < jb.value):
            raise DomainError("smoothstep", (float(np.max(ja.value - jb.value))),
                              "requires a < b")
        w = (jx - ja) / (jb - ja)
        return _jet_unary(w, _transition, _transition_d1)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.all(a < b):
        raise DomainError("smoothstep", float(np.max(a - b)), "requires a < b")
    out = _transition((np.asarray(x, dtype=float) - a) / (b - a))
    return float(out) if out.ndim == 0 else out


def smoothstep_deriv(a, b, x):
    """d/dx of :func:`smoothstep`; zero outside (a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.all(a < b):
        raise DomainError("smoothstep", float(np.max(a - b)), "requires a < b")
    out = _transition_d1((np.asarray(x, dtype=float) - a) / (b - a)) / (b - a)
    return float(out) if out.ndim == 0 else out


def _jet_smoothstep(ja: Jet1, jb: Jet1, jx: Jet1) -> Jet1:
    return smoothstep(ja, jb, jx)


def _jet_dsmoothstep(ja: Jet1, jb: Jet1, jx: Jet1) -> Jet1:
    if not np.all(ja.value < jb.value):
        raise DomainError("smoothstep", float(np.max(ja.value - jb.value)),
                          "requires a < b")
    w = (jx - ja) / (jb - ja)
    return _jet_unary(w, _transition_d1, _transition_d2) / (jb - ja)


# ---------------------------------------------------------------------------
# AST


class Node:
    """Base class of AST nodes.  Arithmetic operators build new trees, so
    expressions compose programmatically the same way they parse."""

    __slots__ = ()

    def __add__(self, other):
        return _binop("+", self, _coerce(other))

    def __radd__(self, other):
        return _binop("+", _coerce(other), self)

    def __sub__(self, other):
        return _binop("-", self, _coerce(other))

    def __rsub__(self, other):
        return _binop("-", _coerce(other), self)

    def __mul__(self, other):
        return _binop("*", self, _coerce(other))

    def __rmul__(self, other):
        return _binop("*", _coerce(other), self)

    def __truediv__(self, other):
        return _binop("/", self, _coerce(other))

    def __rtruediv__(self, other):
        return _binop("/", _coerce(other), self)

    def __pow__(self, other):
        return _binop("^", self, _coerce(other))

    def __neg__(self):
        child = self
        if isinstance(child, Num):
            return Num(-child.value)
        return Neg(child)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Num(Node):
    value: float


@dataclass(frozen=True, eq=True)
class Coord(Node):
    name: str
    index: int


@dataclass(frozen=True, eq=True)
class Const(Node):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, eq=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True, eq=True)
class Call(Node):
    func: str
    args: tuple


def _coerce(value) -> Node:
    if isinstance(value, Node):
        return value
    if isinstance(value, (int, float)):
        return Num(float(value))
    raise TypeError(f"cannot use {type(value).__name__} in an expression")


_FOLD = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": lambda a, b: math.pow(a, b),
}


def _binop(op: str, left: Node, right: Node) -> Node:
    # constant folding on literal pairs; anything invalid stays a node and
    # surfaces as a DomainError at evaluation time
    if isinstance(left, Num) and isinstance(right, Num):
        try:
            folded = _FOLD[op](left.value, right.value)
        except (ZeroDivisionError, OverflowError, ValueError):
            folded = None
        if folded is not None and math.isfinite(folded):
            return Num(float(folded))
    return BinOp(op, left, right)


# ---------------------------------------------------------------------------
# tokenizer / parser

_NUM_RE = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"(?P<num>{_NUM_RE})|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Token:
    kind: str   # 'num' | 'ident' | one of + - * / ^ ( ) , | 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        if m.lastgroup == "num":
            tokens.append(_Token("num", m.group(), i))
        elif m.lastgroup == "ident":
            tokens.append(_Token("ident", m.group(), i))
        else:
            tokens.append(_Token(m.group(), m.group(), i))
        i = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


_ATOM_EXPECTED = ("number", "identifier", "'('", "'-'")


class _Parser:
    def __init__(self, tokens, coords):
        self.tokens = tokens
        self.pos = 0
        self.coords = {name: i for i, name in enumerate(coords)}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"got {tok.text or 'end of input'!r}", tok.pos,
                             (f"'{kind}'",))
        return self.advance()

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            node = _binop(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            node = _binop(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        if self.peek().kind == "-":
            self.advance()
            return -self.parse_factor()
        return self.parse_power()

    def parse_power(self) -> Node:
        node = self.parse_atom()
        if self.peek().kind == "^":
            self.advance()
            node = _binop("^", node, self.parse_factor())
        return node

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.peek().kind == "(":
                if name not in FUNCTIONS:
                    raise UnknownIdentifierError(name, tok.pos)
                self.advance()
                args = [self.parse_expr()]
                while self.peek().kind == ",":
                    self.advance()
                    args.append(self.parse_expr())
                self.expect(")")
                arity = FUNCTIONS[name]
                if len(args) != arity:
                    raise ArityError(name, arity, len(args), tok.pos)
                return Call(name, tuple(args))
            if name in self.coords:
                return Coord(name, self.coords[name])
            if name in CONSTANTS:
                return Const(name)
            raise UnknownIdentifierError(name, tok.pos)
        raise ParseError(f"got {tok.text or 'end of input'!r}", tok.pos,
                         _ATOM_EXPECTED)


def parse(text: str, coords: Sequence[str]) -> Node:
    """Parse ``text`` into an AST over exactly three chart coordinates."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0, _ATOM_EXPECTED)
    coords = tuple(coords)
    if len(coords) != 3 or len(set(coords)) != 3:
        raise ValueError(f"need 3 distinct coordinate names, got {coords!r}")
    for name in coords:
        if name in CONSTANTS or name in FUNCTIONS:
            raise ValueError(f"coordinate name {name!r} shadows a built-in")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ValueError(f"invalid coordinate name {name!r}")
    parser = _Parser(_tokenize(text), coords)
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
    return node


# ---------------------------------------------------------------------------
# evaluation


def eval_jet(expr: Node, point) -> Jet1:
    """Evaluate ``expr`` at a point (shape ``(3,)``) or a batch of points
    (shape ``(3, ...)``), returning value plus exact partials."""
    p = np.asarray(point, dtype=float)
    if p.ndim < 1 or p.shape[0] != 3:
        raise ValueError(f"point must have shape (3, ...), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point", "non-finite", "point must be finite")
    return _eval(expr, p, p.shape[1:])


def evaluate(expr: Node, point) -> float:
    """Value-only convenience wrapper around :func:`eval_jet`."""
    out = eval_jet(expr, point).value
    return float(out) if out.ndim == 0 else out


_UNARY_JETS = {"sin": jet_sin, "cos": jet_cos, "exp": jet_exp, "sqrt": jet_sqrt}


def _eval(expr: Node, p: np.ndarray, shape: tuple) -> Jet1:
    if isinstance(expr, Num):
        return Jet1.constant(expr.value, shape)
    if isinstance(expr, Coord):
        grad = np.zeros((3,) + shape)
        grad[expr.index] = 1.0
        return Jet1(np.broadcast_to(p[expr.index], shape).copy(), grad)
    if isinstance(expr, Const):
        return Jet1.constant(CONSTANTS[expr.name], shape)
    if isinstance(expr, Neg):
        return -_eval(expr.arg, p, shape)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, p, shape)
        if expr.op == "^":
            if isinstance(expr.right, Num):
                return _jet_pow_number(left, expr.right.value)
            return _jet_pow(left, _eval(expr.right, p, shape))
        right = _eval(expr.right, p, shape)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        return left / right
    if isinstance(expr, Call):
        args = [_eval(a, p, shape) for a in expr.args]
        if expr.func in _UNARY_JETS:
            return _UNARY_JETS[expr.func](args[0])
        if expr.func == "smoothstep":
            return _jet_smoothstep(*args)
        return _jet_dsmoothstep(*args)
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------------------
# printing (normal form), substitution, inspection

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD,
                "*": _PREC_MUL, "/": _PREC_MUL,
                "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _leads_with_minus(node: Node) -> bool:
    return isinstance(node, Neg) or (isinstance(node, Num) and node.value < 0)


def _fmt_number(value: float) -> str:
    if value == 0.0 and math.copysign(1.0, value) < 0:
        return "-0.0"
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(node: Node) -> str:
    """Print a stable normal form: ``parse(to_string(e))`` rebuilds ``e``
    (up to folding a negated literal into the literal)."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, (Coord, Const)):
        return node.name
    if isinstance(node, Neg):
        # a negation chain over a literal reparses as a folded literal, so
        # print it that way in the first place
        depth, cur = 0, node
        while isinstance(cur, Neg):
            depth += 1
            cur = cur.arg
        if isinstance(cur, Num):
            return _fmt_number(cur.value if depth % 2 == 0 else -cur.value)
        inner = to_string(node.arg)
        if _prec(node.arg) < _PREC_NEG or _leads_with_minus(node.arg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_string(a) for a in node.args)})"
    if isinstance(node, BinOp):
        lp, rp = _prec(node.left), _prec(node.right)
        left, right = to_string(node.left), to_string(node.right)
        if node.op in ("+", "-"):
            if lp < _PREC_ADD:
                left = f"({left})"
            if rp <= _PREC_ADD or _leads_with_minus(node.right):
                right = f"({right})"
            return f"{left} {node.op} {right}"
        if node.op in ("*", "/"):
            if lp < _PREC_MUL:
                left = f"({left})"
            if rp <= _PREC_MUL or _leads_with_minus(node.right):
                right = f"({right})"
            return f"{left}{node.op}{right}"
        # '^': right-associative, exponent may start with unary minus
        if lp <= _PREC_POW or _leads_with_minus(node.left):
            left = f"({left})"
        if rp < _PREC_NEG:
            right = f"({right})"
        return f"{left}^{right}"
    raise TypeError(f"not an expression node: {node!r}")


def substitute(node: Node, mapping: Mapping[str, Node]) -> Node:
    """Replace coordinates by expressions (used for pullbacks); coordinates
    not named in ``mapping`` are kept as they are."""
    if isinstance(node, Coord):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return -substitute(node.arg, mapping)
    if isinstance(node, BinOp):
        return _binop(node.op,
                      substitute(node.left, mapping),
                      substitute(node.right, mapping))
    if isinstance(node, Call):
        return Call(node.func, tuple(substitute(a, mapping) for a in node.args))
    return node


def coord_indices(node: Node) -> set:
    """Set of coordinate indices an expression actually depends on."""
    out: set = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Coord):
            out.add(cur.index)
        elif isinstance(cur, Neg):
            stack.append(cur.arg)
        elif isinstance(cur, BinOp):
            stack.append(cur.left)
            stack.append(cur.right)
        elif isinstance(cur, Call):
            stack.extend(cur.args)
    return out
