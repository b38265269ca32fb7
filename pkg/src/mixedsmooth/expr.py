"""Mini-language for scalar functions of ``x1..xN``.

Grammar (public, versioned contract)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' uint)?
    atom   := number | var | func '(' expr ')' | '(' expr ')' | '-' atom

Whitespace is insignificant, operators are left associative, ``^`` only
accepts a literal nonnegative integer exponent (so downstream jet
composition stays exact), and the known functions are ``sin cos exp log
sqrt tanh``.  ``abs`` is deliberately absent: it is not smooth at 0;
write ``sqrt(x1^2 + sigma^2)`` with an explicit smoothing constant instead.

``log`` and ``sqrt`` demand strictly positive arguments (sqrt is not
differentiable at zero, and evaluation shares its domain with the
derivative machinery).  Function files are UTF-8 text holding one
expression, optionally preceded by a first line ``arity: N``.

Parse diagnostics report 1-based byte offsets; end-of-input errors point
one past the last byte.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, EvalDomainError, ExprParseError

UNARY_FUNCS = ("sin", "cos", "exp", "log", "sqrt", "tanh")


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or one of UNARY_FUNCS
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int  # nonnegative literal


Expr = Union[Constant, Variable, Unary, Binary, Pow]


@dataclass(frozen=True)
class ParseDiagnostic:
    offset: int  # 1-based byte offset; len(text)+1 marks end of input
    message: str
    expected: str | None = None


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprParseError(
                ParseDiagnostic(bad_at + 1, f"unexpected character {text[bad_at]!r}")
            )
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens, arity: int):
        self.tokens = tokens
        self.pos = 0
        self.arity = arity

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, expected: str | None = None):
        raise ExprParseError(ParseDiagnostic(self.peek()[2], message, expected))

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            self.fail(f"unexpected trailing input {text!r}", expected="end of input")
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            kind, text, offset = self.peek()
            if kind != "number" or not re.fullmatch(r"\d+", text):
                self.fail(
                    "exponent must be a nonnegative integer literal",
                    expected="unsigned integer",
                )
            self.advance()
            node = Pow(node, int(text))
        return node

    def atom(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "number":
            self.advance()
            return Constant(float(text))
        if kind == "op" and text == "-":
            self.advance()
            return Unary("neg", self.atom())
        if kind == "op" and text == "(":
            self.advance()
            inner = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail("expected ')'", expected="')'")
            self.advance()
            return inner
        if kind == "ident":
            m = re.fullmatch(r"x(\d+)", text)
            if m:
                idx = int(m.group(1))
                if idx < 1:
                    self.fail("variable indices start at x1")
                if idx > self.arity:
                    self.fail(f"variable x{idx} exceeds declared arity {self.arity}")
                self.advance()
                return Variable(idx)
            if text in UNARY_FUNCS:
                self.advance()
                if self.peek()[:2] != ("op", "("):
                    self.fail(f"expected '(' after function {text!r}", expected="'('")
                self.advance()
                inner = self.expr()
                if self.peek()[:2] != ("op", ")"):
                    self.fail("expected ')'", expected="')'")
                self.advance()
                return Unary(text, inner)
            self.fail(f"unknown function or variable {text!r}")
        if kind == "end":
            self.fail("unexpected end of input", expected="expression")
        self.fail(f"unexpected token {text!r}")


def parse(text: str, arity: int) -> Expr:
    """Parse ``text`` into an AST; raise ExprParseError (with a
    ParseDiagnostic) on the first error, no recovery."""
    if not isinstance(arity, int) or arity < 0:
        raise DomainError(f"arity must be a nonnegative integer, got {arity!r}")
    if not text or not text.strip():
        raise ExprParseError(ParseDiagnostic(1, "empty expression", expected="expression"))
    return _Parser(_tokenize(text), arity).parse()


def free_arity(e: Expr) -> int:
    """Largest variable index appearing in ``e`` (0 for constants)."""
    if isinstance(e, Constant):
        return 0
    if isinstance(e, Variable):
        return e.index
    if isinstance(e, Unary):
        return free_arity(e.child)
    if isinstance(e, Binary):
        return max(free_arity(e.left), free_arity(e.right))
    if isinstance(e, Pow):
        return free_arity(e.base)
    raise TypeError(f"not an Expr node: {e!r}")


def eval_real(e: Expr, point: Sequence[float]) -> float:
    """Evaluate at a single point with Python-float arithmetic.

    Integer powers multiply out left to right, so ``x^3`` is ``(x*x)*x``.
    """
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        if e.index > len(point):
            raise DomainError(f"point has {len(point)} coordinates, needs x{e.index}")
        return float(point[e.index - 1])
    if isinstance(e, Unary):
        v = eval_real(e.child, point)
        if e.op == "neg":
            return -v
        if e.op == "log":
            if v <= 0.0:
                raise EvalDomainError(f"log of nonpositive value {v}", node=e, point=point)
            return math.log(v)
        if e.op == "sqrt":
            if v <= 0.0:
                raise EvalDomainError(f"sqrt of nonpositive value {v}", node=e, point=point)
            return math.sqrt(v)
        try:
            return getattr(math, e.op)(v)
        except (OverflowError, ValueError) as exc:
            raise EvalDomainError(f"{e.op} failed: {exc}", node=e, point=point) from exc
    if isinstance(e, Binary):
        a = eval_real(e.left, point)
        b = eval_real(e.right, point)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise EvalDomainError("division by zero", node=e, point=point)
            return a / b
        raise TypeError(f"unknown binary op {e.op!r}")
    if isinstance(e, Pow):
        base = eval_real(e.base, point)
        return _int_pow(base, e.exponent)
    raise TypeError(f"not an Expr node: {e!r}")


def _int_pow(v, k: int):
    """Left-to-right repeated multiplication; works for floats and arrays."""
    if k == 0:
        return 1.0
    out = v
    for _ in range(k - 1):
        out = out * v
    return out


def eval_many(e: Expr, points) -> "np.ndarray":
    """Vectorized evaluation over an (N, n) array of points; returns (N,).

    Domain errors report the first offending sample point.  Overflow is not
    trapped here; integrators check sample finiteness where it matters.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise DomainError("points must be a 2-D array of shape (N, n)")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        val = _eval_np(e, points)
    if np.ndim(val) == 0:
        return np.full(points.shape[0], float(val))
    return np.asarray(val, dtype=float)


def _first_bad(points, mask):
    idx = int(np.argmax(mask))
    return points[idx]


def _eval_np(e: Expr, points):
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        return points[:, e.index - 1]
    if isinstance(e, Unary):
        v = _eval_np(e.child, points)
        if e.op == "neg":
            return -v
        if e.op in ("log", "sqrt"):
            bad = np.asarray(v) <= 0.0
            if np.any(bad):
                raise EvalDomainError(
                    f"{e.op} of nonpositive value",
                    node=e,
                    point=_first_bad(points, np.broadcast_to(bad, (points.shape[0],))),
                )
        return getattr(np, e.op)(v)
    if isinstance(e, Binary):
        a = _eval_np(e.left, points)
        b = _eval_np(e.right, points)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            bad = np.asarray(b) == 0.0
            if np.any(bad):
                raise EvalDomainError(
                    "division by zero",
                    node=e,
                    point=_first_bad(points, np.broadcast_to(bad, (points.shape[0],))),
                )
            return a / b
    if isinstance(e, Pow):
        return _int_pow(_eval_np(e.base, points), e.exponent)
    raise TypeError(f"not an Expr node: {e!r}")


# ---------------------------------------------------------------------------
# printing, substitution, differentiation

# grammar levels: expr=0, term=1, factor=2, atom=3
_EXPR, _TERM, _FACTOR, _ATOM = 0, 1, 2, 3


def pretty(e: Expr) -> str:
    """Render with minimal parentheses; parse(pretty(e)) rebuilds ``e``
    node for node (modulo folding a literal negative constant into the
    grammar's unary minus)."""
    return _pretty(e, _EXPR)


def _pretty(e: Expr, required: int) -> str:
    s, level = _render(e)
    if level < required:
        return f"({s})"
    return s


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Constant):
        if e.value < 0:
            return f"-{_fmt_number(-e.value)}", _ATOM
        return _fmt_number(e.value), _ATOM
    if isinstance(e, Variable):
        return f"x{e.index}", _ATOM
    if isinstance(e, Unary):
        if e.op == "neg":
            # '-' binds an atom, so '-x1^2' means (-x1)^2 under this grammar
            return f"-{_pretty(e.child, _ATOM)}", _ATOM
        return f"{e.op}({_pretty(e.child, _EXPR)})", _ATOM
    if isinstance(e, Pow):
        return f"{_pretty(e.base, _ATOM)}^{e.exponent}", _FACTOR
    if isinstance(e, Binary):
        if e.op in ("*", "/"):
            return f"{_pretty(e.left, _TERM)} {e.op} {_pretty(e.right, _FACTOR)}", _TERM
        return f"{_pretty(e.left, _EXPR)} {e.op} {_pretty(e.right, _TERM)}", _EXPR
    raise TypeError(f"not an Expr node: {e!r}")


def substitute(e: Expr, mapping: dict[int, Expr]) -> Expr:
    """Replace each Variable(i) in ``mapping`` with the given expression."""
    if isinstance(e, Constant):
        return e
    if isinstance(e, Variable):
        return mapping.get(e.index, e)
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.child, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    raise TypeError(f"not an Expr node: {e!r}")


def reflect(e: Expr, flips: Sequence[bool]) -> Expr:
    """Substitute x_i -> -x_i on every flipped axis."""
    mapping = {
        i + 1: Unary("neg", Variable(i + 1)) for i, f in enumerate(flips) if f
    }
    return substitute(e, mapping) if mapping else e


def pin_axes(e: Expr, pinned: dict[int, float], arity: int) -> tuple[Expr, tuple[int, ...]]:
    """Fix the given axes to constants and renumber the survivors to 1..m.

    Returns the reduced expression and the kept original axes in order.
    """
    kept = tuple(i for i in range(1, arity + 1) if i not in pinned)
    mapping: dict[int, Expr] = {i: Constant(float(v)) for i, v in pinned.items()}
    for new_idx, old_idx in enumerate(kept, start=1):
        if new_idx != old_idx:
            mapping[old_idx] = Variable(new_idx)
    return substitute(e, mapping), kept


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Constant) and e.value == 0.0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Constant) and e.value == 1.0


def _add(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value + b.value)
    return Binary("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value - b.value)
    return Binary("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_zero(a) or _is_zero(b):
        return Constant(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value * b.value)
    return Binary("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return Constant(0.0)
    if _is_one(b):
        return a
    return Binary("/", a, b)


def derivative(e: Expr, axis: int) -> Expr:
    """Symbolic partial derivative with respect to ``x_axis``.

    Light constant folding only; no general simplification.
    """
    if axis < 1:
        raise DomainError("axis indices start at 1")
    if isinstance(e, Constant):
        return Constant(0.0)
    if isinstance(e, Variable):
        return Constant(1.0 if e.index == axis else 0.0)
    if isinstance(e, Unary):
        d = derivative(e.child, axis)
        if e.op == "neg":
            return Unary("neg", d) if not _is_zero(d) else Constant(0.0)
        if _is_zero(d):
            return Constant(0.0)
        c = e.child
        outer = {
            "sin": lambda: Unary("cos", c),
            "cos": lambda: Unary("neg", Unary("sin", c)),
            "exp": lambda: Unary("exp", c),
            "tanh": lambda: _sub(Constant(1.0), Pow(Unary("tanh", c), 2)),
        }
        if e.op in outer:
            return _mul(outer[e.op](), d)
        if e.op == "log":
            return _div(d, c)
        if e.op == "sqrt":
            return _div(d, _mul(Constant(2.0), Unary("sqrt", c)))
        raise TypeError(f"unknown unary op {e.op!r}")
    if isinstance(e, Binary):
        da = derivative(e.left, axis)
        db = derivative(e.right, axis)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, e.right), _mul(e.left, db))
        if e.op == "/":
            num = _sub(_mul(da, e.right), _mul(e.left, db))
            return _div(num, Pow(e.right, 2))
        raise TypeError(f"unknown binary op {e.op!r}")
    if isinstance(e, Pow):
        if e.exponent == 0:
            return Constant(0.0)
        d = derivative(e.base, axis)
        if _is_zero(d):
            return Constant(0.0)
        inner = e.base if e.exponent == 2 else Pow(e.base, e.exponent - 1)
        if e.exponent == 1:
            inner = Constant(1.0)
        return _mul(_mul(Constant(float(e.exponent)), inner), d)
    raise TypeError(f"not an Expr node: {e!r}")


def load_function_file(path: str | Path) -> tuple[str, int | None]:
    """Read a UTF-8 function file: one expression, optional leading
    ``arity: N`` line.  Returns (expression text, declared arity or None)."""
    raw = Path(path).read_text(encoding="utf-8")
    lines = raw.splitlines()
    if lines:
        m = re.fullmatch(r"\s*arity:\s*(\d+)\s*", lines[0])
        if m:
            return "\n".join(lines[1:]).strip(), int(m.group(1))
    return raw.strip(), None
