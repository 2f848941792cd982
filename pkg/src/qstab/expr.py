"""Tiny operator-expression language for model files.

Grammar (precedence high to low: ``^`` > unary ``-`` > ``*`` > ``+ -``,
binaries left-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' NONNEG_INT)*
    atom   := 'a' | 'ad' | 'n' | 'id' | NUMBER | COMPLEX | NAME
            | 'dag' '(' expr ')' | '(' expr ')'

Complex literals are single tokens of the form ``RE+IMi`` / ``RE-IMi``
(no spaces), e.g. ``0.8+0.4i``; a bare ``IMi`` is pure imaginary. Scalars
mixed with operators under ``+``/``-`` are lifted to multiples of the
identity; a scalar-valued expression evaluates to scalar * identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .hilbert import Operator, annihilation_op, creation_op, identity_op, number_op

__all__ = [
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "Num",
    "Name",
    "Neg",
    "BinOp",
    "Pow",
    "Dag",
    "parse_expr",
    "print_expr",
    "eval_expr",
    "parse_complex_literal",
    "format_complex_literal",
]

BUILTIN_NAMES = ("a", "ad", "n", "id")


class ExprSyntaxError(ValueError):
    def __init__(self, offset: int, expected: tuple[str, ...], found: str):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        super().__init__(
            f"syntax error at byte {offset}: expected {', '.join(self.expected)}; found {found}"
        )


class UnknownIdentifierError(ValueError):
    def __init__(self, name: str, known: tuple[str, ...], offset: int | None = None):
        self.name = name
        self.known = tuple(known)
        self.offset = offset
        where = "" if offset is None else f" at byte {offset}"
        super().__init__(
            f"unknown identifier {name!r}{where}; known names: "
            + ", ".join(BUILTIN_NAMES + tuple(sorted(known)))
        )


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Dag:
    operand: "Expr"


Expr = Num | Name | Neg | BinOp | Pow | Dag


# ---------------------------------------------------------------------------
# lexer

_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"(?P<re>{_FLOAT})(?P<sign>[+-])(?P<im>{_FLOAT})i")
_IMAG_RE = re.compile(rf"{_FLOAT}i")
_NUM_RE = re.compile(_FLOAT)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'ident' | one of '+-*^()' | 'end'
    text: str
    offset: int
    value: complex = 0j


def parse_complex_literal(text: str) -> complex:
    """Parse a standalone RE+IMi / RE-IMi / IMi / RE literal."""
    t = text.strip()
    m = _COMPLEX_RE.fullmatch(t)
    if m:
        imag = float(m.group("im"))
        if m.group("sign") == "-":
            imag = -imag
        return complex(float(m.group("re")), imag)
    if _IMAG_RE.fullmatch(t):
        return complex(0.0, float(t[:-1]))
    if _NUM_RE.fullmatch(t):
        return complex(float(t), 0.0)
    raise ExprSyntaxError(0, ("complex literal RE+IMi",), repr(text))


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"cannot format non-finite literal {x}")
    return repr(float(x))


def format_complex_literal(z: complex) -> str:
    """Canonical RE+IMi text; inverse of :func:`parse_complex_literal`."""
    z = complex(z)
    if z.imag == 0.0:
        if z.real < 0:
            raise ValueError("literals carry no sign; wrap negative values in unary minus")
        return _fmt_float(z.real)
    if z.real == 0.0 and z.imag > 0:
        return _fmt_float(z.imag) + "i"
    if z.real < 0:
        raise ValueError("literals carry no sign; wrap negative values in unary minus")
    sign = "+" if z.imag >= 0 else "-"
    return f"{_fmt_float(z.real)}{sign}{_fmt_float(abs(z.imag))}i"


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        m = _COMPLEX_RE.match(text, i) or _IMAG_RE.match(text, i) or _NUM_RE.match(text, i)
        if m:
            tokens.append(_Token("num", m.group(), i, parse_complex_literal(m.group())))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        if c in "+-*^()":
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        raise ExprSyntaxError(i, ("number", "identifier", "operator", "parenthesis"), repr(c))
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser (precedence climbing)

_BIN_PREC = {"+": 10, "-": 10, "*": 20}
_UNARY_PREC = 30
_POW_PREC = 40


class _Parser:
    def __init__(self, tokens: list[_Token], known: tuple[str, ...] | None):
        self.tokens = tokens
        self.pos = 0
        self.known = known

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, expected: tuple[str, ...]) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(tok.offset, expected, tok.text or "end of input")
        return self.advance()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            return Neg(self.binary(_UNARY_PREC))
        if tok.kind == "num":
            self.advance()
            return Num(tok.value)
        if tok.kind == "ident":
            self.advance()
            if tok.text == "dag":
                self.expect("(", ("'(' after dag",))
                inner = self.binary(0)
                self.expect(")", ("')'",))
                return Dag(inner)
            if (
                self.known is not None
                and tok.text not in BUILTIN_NAMES
                and tok.text not in self.known
            ):
                raise UnknownIdentifierError(tok.text, self.known, offset=tok.offset)
            return Name(tok.text)
        if tok.kind == "(":
            self.advance()
            inner = self.binary(0)
            self.expect(")", ("')'",))
            return inner
        raise ExprSyntaxError(
            tok.offset,
            ("number", "identifier", "'dag('", "'('", "unary '-'"),
            tok.text or "end of input",
        )

    def binary(self, min_prec: int) -> Expr:
        lhs = self.atom()
        while True:
            tok = self.peek()
            if tok.kind == "^" and _POW_PREC >= min_prec:
                self.advance()
                etok = self.expect("num", ("nonnegative integer exponent",))
                val = etok.value
                if val.imag != 0 or val.real < 0 or val.real != int(val.real):
                    raise ExprSyntaxError(
                        etok.offset, ("nonnegative integer exponent",), etok.text
                    )
                lhs = Pow(lhs, int(val.real))
                continue
            if tok.kind in _BIN_PREC and _BIN_PREC[tok.kind] >= min_prec:
                self.advance()
                rhs = self.binary(_BIN_PREC[tok.kind] + 1)  # left-associative
                lhs = BinOp(tok.kind, lhs, rhs)
                continue
            return lhs


def parse_expr(text: str, params: dict | tuple | list | None = None) -> Expr:
    """Parse to an AST; when ``params`` is given, identifiers are checked
    against the builtins plus those names."""
    known = tuple(params) if params is not None else None
    parser = _Parser(_lex(text), known)
    node = parser.binary(0)
    end = parser.peek()
    if end.kind != "end":
        raise ExprSyntaxError(end.offset, ("operator", "end of input"), end.text)
    return node


# ---------------------------------------------------------------------------
# printer


def _prec(node: Expr) -> int:
    if isinstance(node, (Num, Name, Dag)):
        return 100
    if isinstance(node, Pow):
        return _POW_PREC
    if isinstance(node, Neg):
        return _UNARY_PREC
    return _BIN_PREC[node.op]


def print_expr(node: Expr) -> str:
    """Minimal-parentheses text whose reparse reproduces the AST."""
    if isinstance(node, Num):
        return format_complex_literal(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, Dag):
        return f"dag({print_expr(node.operand)})"
    if isinstance(node, Neg):
        body = print_expr(node.operand)
        if _prec(node.operand) <= _UNARY_PREC:
            body = f"({body})"
        return f"-{body}"
    if isinstance(node, Pow):
        base = print_expr(node.base)
        if _prec(node.base) < 100:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        prec = _BIN_PREC[node.op]
        left = print_expr(node.left)
        if _prec(node.left) < prec:
            left = f"({left})"
        right = print_expr(node.right)
        if _prec(node.right) <= prec:
            right = f"({right})"
        sep = node.op if node.op == "*" else f" {node.op} "
        return f"{left}{sep}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluator


def eval_expr(node: Expr, dim: int, params: dict[str, complex] | None = None) -> Operator:
    """Evaluate at a truncation dimension; scalar results become scalar * 1."""
    params = params or {}
    builtins = {
        "a": annihilation_op(dim).entries,
        "ad": creation_op(dim).entries,
        "n": number_op(dim).entries,
        "id": identity_op(dim).entries,
    }

    def lift(x):
        return x * np.eye(dim, dtype=complex) if np.isscalar(x) else x

    def ev(nd):
        if isinstance(nd, Num):
            return complex(nd.value)
        if isinstance(nd, Name):
            if nd.ident in builtins:
                return builtins[nd.ident]
            if nd.ident in params:
                return complex(params[nd.ident])
            raise UnknownIdentifierError(nd.ident, tuple(params))
        if isinstance(nd, Neg):
            return -ev(nd.operand)
        if isinstance(nd, Dag):
            x = ev(nd.operand)
            return np.conj(x) if np.isscalar(x) else x.conj().T
        if isinstance(nd, Pow):
            x = ev(nd.base)
            if np.isscalar(x):
                return x**nd.exponent
            return np.linalg.matrix_power(x, nd.exponent)
        if isinstance(nd, BinOp):
            lx, rx = ev(nd.left), ev(nd.right)
            if nd.op == "*":
                if np.isscalar(lx) or np.isscalar(rx):
                    return lx * rx
                return lx @ rx
            if np.isscalar(lx) != np.isscalar(rx):
                lx, rx = lift(lx), lift(rx)
            return lx + rx if nd.op == "+" else lx - rx
        raise TypeError(f"not an expression node: {nd!r}")

    return Operator(lift(ev(node)))
