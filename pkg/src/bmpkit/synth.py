"""Building BMPs: expression parser, elementary trains, circuit generators."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .core import Bmp, from_raw
from .errors import BmpError, ParseError
from .ops import AND, MAJ3, NOT, OR, XOR, apply, apply_n, join


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # '&', '^' or '|'
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Var, Const, Not, BinOp]

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([01])|([!&|^()])|(\S))")


def _tokenize(text: str):
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        for i, ch in enumerate(text[pos:m.start(m.lastindex)]):
            if ch == "\n":
                line, line_start = line + 1, pos + i + 1
        col = m.start(m.lastindex) - line_start + 1
        if m.group(4) is not None:
            raise ParseError(f"unexpected character {m.group(4)!r}", line, col)
        kind = ("name", "const", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), line, col))
        pos = m.end()
    tokens.append(("end", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, declared: Sequence[str] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.declared = None if declared is None else set(declared)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, got {tok[1] or 'end of input'!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def binary(self, op, sub):
        node = sub()
        while self.peek()[1] == op and self.peek()[0] == "op":
            self.take()
            node = BinOp(op, node, sub())
        return node

    def expr(self):
        return self.binary("|", self.term)

    def term(self):
        return self.binary("^", self.factor)

    def factor(self):
        return self.binary("&", self.atom)

    def atom(self):
        kind, val, line, col = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.atom())
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "const":
            self.take()
            return Const(int(val))
        if kind == "name":
            if self.declared is not None and val not in self.declared:
                raise ParseError(f"undeclared variable {val!r}", line, col)
            self.take()
            return Var(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", line, col)


def parse_expr(text: str, declared: Sequence[str] | None = None) -> BoolExpr:
    """Parse ``| ^ & !`` expressions (precedence ``! > & > ^ > |``, left-associative)."""
    p = _Parser(text, declared)
    node = p.expr()
    kind, val, line, col = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", line, col)
    return node


def format_expr(e: BoolExpr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Not):
        return "!" + format_expr(e.arg)
    return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"


def expr_vars(e: BoolExpr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Not):
        return expr_vars(e.arg)
    return expr_vars(e.left) | expr_vars(e.right)


_OPS = {"&": AND, "|": OR, "^": XOR}


def eval_expr(e: BoolExpr, assignment: Mapping[str, int]) -> int:
    if isinstance(e, Var):
        return int(assignment[e.name])
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Not):
        return 1 - eval_expr(e.arg, assignment)
    return _OPS[e.op](eval_expr(e.left, assignment), eval_expr(e.right, assignment))


def read_expr_file(text: str) -> tuple[list[str], BoolExpr]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("vars:"):
        raise ParseError("expression file must start with a 'vars:' line", 1)
    names = lines[0][len("vars:"):].split()
    body = "\n".join(lines[1:])
    try:
        return names, parse_expr(body, names)
    except ParseError as e:
        raise ParseError(str(e).split(": ", 1)[-1], None if e.line is None else e.line + 1,
                         e.column) from None


# -- elementary BMPs -------------------------------------------------------------

def const_bmp(bit: int, order: Sequence[str]) -> Bmp:
    raw = [([1], [1], 1) for _ in order]
    return from_raw(order, raw, [int(bit)], canonical=True)


def var_bmp(var: str, order: Sequence[str]) -> Bmp:
    """Projection onto ``var``: pass-through levels around a single 1x2 split."""
    order = tuple(order)
    if var not in order:
        raise BmpError(f"unknown variable {var!r}")
    pos = order.index(var)
    raw = []
    for k in range(len(order)):
        if k < pos:
            raw.append(([1], [1], 1))
        elif k == pos:
            raw.append(([1], [2], 2))
        else:
            raw.append(([1, 2], [1, 2], 2))
    return from_raw(order, raw, [0, 1], canonical=True)


def expr_to_bmp(e: BoolExpr, order: Sequence[str], method: str = "sum") -> Bmp:
    """Canonical BMP of an expression by bottom-up APPLY."""
    order = tuple(order)
    missing = expr_vars(e) - set(order)
    if missing:
        raise BmpError(f"order lacks variables {sorted(missing)}")
    memo: dict = {}

    def build(node):
        if node in memo:
            return memo[node]
        if isinstance(node, Var):
            out = var_bmp(node.name, order)
        elif isinstance(node, Const):
            out = const_bmp(node.value, order)
        elif isinstance(node, Not):
            out = apply_n([build(node.arg)], NOT)
        else:
            out = apply(build(node.left), build(node.right), _OPS[node.op], method)
        memo[node] = out
        return out

    return build(e)


# -- circuit generators ----------------------------------------------------------

def or_of_and_expr(k: int) -> str:
    return " | ".join(f"x{2 * i} & x{2 * i + 1}" for i in range(k))


def index_order(k: int) -> list[str]:
    return [f"x{i}" for i in range(2 * k)]


def evens_then_odds_order(k: int) -> list[str]:
    return [f"x{i}" for i in range(0, 2 * k, 2)] + [f"x{i}" for i in range(1, 2 * k, 2)]


def gen_or_of_and(k: int, order: Sequence[str] | None = None) -> Bmp:
    """``x0 x1 | x2 x3 | ... | x_{2k-2} x_{2k-1}``; index order by default."""
    if k < 1:
        raise BmpError("or_of_and needs k >= 1")
    order = index_order(k) if order is None else list(order)
    return expr_to_bmp(parse_expr(or_of_and_expr(k)), order)


def adder_inputs(n: int) -> list[str]:
    return [f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)]


def adder_outputs(n: int) -> list[str]:
    return [f"s{i}" for i in range(n + 1)]


def adder_interleaved_order(n: int) -> list[str]:
    """Default adder order ``a_{n-1}, b_{n-1}, ..., a_0, b_0``."""
    return [v for i in reversed(range(n)) for v in (f"a{i}", f"b{i}")]


def gen_full_adder(n: int, order: Sequence[str] | None = None, method: str = "sum") -> Bmp:
    """n-bit ripple-carry adder: inputs ``a*``/``b*``, outputs ``s0..s_n`` (``s_n`` = carry)."""
    if n < 1:
        raise BmpError("adder needs n >= 1")
    order = adder_interleaved_order(n) if order is None else list(order)
    a = [var_bmp(f"a{i}", order) for i in range(n)]
    b = [var_bmp(f"b{i}", order) for i in range(n)]
    carry = const_bmp(0, order)
    sums = []
    for i in range(n):
        half = apply(a[i], b[i], XOR, method)
        sums.append(apply(half, carry, XOR, method))
        carry = apply_n([a[i], b[i], carry], MAJ3)
    return join(sums + [carry])


def adder_value(outputs: Sequence[int]) -> int:
    return sum(int(bit) << i for i, bit in enumerate(outputs))
