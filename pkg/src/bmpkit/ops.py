"""Operations on BMPs: APPLY, RESTRICT, INSERT, JOIN, COMPOSE, SWAP, REORDER, REVERSE."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

from . import rsmatrix as rs
from .core import (Bmp, RawLevel, _ltr, _rtl, _sort_terminal, clean, from_raw,
                   is_canonical, to_raw)
from .errors import BmpError
from .rsmatrix import RowSwitchMatrix, su_indices

DEBUG = bool(os.environ.get("BMPKIT_DEBUG"))


@dataclass(frozen=True)
class GateTable:
    """Truth table of a k-input gate, first input as the most significant index bit.

    For two inputs ``bits`` reads ``h(0,0) h(0,1) h(1,0) h(1,1)``.
    """

    arity: int
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != 1 << self.arity or set(self.bits) - {0, 1}:
            raise BmpError(f"gate of arity {self.arity} needs {1 << self.arity} bits, got {self.bits}")

    @classmethod
    def parse(cls, text: str) -> GateTable:
        text = text.strip()
        k = len(text).bit_length() - 1
        if not text or 1 << k != len(text) or set(text) - {"0", "1"}:
            raise BmpError(f"gate table must be a bit string of length 2^k, got {text!r}")
        return cls(k, tuple(int(c) for c in text))

    def __call__(self, *inputs: int) -> int:
        idx = 0
        for x in inputs:
            idx = (idx << 1) | x
        return self.bits[idx]

    def __str__(self):
        return "".join(map(str, self.bits))


AND = GateTable(2, (0, 0, 0, 1))
OR = GateTable(2, (0, 1, 1, 1))
XOR = GateTable(2, (0, 1, 1, 0))
NOT = GateTable(1, (1, 0))
# majority(a, b, c) and if-then-else(sel, else, then)
MAJ3 = GateTable(3, (0, 0, 0, 1, 0, 1, 1, 1))
MUX = GateTable(3, (0, 0, 1, 1, 0, 1, 0, 1))

BINARY_GATES = tuple(GateTable(2, tuple((g >> (3 - i)) & 1 for i in range(4))) for g in range(16))


@dataclass(frozen=True)
class FrontierStep:
    """Sizes seen by one direct-sum step: ``rows_out <= min(2 * rows_in, bound)``."""

    rows_in: int
    rows_out: int
    bound: int  # product of the operands' bond dimensions at this step


def _same_order(bmps: Sequence[Bmp]) -> tuple[str, ...]:
    order = bmps[0].order
    for b in bmps[1:]:
        if b.order != order:
            raise BmpError(f"variable orders differ ({order} vs {b.order}); reorder first")
    return order


def _single_output(bmps: Sequence[Bmp]) -> None:
    for b in bmps:
        if b.num_outputs != 1:
            raise BmpError(f"expected single-output BMPs, got {b.num_outputs} outputs")


# -- APPLY ---------------------------------------------------------------------

def direct_product_train(f: Bmp, g: Bmp, h: GateTable) -> Bmp:
    """Uncleaned APPLY by Kronecker products of the level matrices."""
    if h.arity != 2:
        raise BmpError("direct-product APPLY takes a binary gate")
    _single_output((f, g))
    order = _same_order((f, g))
    levels = [(rs.kron(f0, g0), rs.kron(f1, g1))
              for (f0, f1), (g0, g1) in zip(f.levels, g.levels)]
    terminal = tuple(h(a, b) for a in f.terminal for b in g.terminal)
    return Bmp(order, tuple(levels), terminal)


def apply_direct_product(f: Bmp, g: Bmp, h: GateTable) -> Bmp:
    return clean(direct_product_train(f, g, h))


def frontier_train(operands: Sequence[tuple[Bmp, int]], h: GateTable
                   ) -> tuple[Bmp, list[FrontierStep]]:
    """Uncleaned direct-sum APPLY over ``(bmp, output_row)`` operands.

    The frontier is an array of index tuples, one entry per operand; it is
    pushed through each level and deduplicated, so only combinations that
    actually co-occur are kept.
    """
    if h.arity != len(operands):
        raise BmpError(f"gate arity {h.arity} does not match {len(operands)} operands")
    bmps = [b for b, _ in operands]
    order = _same_order(bmps)
    frontier = [tuple(row for _, row in operands)]
    for b, row in operands:
        if not 1 <= row <= b.num_outputs:
            raise BmpError(f"output {row} outside 1..{b.num_outputs}")
    raw: list[RawLevel] = []
    steps = []
    k = len(operands)
    for lv in zip(*(b.levels for b in bmps)):
        a0 = [m0.m for m0, _ in lv]
        a1 = [m1.m for _, m1 in lv]
        if k == 2:
            f0, g0 = a0
            f1, g1 = a1
            stacked = ([(f0[a - 1], g0[c - 1]) for a, c in frontier]
                       + [(f1[a - 1], g1[c - 1]) for a, c in frontier])
        else:
            stacked = ([tuple(m[u - 1] for m, u in zip(a0, t)) for t in frontier]
                       + [tuple(m[u - 1] for m, u in zip(a1, t)) for t in frontier])
        s, uniq = su_indices(stacked)
        r = len(frontier)
        bound = 1
        for m0, _ in lv:
            bound *= m0.cols
        steps.append(FrontierStep(r, len(uniq), bound))
        raw.append((s[:r], s[r:], len(uniq)))
        frontier = uniq
    terms = [b.terminal for b in bmps]
    terminal = [h(*(t[u - 1] for t, u in zip(terms, tup))) for tup in frontier]
    return from_raw(order, raw, terminal), steps


def _finish_rtl(b: Bmp) -> Bmp:
    # Frontier rows are all reachable, so one RTL sweep compresses fully; the
    # LTR pass only renumbers columns into the canonical gauge.
    raw, term = _rtl(to_raw(b), list(b.terminal))
    raw, term = _ltr(raw, term)
    raw, term = _sort_terminal(raw, term)
    out = from_raw(b.order, raw, term, canonical=True)
    if DEBUG and not is_canonical(out):
        raise AssertionError("direct-sum APPLY left a non-canonical train")
    return out


def apply_direct_sum(f: Bmp, g: Bmp, h: GateTable) -> Bmp:
    _single_output((f, g))
    train, _ = frontier_train([(f, 1), (g, 1)], h)
    return _finish_rtl(train)


def apply_n(fs: Sequence[Bmp], h: GateTable) -> Bmp:
    """k-ary APPLY by the direct-sum frontier; ``h.arity == len(fs)``."""
    if not fs:
        raise BmpError("apply_n needs at least one function")
    _single_output(fs)
    train, _ = frontier_train([(f, 1) for f in fs], h)
    return _finish_rtl(train)


def apply(f: Bmp, g: Bmp, h: GateTable, method: str = "sum") -> Bmp:
    if method == "sum":
        return apply_direct_sum(f, g, h)
    if method == "product":
        return apply_direct_product(f, g, h)
    raise BmpError(f"unknown APPLY method {method!r} (use 'sum' or 'product')")


def negate(f: Bmp) -> Bmp:
    return apply_n([f], NOT)


# -- RESTRICT / INSERT / JOIN / COMPOSE ---------------------------------------

def restrict(f: Bmp, var: str, bit: int) -> Bmp:
    """Pin ``var`` to ``bit``; the variable leaves the train."""
    pos = f.position(var)
    raw = to_raw(f)
    m0, m1, _ = raw[pos]
    mb = m1 if bit else m0
    terminal = list(f.terminal)
    if pos + 1 < len(raw):
        r0, r1, cols = raw[pos + 1]
        raw[pos + 1] = ([r0[j - 1] for j in mb], [r1[j - 1] for j in mb], cols)
    else:
        terminal = [terminal[j - 1] for j in mb]
    del raw[pos]
    order = f.order[:pos] + f.order[pos + 1:]
    return clean(from_raw(order, raw, terminal))


def insert_muted(f: Bmp, position: int, var: str) -> Bmp:
    """Add ``var`` at train ``position`` as an identity level (the function ignores it)."""
    if var in f.order:
        raise BmpError(f"variable {var!r} already present")
    n = f.num_vars
    if not 0 <= position <= n:
        raise BmpError(f"position {position} outside 0..{n}")
    d = f.levels[position][0].rows if position < n else len(f.terminal)
    eye = RowSwitchMatrix.identity(d)
    levels = f.levels[:position] + ((eye, eye),) + f.levels[position:]
    order = f.order[:position] + (var,) + f.order[position:]
    out = Bmp(order, levels, f.terminal)
    if f.canonical and is_canonical(out):
        return Bmp(order, levels, f.terminal, canonical=True)
    return clean(out)


def align(fs: Sequence[Bmp]) -> list[Bmp]:
    """Bring BMPs onto one variable set and order.

    The first BMP's order wins; variables it lacks are appended in order of
    first appearance and inserted muted where missing.
    """
    order = list(fs[0].order)
    for b in fs[1:]:
        order.extend(v for v in b.order if v not in order)
    out = []
    for b in fs:
        for v in order:
            if v not in b.order:
                b = insert_muted(b, b.num_vars, v)
        out.append(reorder(b, order))
    return out


def join(fs: Sequence[Bmp]) -> Bmp:
    """Stack several BMPs into one vector-valued BMP (outputs in input order)."""
    if not fs:
        raise BmpError("join needs at least one BMP")
    fs = align(fs)
    order = _same_order(fs)
    levels = []
    for k in range(len(order)):
        m0, m1 = fs[0].levels[k]
        for b in fs[1:]:
            n0, n1 = b.levels[k]
            m0, m1 = rs.direct_sum(m0, n0), rs.direct_sum(m1, n1)
        levels.append((m0, m1))
    terminal = tuple(t for b in fs for t in b.terminal)
    # terminal reduction and row merging are what CLEAN's RTL sweep does
    return clean(Bmp(order, tuple(levels), terminal))


def compose_var(f: Bmp, var: str, g: Bmp) -> Bmp:
    """Substitute ``g`` for ``var`` in ``f``: ``f = (not g) f|var=0 + g f|var=1``."""
    _single_output((f, g))
    pos = f.position(var)
    extra = [v for v in g.order if v not in f.order]
    if extra:
        raise BmpError(f"substituted function uses variables {extra} absent from f")
    halves = [insert_muted(restrict(f, var, bit), pos, var) for bit in (0, 1)]
    cofactors = join(halves)
    g = align([f, g])[1]
    train, _ = frontier_train([(g, 1), (cofactors, 1), (cofactors, 2)], MUX)
    return _finish_rtl(train)


# -- SWAP / REORDER / REVERSE --------------------------------------------------

def swap_kernel(u0: Sequence[int], u1: Sequence[int], l0: Sequence[int], l1: Sequence[int]
                ) -> tuple[list[int], list[int], list[int], list[int]]:
    """Exchange two adjacent levels given as arrays.

    ``u*`` are the upper level (rows -> bond), ``l*`` the lower level
    (bond -> columns).  Returns the new upper pair (for the lower variable)
    and the new lower pair (for the upper variable); only the bond between
    them changes size.
    """
    n = len(u0)
    # row i of the 2n x 2m block matrix: (lower-var value, upper-var 0 | 1)
    stacked = ([(l0[a - 1], l0[c - 1]) for a, c in zip(u0, u1)]
               + [(l1[a - 1], l1[c - 1]) for a, c in zip(u0, u1)])
    s, uniq = su_indices(stacked)
    return s[:n], s[n:], [a for a, _ in uniq], [c for _, c in uniq]


def swap_adjacent(b: Bmp, k: int) -> Bmp:
    """Exchange the variables at train positions ``k`` and ``k + 1``."""
    if not 0 <= k < b.num_vars - 1:
        raise BmpError(f"swap position {k} outside 0..{b.num_vars - 2}")
    (u0, u1), (l0, l1) = b.levels[k], b.levels[k + 1]
    s0, s1, n0, n1 = swap_kernel(u0.m, u1.m, l0.m, l1.m)
    r = len(n0)
    upper = (RowSwitchMatrix(u0.rows, r, tuple(s0)), RowSwitchMatrix(u0.rows, r, tuple(s1)))
    lower = (RowSwitchMatrix(r, l0.cols, tuple(n0)), RowSwitchMatrix(r, l0.cols, tuple(n1)))
    order = list(b.order)
    order[k], order[k + 1] = order[k + 1], order[k]
    out = Bmp(tuple(order), b.levels[:k] + (upper, lower) + b.levels[k + 2:],
              b.terminal, canonical=b.canonical)
    if DEBUG and out.canonical and not is_canonical(out):
        raise AssertionError(f"swap at {k} broke canonical form")
    return out


def reorder(b: Bmp, target: Sequence[str]) -> Bmp:
    """Reach ``target`` order by adjacent swaps (one per inversion)."""
    target = tuple(target)
    if sorted(target) != sorted(b.order) or len(set(target)) != len(target):
        raise BmpError(f"target {target} is not a permutation of {b.order}")
    for i, v in enumerate(target):
        j = b.order.index(v)
        while j > i:
            b = swap_adjacent(b, j - 1)
            j -= 1
    return b


def reverse_order(b: Bmp) -> Bmp:
    """Same function with the variable order reversed (single output only).

    Reading the train transposed, the state after each level is a 0/1 vector
    over the rows of the original level; distinct vectors become the rows of
    the new train (an LTR sweep over the transposed matrices).
    """
    if b.num_outputs != 1:
        raise BmpError("reverse_order supports single-output BMPs; reverse outputs one by one and join")
    raw = to_raw(b)
    states = [tuple(b.terminal)]
    new_raw: list[RawLevel] = []
    for m0, m1, _ in reversed(raw):
        pulled = ([tuple(w[j - 1] for j in m0) for w in states]
                  + [tuple(w[j - 1] for j in m1) for w in states])
        s, states = su_indices(pulled)
        p = len(s) // 2
        new_raw.append((s[:p], s[p:], len(states)))
    terminal = [w[0] for w in states]
    return clean(from_raw(tuple(reversed(b.order)), new_raw, terminal))
