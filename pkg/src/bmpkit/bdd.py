"""Leveled BDDs and their translation to and from BMP trains.

Level ``n-1`` holds the top variable (``order[0]``), level 0 the bottom
one and terminals sit at level -1.  Node references are ``(level, index)``
pairs with 1-based indices, so a complete BDD exported from a BMP numbers
each level's nodes exactly like the rows of the matching matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import Bmp, clean, from_raw
from .errors import BmpError, ParseError

Ref = tuple[int, int]
TERMINAL_LEVEL = -1


@dataclass(frozen=True)
class Bdd:
    order: tuple[str, ...]
    nodes: Mapping[Ref, tuple[Ref, Ref]]  # (level, index) -> (low, high)
    terminals: Mapping[int, int]  # index -> bit
    roots: tuple[Ref, ...]

    @property
    def num_vars(self) -> int:
        return len(self.order)

    def node_count(self) -> int:
        return len(self.nodes)

    def levels(self) -> dict[int, list[Ref]]:
        out: dict[int, list[Ref]] = {lvl: [] for lvl in range(self.num_vars)}
        for ref in sorted(self.nodes):
            out[ref[0]].append(ref)
        return out

    def validate(self) -> None:
        n = self.num_vars
        if len(set(self.order)) != n:
            raise BmpError("duplicate variables in BDD order")

        def check(ref: Ref, below: int, what: str):
            lvl, idx = ref
            if lvl == TERMINAL_LEVEL:
                if idx not in self.terminals:
                    raise BmpError(f"{what} points to missing terminal {idx}")
            elif ref not in self.nodes:
                raise BmpError(f"{what} points to missing node {lvl}:{idx}")
            elif lvl >= below:
                raise BmpError(f"{what} points to level {lvl}, expected below {below}")

        for (lvl, idx), (lo, hi) in self.nodes.items():
            if not 0 <= lvl < n:
                raise BmpError(f"node {lvl}:{idx} outside levels 0..{n - 1}")
            check(lo, lvl, f"low edge of {lvl}:{idx}")
            check(hi, lvl, f"high edge of {lvl}:{idx}")
        for bit in self.terminals.values():
            if bit not in (0, 1):
                raise BmpError(f"terminal bit {bit} is not 0/1")
        if not self.roots:
            raise BmpError("BDD has no roots")
        for r in self.roots:
            check(r, n, "root")

    def is_complete(self) -> bool:
        return all(lo[0] == lvl - 1 and hi[0] == lvl - 1
                   for (lvl, _), (lo, hi) in self.nodes.items()) and \
            all(r[0] == self.num_vars - 1 for r in self.roots)


def evaluate_bdd(d: Bdd, assignment: Mapping[str, int]) -> tuple[int, ...]:
    n = d.num_vars
    out = []
    for ref in d.roots:
        while ref[0] != TERMINAL_LEVEL:
            lo, hi = d.nodes[ref]
            ref = hi if assignment[d.order[n - 1 - ref[0]]] else lo
        out.append(d.terminals[ref[1]])
    return tuple(out)


def bmp_to_bdd(b: Bmp) -> Bdd:
    """Complete BDD with one node per matrix row."""
    n = b.num_vars
    nodes: dict[Ref, tuple[Ref, Ref]] = {}
    for k, (m0, m1) in enumerate(b.levels):
        lvl = n - 1 - k
        for i, (lo, hi) in enumerate(zip(m0.m, m1.m), start=1):
            nodes[(lvl, i)] = ((lvl - 1, lo), (lvl - 1, hi))
    terminals = {j: bit for j, bit in enumerate(b.terminal, start=1)}
    roots = tuple((n - 1, i) for i in range(1, b.num_outputs + 1))
    return Bdd(tuple(b.order), nodes, terminals, roots)


def bdd_to_bmp(d: Bdd) -> Bmp:
    """Pad long edges with pass-through nodes, read off the matrices, clean."""
    d.validate()
    n = d.num_vars
    term_ids = sorted(d.terminals)
    terminal = [d.terminals[j] for j in term_ids]
    if n == 0:
        return clean(from_raw((), [], [d.terminals[r[1]] for r in d.roots]))

    # rows of each level: original nodes first (by index), padding appended
    rows: dict[int, list] = {lvl: [] for lvl in range(n)}
    row_of: dict = {}
    for ref in sorted(d.nodes):
        row_of[ref] = len(rows[ref[0]]) + 1
        rows[ref[0]].append(ref)
    column = {(TERMINAL_LEVEL, j): c for c, j in enumerate(term_ids, start=1)}

    def target(ref: Ref, lvl: int) -> int:
        """Column index at level ``lvl - 1`` that leads to ``ref``."""
        want = lvl - 1
        if ref[0] == want:
            return column[ref] if want == TERMINAL_LEVEL else row_of[ref]
        key = ("pad", want, ref)
        got = row_of.get(key)
        if got is None:
            got = row_of[key] = len(rows[want]) + 1
            rows[want].append(key)
        return got

    # walk top-down so padding created at a level is wired before moving on
    raw = []
    top = [target(r, n) for r in d.roots]
    for lvl in range(n - 1, -1, -1):
        m0, m1 = [], []
        for item in rows[lvl]:
            if item[0] == "pad":
                j = target(item[2], lvl)
                m0.append(j)
                m1.append(j)
            else:
                lo, hi = d.nodes[item]
                m0.append(target(lo, lvl))
                m1.append(target(hi, lvl))
        raw.append([m0, m1])
    for k, lvl in enumerate(range(n - 1, -1, -1)):
        raw[k].append(len(terminal) if lvl == 0 else len(rows[lvl - 1]))
    # the leftmost level has one row per output
    m0, m1, cols = raw[0]
    raw[0] = ([m0[i - 1] for i in top], [m1[i - 1] for i in top], cols)
    return clean(from_raw(d.order, [tuple(r) for r in raw], terminal))


def prune_passthrough(d: Bdd) -> Bdd:
    """Drop nodes whose two children coincide and redirect edges around them."""
    resolved: dict[Ref, Ref] = {}

    def res(ref: Ref) -> Ref:
        return resolved.get(ref, ref)

    kept: dict[Ref, tuple[Ref, Ref]] = {}
    for ref in sorted(d.nodes):  # ascending level: children first
        lo, hi = (res(c) for c in d.nodes[ref])
        if lo == hi:
            resolved[ref] = lo
        else:
            kept[ref] = (lo, hi)
    return Bdd(d.order, kept, dict(d.terminals), tuple(res(r) for r in d.roots))


# -- DOT export ----------------------------------------------------------------

def _name(ref: Ref) -> str:
    return f'"L{ref[0]}_{ref[1]}"'


def to_dot(d: Bdd, name: str = "bmp", show_roots: bool = False) -> str:
    """Graphviz digraph: a rank per level, dashed low edges, boxed terminals."""
    lines = [f'digraph "{name}" {{', "  node [shape=circle];"]
    n = d.num_vars
    levels = d.levels()
    for lvl in range(n - 1, -1, -1):
        if not levels[lvl]:
            continue
        label = d.order[n - 1 - lvl]
        members = " ".join(f'{_name(r)} [label="{label}"];' for r in levels[lvl])
        lines.append(f"  {{ rank=same; {members} }}")
    terms = " ".join(f'{_name((TERMINAL_LEVEL, j))} [shape=box, label="{d.terminals[j]}"];'
                     for j in sorted(d.terminals))
    lines.append(f"  {{ rank=sink; {terms} }}")
    if show_roots:
        for i, r in enumerate(d.roots):
            lines.append(f'  "out{i}" [shape=plaintext];')
            lines.append(f'  "out{i}" -> {_name(r)};')
    for ref in sorted(d.nodes, key=lambda r: (-r[0], r[1])):
        lo, hi = d.nodes[ref]
        lines.append(f"  {_name(ref)} -> {_name(lo)} [style=dashed];")
        lines.append(f"  {_name(ref)} -> {_name(hi)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- BDD/1 text format ---------------------------------------------------------

def _fmt(ref: Ref) -> str:
    return f"{ref[0]}:{ref[1]}"


def dumps(d: Bdd) -> str:
    lines = ["BDD/1", "vars: " + " ".join(d.order)]
    for ref in sorted(d.nodes, key=lambda r: (-r[0], r[1])):
        lo, hi = d.nodes[ref]
        lines.append(f"node {ref[0]} {ref[1]} low={_fmt(lo)} high={_fmt(hi)}")
    for j in sorted(d.terminals):
        lines.append(f"term {j} {d.terminals[j]}")
    lines.append("root " + " ".join(_fmt(r) for r in d.roots))
    return "\n".join(lines) + "\n"


def _ref(text: str, lineno: int) -> Ref:
    try:
        lvl, idx = text.split(":")
        return int(lvl), int(idx)
    except ValueError:
        raise ParseError(f"bad node reference {text!r}", lineno) from None


def loads(text: str) -> Bdd:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "BDD/1":
        raise ParseError("missing BDD/1 header", 1)
    if len(lines) < 2 or not lines[1].startswith("vars:"):
        raise ParseError("expected 'vars:' line", 2)
    order = tuple(lines[1][len("vars:"):].split())
    nodes: dict[Ref, tuple[Ref, Ref]] = {}
    terminals: dict[int, int] = {}
    roots: tuple[Ref, ...] | None = None
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "node" and len(parts) == 5 and parts[3].startswith("low=") \
                    and parts[4].startswith("high="):
                ref = (int(parts[1]), int(parts[2]))
                if ref in nodes:
                    raise ParseError(f"duplicate node {_fmt(ref)}", lineno)
                nodes[ref] = (_ref(parts[3][4:], lineno), _ref(parts[4][5:], lineno))
            elif parts[0] == "term" and len(parts) == 3:
                terminals[int(parts[1])] = int(parts[2])
            elif parts[0] == "root" and len(parts) > 1:
                roots = tuple(_ref(p, lineno) for p in parts[1:])
            else:
                raise ParseError(f"unrecognized line {line!r}", lineno)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"bad integer in {line!r}", lineno) from None
    if roots is None:
        raise ParseError("missing 'root' line", len(lines))
    d = Bdd(order, nodes, terminals, roots)
    try:
        d.validate()
    except BmpError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e)) from None
    return d
