"""The BMP train: construction from truth tables, evaluation, CLEAN, canonical keys.

A :class:`Bmp` over variables ``order = (v_0, ..., v_{n-1})`` (leftmost first)
is a train of row-switching pairs ``(M0, M1)`` closed by a binary terminal
vector.  Output ``j`` is evaluated by chasing a row index: start at row
``j`` of the leftmost level and follow ``M1`` or ``M0`` depending on the
bit of the level's variable; the final column indexes the terminal.

Levels are kept as :class:`~bmpkit.rsmatrix.RowSwitchMatrix` pairs.  The
sweeps below work on plain 1-based lists (``_Raw``) and wrap the result
back once, which keeps the inner loops free of dataclass overhead.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BmpError, LimitExceeded, ParseError
from .rsmatrix import RowSwitchMatrix, su_indices

ORACLE_LIMIT = int(os.environ.get("BMPKIT_ORACLE_LIMIT", "20"))
MAX_CLEAN_PASSES = 3

Level = tuple[RowSwitchMatrix, RowSwitchMatrix]
# (m0, m1, cols) with 1-based column indices
RawLevel = tuple[list[int], list[int], int]


@dataclass(frozen=True)
class Bmp:
    order: tuple[str, ...]
    levels: tuple[Level, ...]
    terminal: tuple[int, ...]
    canonical: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "levels", tuple(tuple(lv) for lv in self.levels))
        object.__setattr__(self, "terminal", tuple(int(t) for t in self.terminal))
        if len(self.order) != len(self.levels):
            raise BmpError(f"{len(self.order)} variables but {len(self.levels)} levels")
        if len(set(self.order)) != len(self.order):
            raise BmpError(f"duplicate variable in order {self.order}")
        if any(t not in (0, 1) for t in self.terminal):
            raise BmpError("terminal entries must be 0 or 1")
        prev = None
        for k, (m0, m1) in enumerate(self.levels):
            if m0.shape != m1.shape:
                raise BmpError(f"level {k}: M0 is {m0.shape} but M1 is {m1.shape}")
            if prev is not None and prev != m0.rows:
                raise BmpError(f"level {k}: has {m0.rows} rows, previous level has {prev} columns")
            prev = m0.cols
        if prev is not None and prev != len(self.terminal):
            raise BmpError(f"last level has {prev} columns but terminal has {len(self.terminal)} entries")

    @property
    def num_vars(self) -> int:
        return len(self.order)

    @property
    def num_outputs(self) -> int:
        if self.levels:
            return self.levels[0][0].rows
        return len(self.terminal)

    def position(self, var: str) -> int:
        try:
            return self.order.index(var)
        except ValueError:
            raise BmpError(f"unknown variable {var!r}") from None

    def bonds(self) -> list[int]:
        """Column counts of each level (the bond to its right)."""
        return [m0.cols for m0, _ in self.levels]

    def row_counts(self) -> list[int]:
        return [m0.rows for m0, _ in self.levels]

    def __call__(self, assignment: Mapping[str, int]) -> tuple[int, ...]:
        return evaluate(self, assignment)


@dataclass(frozen=True)
class TruthTable:
    """Exhaustive table; row ``x`` holds the outputs where bit ``i`` of ``x`` is ``var_names[i]``."""

    var_names: tuple[str, ...]
    values: np.ndarray  # shape (2**n, m), dtype uint8

    def __post_init__(self):
        object.__setattr__(self, "var_names", tuple(self.var_names))
        vals = np.asarray(self.values, dtype=np.uint8)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != 1 << len(self.var_names):
            raise BmpError(f"truth table needs {1 << len(self.var_names)} rows, got {vals.shape[0]}")
        object.__setattr__(self, "values", vals)

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_outputs(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_function(cls, var_names: Sequence[str], fn, num_outputs: int = 1) -> TruthTable:
        """Tabulate ``fn(assignment_dict)`` which returns a bit or a sequence of bits."""
        n = len(var_names)
        vals = np.zeros((1 << n, num_outputs), dtype=np.uint8)
        for x in range(1 << n):
            out = fn({v: (x >> i) & 1 for i, v in enumerate(var_names)})
            vals[x] = np.atleast_1d(out)
        return cls(tuple(var_names), vals)

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.var_names == other.var_names and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.var_names, self.values.tobytes()))

    def lookup(self, assignment: Mapping[str, int]) -> tuple[int, ...]:
        x = sum(int(assignment[v]) << i for i, v in enumerate(self.var_names))
        return tuple(int(b) for b in self.values[x])


# -- raw list helpers -------------------------------------------------------

def to_raw(b: Bmp) -> list[RawLevel]:
    return [(list(m0.m), list(m1.m), m0.cols) for m0, m1 in b.levels]


def from_raw(order: Sequence[str], raw: Sequence[RawLevel], terminal: Sequence[int],
             canonical: bool = False) -> Bmp:
    levels = []
    for m0, m1, cols in raw:
        levels.append((RowSwitchMatrix(len(m0), cols, tuple(m0)),
                       RowSwitchMatrix(len(m1), cols, tuple(m1))))
    return Bmp(tuple(order), tuple(levels), tuple(terminal), canonical)


def _ltr(raw: list[RawLevel], terminal: list[int]) -> tuple[list[RawLevel], list[int]]:
    # Each level keeps only the rows reached from the left, numbered by first
    # visit over the stacked (M0; M1) block.
    out: list[RawLevel] = []
    sel = None
    for m0, m1, _ in raw:
        if sel is not None:
            m0 = [m0[i - 1] for i in sel]
            m1 = [m1[i - 1] for i in sel]
        p = len(m0)
        s, sel = su_indices(m0 + m1)
        out.append((s[:p], s[p:], len(sel)))
    if sel is not None:
        terminal = [terminal[i - 1] for i in sel]
    return out, list(terminal)


def _rtl(raw: list[RawLevel], terminal: list[int]) -> tuple[list[RawLevel], list[int]]:
    # Terminal compressed onto its distinct values (sorted, so (0, 1) when both
    # occur); then each level's (M0 | M1) rows are merged right to left and the
    # merge map is pushed into the level on the left.  The leftmost level keeps
    # its rows: they are the outputs.
    if not raw:
        return [], list(terminal)
    vals = sorted(set(terminal))
    col = {v: i + 1 for i, v in enumerate(vals)}
    u = [col[t] for t in terminal]
    width = len(vals)
    out: list[RawLevel] = [None] * len(raw)  # type: ignore[list-item]
    for k in range(len(raw) - 1, -1, -1):
        m0, m1, _ = raw[k]
        m0 = [u[j - 1] for j in m0]
        m1 = [u[j - 1] for j in m1]
        if k == 0:
            out[0] = (m0, m1, width)
            break
        u, uniq = su_indices(list(zip(m0, m1)))
        out[k] = ([a for a, _ in uniq], [b for _, b in uniq], width)
        width = len(uniq)
    return out, vals


def _sort_terminal(raw: list[RawLevel], terminal: list[int]) -> tuple[list[RawLevel], list[int]]:
    # Fix the gauge of the terminal bond: distinct values in increasing order.
    if not raw or list(terminal) == sorted(terminal):
        return raw, list(terminal)
    perm = sorted(range(len(terminal)), key=lambda i: terminal[i])
    newpos = {old + 1: new + 1 for new, old in enumerate(perm)}
    m0, m1, cols = raw[-1]
    raw = raw[:-1] + [([newpos[j] for j in m0], [newpos[j] for j in m1], cols)]
    return raw, [terminal[i] for i in perm]


def _volume_raw(raw: Iterable[RawLevel]) -> int:
    return sum(len(m0) for m0, _, _ in raw)


def _clean_raw(raw, terminal):
    vol = None
    for _ in range(MAX_CLEAN_PASSES):
        raw, terminal = _ltr(raw, terminal)
        raw, terminal = _rtl(raw, terminal)
        v = _volume_raw(raw)
        if v == vol:
            break
        vol = v
    else:
        raise AssertionError(f"CLEAN did not converge within {MAX_CLEAN_PASSES} LTR+RTL passes")
    raw, terminal = _ltr(raw, terminal)
    return _sort_terminal(raw, terminal)


# -- public operations -----------------------------------------------------

def clean_ltr(b: Bmp) -> Bmp:
    """One left-to-right sweep: drops rows unreachable from the outputs."""
    raw, term = _ltr(to_raw(b), list(b.terminal))
    return from_raw(b.order, raw, term)


def clean_rtl(b: Bmp) -> Bmp:
    """One right-to-left sweep: compresses the terminal and merges duplicate rows."""
    raw, term = _rtl(to_raw(b), list(b.terminal))
    return from_raw(b.order, raw, term)


def clean(b: Bmp) -> Bmp:
    """Bring a train to canonical form (LTR/RTL until the volume is stable)."""
    raw, term = _clean_raw(to_raw(b), list(b.terminal))
    return from_raw(b.order, raw, term, canonical=True)


def volume(b: Bmp) -> int:
    return sum(m0.rows for m0, _ in b.levels)


def max_bond(b: Bmp) -> int:
    return max(b.bonds(), default=0)


def is_canonical(b: Bmp) -> bool:
    """Structural canonicity: distinct rows, every column reached, terminal distinct and sorted.

    The leftmost level is exempt from row distinctness since two outputs may
    coincide.
    """
    term = list(b.terminal)
    if not b.levels:
        return True
    if term != sorted(set(term)):
        return False
    for k, (m0, m1) in enumerate(b.levels):
        if k > 0 and len(set(zip(m0.m, m1.m))) != m0.rows:
            return False
        if len(set(m0.m) | set(m1.m)) != m0.cols:
            return False
    return True


def check_invariants(b: Bmp) -> None:
    """Raise :class:`BmpError` if ``b`` breaks an invariant its flags promise."""
    if b.canonical:
        if not is_canonical(b):
            raise BmpError("train flagged canonical is not compressed")
        for k, (m0, _) in enumerate(b.levels):
            if m0.cols > 2 * m0.rows:
                raise BmpError(f"level {k}: bond {m0.cols} exceeds twice the {m0.rows} rows")


def evaluate(b: Bmp, assignment: Mapping[str, int]) -> tuple[int, ...]:
    """Output bits of ``b`` at ``assignment`` (keyed by variable identifier)."""
    try:
        bits = [int(assignment[v]) for v in b.order]
    except KeyError as e:
        raise BmpError(f"assignment is missing variable {e.args[0]!r}") from None
    out = []
    for j in range(1, b.num_outputs + 1):
        r = j
        for (m0, m1), x in zip(b.levels, bits):
            r = (m1 if x else m0).m[r - 1]
        out.append(b.terminal[r - 1])
    return tuple(out)


def evaluate_many(b: Bmp, var_names: Sequence[str], inputs: np.ndarray) -> np.ndarray:
    """Vectorised evaluation; ``inputs[k, i]`` is the bit of ``var_names[i]`` in sample ``k``.

    Returns an array of shape ``(len(inputs), num_outputs)``.
    """
    inputs = np.asarray(inputs)
    col = {v: i for i, v in enumerate(var_names)}
    missing = [v for v in b.order if v not in col]
    if missing:
        raise BmpError(f"inputs lack variables {missing}")
    nsamp = inputs.shape[0]
    rows = np.broadcast_to(np.arange(b.num_outputs, dtype=np.int64), (nsamp, b.num_outputs)).copy()
    for (m0, m1), v in zip(b.levels, b.order):
        a0 = np.asarray(m0.m, dtype=np.int64) - 1
        a1 = np.asarray(m1.m, dtype=np.int64) - 1
        x = inputs[:, col[v]].astype(bool)[:, None]
        rows = np.where(x, a1[rows], a0[rows])
    term = np.asarray(b.terminal, dtype=np.uint8)
    return term[rows]


def all_assignments(n: int) -> np.ndarray:
    """``(2**n, n)`` array whose row ``x`` holds the bits of ``x`` (bit ``i`` in column ``i``)."""
    x = np.arange(1 << n, dtype=np.int64)
    return ((x[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def truth_table_of(b: Bmp, var_names: Sequence[str] | None = None,
                   limit: int | None = None) -> TruthTable:
    names = tuple(b.order) if var_names is None else tuple(var_names)
    limit = ORACLE_LIMIT if limit is None else limit
    if len(names) > limit:
        raise LimitExceeded(f"{len(names)} variables exceed the oracle limit of {limit}")
    return TruthTable(names, evaluate_many(b, names, all_assignments(len(names))))


def _table_ints(t: TruthTable, order: Sequence[str]) -> list[int]:
    # One big integer per output; bit index x has order[0] as its most
    # significant variable, so restricting the leftmost remaining variable
    # is a split into high and low halves.
    n = t.num_vars
    pos = {v: i for i, v in enumerate(t.var_names)}
    vals = t.values
    out = []
    for j in range(t.num_outputs):
        if n == 0:
            out.append(int(vals[0, j]))
            continue
        cube = vals[:, j].reshape((2,) * n)  # axis a <-> variable n-1-a
        axes = [n - 1 - pos[v] for v in order]
        flat = np.ascontiguousarray(cube.transpose(axes)).reshape(-1)
        # flat[x] with x's MSB = order[0]; pack so bit x of the int is flat[x]
        out.append(int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little"))
    return out


def from_truth_table(t: TruthTable, order: Sequence[str] | None = None,
                     limit: int | None = None) -> Bmp:
    """Canonical BMP by repeated Shannon expansion, deduplicating subfunctions."""
    order = tuple(t.var_names) if order is None else tuple(order)
    if sorted(order) != sorted(t.var_names):
        raise BmpError(f"order {order} is not a permutation of {t.var_names}")
    limit = ORACLE_LIMIT if limit is None else limit
    n = len(order)
    if n > limit:
        raise LimitExceeded(f"{n} variables exceed the exhaustive limit of {limit}")
    funcs = _table_ints(t, order)
    raw: list[RawLevel] = []
    for k in range(n):
        half = 1 << (n - k - 1)
        mask = (1 << half) - 1
        stacked = [f & mask for f in funcs] + [f >> half for f in funcs]
        s, funcs = su_indices(stacked)
        p = len(stacked) // 2
        raw.append((s[:p], s[p:], len(funcs)))
    raw, term = _sort_terminal(raw, funcs)
    return from_raw(order, raw, term, canonical=True)


def _relabel(b: Bmp) -> tuple[list[RawLevel], list[int]]:
    raw, term = _ltr(to_raw(b), list(b.terminal))
    return _sort_terminal(raw, term)


def normalize(b: Bmp) -> Bmp:
    """Gauge-fix a canonical train: columns numbered by first visit, terminal sorted."""
    raw, term = _relabel(b)
    return from_raw(b.order, raw, term, canonical=b.canonical)


def canonical_key(b: Bmp) -> bytes:
    """Gauge-invariant serialization of a canonical train."""
    if not b.canonical:
        raise BmpError("canonical_key needs a canonical train; run clean() first")
    raw, term = _relabel(b)
    return dumps(from_raw(b.order, raw, term)).encode()


# -- BMP/1 text format --------------------------------------------------------

def dumps(b: Bmp) -> str:
    lines = ["BMP/1", "vars: " + " ".join(b.order), f"outputs: {b.num_outputs}"]
    for k, (m0, m1) in enumerate(b.levels):
        lines.append(f"level {k}: rows={m0.rows} cols={m0.cols}")
        lines.append("M0: " + " ".join(map(str, m0.m)))
        lines.append("M1: " + " ".join(map(str, m1.m)))
    lines.append("terminal: " + " ".join(map(str, b.terminal)))
    return "\n".join(lines) + "\n"


def _field(line: str, prefix: str, lineno: int) -> str:
    if not line.startswith(prefix):
        raise ParseError(f"expected {prefix.strip()!r}, got {line!r}", lineno)
    return line[len(prefix):].strip()


def _ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(x) for x in text.split()]
    except ValueError:
        raise ParseError(f"non-integer entry in {text!r}", lineno) from None


def loads(text: str) -> Bmp:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or lines[0].strip() != "BMP/1":
        raise ParseError("missing BMP/1 header", 1)
    if len(lines) < 4:
        raise ParseError("truncated file", len(lines))
    order = _field(lines[1], "vars:", 2).split()
    m_text = _field(lines[2], "outputs:", 3)
    try:
        m = int(m_text)
    except ValueError:
        raise ParseError(f"bad output count {m_text!r}", 3) from None
    n = len(order)
    if len(lines) != 3 + 3 * n + 1:
        raise ParseError(f"expected {3 + 3 * n + 1} lines for {n} variables, got {len(lines)}",
                         len(lines))
    raw: list[RawLevel] = []
    prev_cols = m
    for k in range(n):
        ln = 4 + 3 * k
        head = _field(lines[ln - 1], f"level {k}:", ln).split()
        try:
            spec = dict(part.split("=") for part in head)
            rows, cols = int(spec["rows"]), int(spec["cols"])
        except (ValueError, KeyError):
            raise ParseError(f"bad level header {lines[ln - 1]!r}", ln) from None
        if rows != prev_cols:
            raise ParseError(f"level {k} has {rows} rows but the bond to its left is {prev_cols}", ln)
        m0 = _ints(_field(lines[ln], "M0:", ln + 1), ln + 1)
        m1 = _ints(_field(lines[ln + 1], "M1:", ln + 2), ln + 2)
        for arr, off in ((m0, 1), (m1, 2)):
            if len(arr) != rows:
                raise ParseError(f"expected {rows} entries, got {len(arr)}", ln + off)
            if any(not 1 <= j <= cols for j in arr):
                raise ParseError(f"column index outside 1..{cols}", ln + off)
        raw.append((m0, m1, cols))
        prev_cols = cols
    tl = len(lines)
    term = _ints(_field(lines[-1], "terminal:", tl), tl)
    if len(term) != prev_cols:
        raise ParseError(f"terminal has {len(term)} entries, expected {prev_cols}", tl)
    if any(t not in (0, 1) for t in term):
        raise ParseError("terminal entries must be 0 or 1", tl)
    try:
        b = from_raw(order, raw, term)
    except BmpError as e:
        raise ParseError(str(e), 2) from None
    if is_canonical(b):
        b = Bmp(b.order, b.levels, b.terminal, canonical=True)
        try:
            check_invariants(b)
        except BmpError as e:
            raise ParseError(str(e)) from None
    return b


def load(path) -> Bmp:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(b: Bmp, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(b))


# -- TT/1 text format ---------------------------------------------------------

def dumps_table(t: TruthTable) -> str:
    lines = ["TT/1", "vars: " + " ".join(t.var_names), f"outputs: {t.num_outputs}"]
    lines.extend("".join(str(int(v)) for v in row) for row in t.values)
    return "\n".join(lines) + "\n"


def loads_table(text: str) -> TruthTable:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != "TT/1":
        raise ParseError("missing TT/1 header", 1)
    names = _field(lines[1], "vars:", 2).split() if len(lines) > 1 else []
    m = int(_field(lines[2], "outputs:", 3)) if len(lines) > 2 else 0
    body = lines[3:]
    if len(body) != 1 << len(names):
        raise ParseError(f"expected {1 << len(names)} table rows, got {len(body)}", len(lines))
    vals = np.zeros((len(body), m), dtype=np.uint8)
    for i, row in enumerate(body):
        if len(row) != m or set(row) - {"0", "1"}:
            raise ParseError(f"expected {m} bits, got {row!r}", i + 4)
        vals[i] = [int(c) for c in row]
    return TruthTable(tuple(names), vals)
