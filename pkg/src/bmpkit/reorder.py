"""Variable-order optimization: exact A* search (optionally with
branch-and-bound) and sifting.

All searches drive a single mutable working train through adjacent swaps.
The row count at train position ``k`` only depends on the *set* of
variables at positions ``0..k-1``; that quantity is ``chi`` below.
"""
from __future__ import annotations

import heapq
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Bmp, clean, from_raw, is_canonical, normalize
from .errors import BmpError, LimitExceeded
from .ops import DEBUG, reorder

EXACT_LIMIT = 16
MAX_STATES = int(os.environ.get("BMPKIT_MAX_STATES", str(1 << 22)))


class WorkingTrain:
    """Mutable canonical train that supports in-place adjacent swaps.

    Levels are numpy arrays of 0-based column indices.  Swaps keep the
    train canonical but number new columns in sorted-key order, so the
    gauge is fixed again only when converting back with ``to_bmp``.
    """

    def __init__(self, b: Bmp):
        if not b.canonical:
            b = clean(b)
        self.order = list(b.order)
        self.m0 = [np.asarray(m0.m, dtype=np.int64) - 1 for m0, _ in b.levels]
        self.m1 = [np.asarray(m1.m, dtype=np.int64) - 1 for _, m1 in b.levels]
        self.cols = [m0.cols for m0, _ in b.levels]
        self.terminal = list(b.terminal)
        self.num_outputs = b.num_outputs
        self.pos = {v: i for i, v in enumerate(self.order)}
        self.volume = sum(len(m) for m in self.m0)
        self.swaps = 0
        self.log: list[tuple[str, ...]] | None = None

    def rows(self, k: int) -> int:
        return len(self.m0[k])

    def swap(self, k: int) -> None:
        """Exchange the variables at positions ``k`` and ``k + 1``."""
        u0, u1, l0, l1 = self.m0[k], self.m1[k], self.m0[k + 1], self.m1[k + 1]
        c = self.cols[k + 1]
        # new lower rows are (lower-var fixed, upper-var 0 | 1) pairs
        keys = np.concatenate((l0[u0] * c + l0[u1], l1[u0] * c + l1[u1]))
        uniq, inv = np.unique(keys, return_inverse=True)
        r = len(u0)
        self.volume += len(uniq) - len(l0)
        self.m0[k], self.m1[k] = inv[:r], inv[r:]
        self.m0[k + 1], self.m1[k + 1] = uniq // c, uniq % c
        self.cols[k] = len(uniq)
        a, b = self.order[k], self.order[k + 1]
        self.order[k], self.order[k + 1] = b, a
        self.pos[a], self.pos[b] = k + 1, k
        self.swaps += 1
        if self.log is not None:
            self.log.append(tuple(self.order))

    def move(self, var: str, target: int) -> None:
        k = self.pos[var]
        while k > target:
            self.swap(k - 1)
            k -= 1
        while k < target:
            self.swap(k)
            k += 1

    def front_load(self, subset: Iterable[str]) -> None:
        """Stable partition: the variables of ``subset`` occupy the first slots."""
        subset = set(subset)
        t = 0
        for v in list(self.order):
            if v in subset:
                self.move(v, t)
                t += 1

    def to_bmp(self) -> Bmp:
        raw = [((m0 + 1).tolist(), (m1 + 1).tolist(), c)
               for m0, m1, c in zip(self.m0, self.m1, self.cols)]
        return normalize(from_raw(self.order, raw, self.terminal, canonical=True))


def _check_subset(b: Bmp, subset) -> frozenset:
    q = frozenset(subset)
    unknown = q - set(b.order)
    if unknown:
        raise BmpError(f"unknown variables {sorted(unknown)}")
    if len(q) == b.num_vars:
        raise BmpError("chi is undefined for the full variable set")
    return q


def chi(b: Bmp, subset: Iterable[str]) -> int:
    """Rows of the level right after the variables of ``subset``."""
    q = _check_subset(b, subset)
    w = WorkingTrain(b)
    w.front_load(q)
    out = w.rows(len(q))
    if DEBUG and len(q) > 1:
        alt = WorkingTrain(b)
        for t, v in enumerate(sorted(q, reverse=True)):
            alt.move(v, t)
        assert alt.rows(len(q)) == out, "chi depends on the order inside the subset"
    return out


@dataclass
class OrderSearchState:
    subset: int  # bitmask over the input order
    g: int
    predecessor: str | None


@dataclass
class SearchStats:
    states_expanded: int = 0
    states_pruned: int = 0
    upper_bound_updates: int = 0
    wall_time_ms: float = 0.0
    chi_evaluations: int = 0
    swaps: int = 0

    def to_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.__dict__.items())


def _exact_search(b: Bmp, bnb: bool, max_vars: int | None, max_states: int | None):
    n = b.num_vars
    limit = EXACT_LIMIT if max_vars is None else max_vars
    if n > limit:
        raise LimitExceeded(f"{n} variables exceed the exact-search limit {limit}; "
                            "raise the limit or use sifting")
    budget = MAX_STATES if max_states is None else max_states
    t0 = time.perf_counter()
    stats = SearchStats()
    w = WorkingTrain(b)
    names = list(w.order)
    if n == 0:
        return (), w.volume, stats
    bit = {v: 1 << i for i, v in enumerate(names)}
    full = (1 << n) - 1
    chi_memo: dict[int, int] = {0: w.num_outputs}

    best_ub = w.volume
    best_order = tuple(w.order)

    def note_upper_bound():
        nonlocal best_ub, best_order
        if w.volume < best_ub:
            best_ub, best_order = w.volume, tuple(w.order)
            stats.upper_bound_updates += 1

    def chi_of(mask: int, size: int) -> int:
        got = chi_memo.get(mask)
        if got is None:
            w.front_load(v for v in names if mask & bit[v])
            got = chi_memo[mask] = w.rows(size)
            stats.chi_evaluations += 1
            if bnb:
                note_upper_bound()
        return got

    states: dict[int, OrderSearchState] = {0: OrderSearchState(0, 0, None)}
    closed: set[int] = set()
    # (f, -|q|, mask, g)
    heap = [(chi_memo[0] + n - 1, 0, 0, 0)]
    reached = False
    while heap:
        f, neg_size, mask, g = heapq.heappop(heap)
        if mask in closed or g > states[mask].g:
            continue
        if bnb and f >= best_ub:
            # lower bound met the upper bound: the best full order seen is optimal
            stats.states_pruned += 1 + len(heap)
            break
        if mask == full:
            reached = True
            break
        closed.add(mask)
        stats.states_expanded += 1
        if len(states) > budget:
            raise LimitExceeded(f"exact search exceeded {budget} states "
                                "(BMPKIT_MAX_STATES); use sifting instead")
        size = -neg_size
        step = g + chi_of(mask, size)
        for v in names:
            if mask & bit[v]:
                continue
            nxt = mask | bit[v]
            if nxt in closed:
                continue
            old = states.get(nxt)
            if old is not None and old.g <= step:
                continue
            h = 0 if nxt == full else chi_of(nxt, size + 1) + n - size - 2
            if DEBUG:
                assert step + h >= f, "heuristic is not consistent"
            if bnb and step + h >= best_ub:
                stats.states_pruned += 1
                continue
            states[nxt] = OrderSearchState(nxt, step, v)
            heapq.heappush(heap, (step + h, -(size + 1), nxt, step))

    stats.swaps = w.swaps
    if reached:
        order = []
        mask = full
        while mask:
            v = states[mask].predecessor
            order.append(v)
            mask &= ~bit[v]
        result = tuple(reversed(order)), states[full].g
    else:
        result = best_order, best_ub
    stats.wall_time_ms = round((time.perf_counter() - t0) * 1000, 3)
    return result[0], result[1], stats


def astar_optimal_order(b: Bmp, max_vars: int | None = None, max_states: int | None = None
                        ) -> tuple[tuple[str, ...], int, SearchStats]:
    """Exact minimum-volume order by A* over variable subsets."""
    return _exact_search(b, False, max_vars, max_states)


def astar_bnb(b: Bmp, max_vars: int | None = None, max_states: int | None = None
              ) -> tuple[tuple[str, ...], int, SearchStats]:
    """A* with an upper bound taken from the full orders met while swapping."""
    return _exact_search(b, True, max_vars, max_states)


@dataclass
class SiftReport:
    passes: int
    initial_volume: int
    final_volume: int
    best_positions: dict[str, int] = field(default_factory=dict)
    traces: dict[str, list[int]] = field(default_factory=dict)


def _sift_one(w: WorkingTrain, var: str) -> tuple[int, list[int]]:
    """Front, then back, then the best position; returns (position, trace by position)."""
    n = len(w.order)
    start = w.pos[var]
    trace = [0] * n
    trace[start] = w.volume
    w.move(var, 0)
    trace[0] = w.volume
    for k in range(1, n):
        w.move(var, k)
        trace[k] = w.volume
    best = min(trace)
    # ties: closest to where the variable started
    target = min((k for k in range(n) if trace[k] == best), key=lambda k: (abs(k - start), k))
    w.move(var, target)
    assert w.volume == best
    return target, trace


def sift_variable(b: Bmp, var: str, log: list | None = None) -> tuple[Bmp, int, list[int]]:
    """Sift one variable; ``log`` (if given) receives every order visited."""
    if var not in b.order:
        raise BmpError(f"unknown variable {var!r}")
    w = WorkingTrain(b)
    if log is not None:
        log.append(tuple(w.order))
        w.log = log
    pos, trace = _sift_one(w, var)
    return w.to_bmp(), pos, trace


def sift(b: Bmp, max_passes: int | None = None) -> tuple[Bmp, SiftReport]:
    """Rudell sifting, largest levels first, until a pass brings no gain."""
    w = WorkingTrain(b)
    report = SiftReport(0, w.volume, w.volume)
    while max_passes is None or report.passes < max_passes:
        start = w.volume
        schedule = sorted(w.order, key=lambda v: -w.rows(w.pos[v]))
        for v in schedule:
            before = w.volume
            pos, trace = _sift_one(w, v)
            assert w.volume <= before
            report.best_positions[v] = pos
            report.traces[v] = trace
        report.passes += 1
        if w.volume >= start:
            break
    report.final_volume = w.volume
    out = w.to_bmp()
    if DEBUG:
        assert is_canonical(out)
    return out, report


def path_costs(b: Bmp, order: Sequence[str]) -> list[int]:
    """Row counts along ``order``; they sum to the volume for that order."""
    return list(reorder(b if b.canonical else clean(b), order).row_counts())
