"""Shared helpers and independent oracles.

The oracles here avoid the package's own construction code: row counts come
from counting distinct cofactors of a plain truth table, function values from
Python evaluation of the source expression.
"""
import itertools
import os
import random
import sys

import numpy as np
import pytest

from bmpkit.core import TruthTable, from_truth_table

LONG = bool(os.environ.get("BMPKIT_LONG"))


def pytest_collection_modifyitems(config, items):
    if LONG:
        return
    skip = pytest.mark.skip(reason="long suite; set BMPKIT_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)


def names(n):
    return [f"x{i}" for i in range(n)]


def random_table(rng: random.Random, n: int, m: int = 1, density: float = 0.5) -> TruthTable:
    vals = np.array([[int(rng.random() < density) for _ in range(m)] for _ in range(1 << n)],
                    dtype=np.uint8)
    return TruthTable(names(n), vals)


def random_bmp(rng: random.Random, n: int, m: int = 1):
    t = random_table(rng, n, m, density=rng.choice([0.2, 0.5, 0.8]))
    order = names(n)
    rng.shuffle(order)
    return from_truth_table(t, order), t


def oracle_row_counts(table: TruthTable, order) -> list[int]:
    """Rows per train position: distinct cofactors after fixing a prefix of ``order``."""
    n = table.num_vars
    idx = {v: i for i, v in enumerate(table.var_names)}
    counts = [table.num_outputs]
    for k in range(1, n):
        prefix, rest = order[:k], order[k:]
        subs = set()
        for j in range(table.num_outputs):
            for pre in itertools.product((0, 1), repeat=k):
                sub = []
                for post in itertools.product((0, 1), repeat=n - k):
                    x = 0
                    for v, bit in zip(prefix, pre):
                        x |= bit << idx[v]
                    for v, bit in zip(rest, post):
                        x |= bit << idx[v]
                    sub.append(int(table.values[x, j]))
                subs.add(tuple(sub))
        counts.append(len(subs))
    return counts


def oracle_min_volume(table: TruthTable) -> int:
    return min(sum(oracle_row_counts(table, list(p)))
               for p in itertools.permutations(table.var_names))


def bmp_table(b, var_names) -> np.ndarray:
    """Direct per-assignment evaluation, row x has bit i = var_names[i]."""
    n = len(var_names)
    rows = []
    for x in range(1 << n):
        a = {v: (x >> i) & 1 for i, v in enumerate(var_names)}
        rows.append(b(a))
    return np.array(rows, dtype=np.uint8).reshape(1 << n, -1)


@pytest.fixture
def rng():
    return random.Random(20240611)
