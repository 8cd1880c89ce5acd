import itertools
import re
from pathlib import Path

import pytest

from bmpkit.bdd import (Bdd, bdd_to_bmp, bmp_to_bdd, dumps, evaluate_bdd, loads, prune_passthrough,
                        to_dot)
from bmpkit.core import canonical_key, clean, from_truth_table, TruthTable, truth_table_of, volume
from bmpkit.errors import BmpError, ParseError
from bmpkit.ops import direct_product_train, OR
from bmpkit.synth import const_bmp, expr_to_bmp, parse_expr

from conftest import random_bmp

GOLDEN = Path(__file__).parent / "golden"
ORDER = ("x2", "x1", "x0")


def fn(text):
    return expr_to_bmp(parse_expr(text), ORDER)


def assignments(order):
    for bits in itertools.product((0, 1), repeat=len(order)):
        yield dict(zip(order, bits))


def test_worked_function_bdd_shape():
    d = bmp_to_bdd(fn("!x2 & x1 & x0"))
    per_level = {lvl: len(refs) for lvl, refs in d.levels().items()}
    assert per_level == {2: 1, 1: 2, 0: 2} and len(d.terminals) == 2
    assert d.is_complete() and d.roots == ((2, 1),)
    assert d.nodes[(2, 1)] == ((1, 1), (1, 2))


def test_product_intermediate_bdd():
    raw = direct_product_train(fn("x2 & x0"), fn("!x2 & x1 & x0"), OR)
    d = bmp_to_bdd(raw)
    assert {lvl: len(r) for lvl, r in d.levels().items()} == {2: 1, 1: 4, 0: 4}
    assert [d.terminals[j] for j in sorted(d.terminals)] == [0, 1, 1, 1]


def test_constant_is_a_chain():
    d = bmp_to_bdd(const_bmp(0, ORDER))
    assert d.node_count() == 3
    assert all(lo == hi for lo, hi in d.nodes.values())
    assert prune_passthrough(d).node_count() == 0


def test_bdd_evaluation_matches_bmp(rng):
    for _ in range(20):
        b, t = random_bmp(rng, rng.randint(1, 6), rng.randint(1, 2))
        d = bmp_to_bdd(b)
        assert d.node_count() == volume(b)
        for a in assignments(b.order):
            assert evaluate_bdd(d, a) == b(a)


def test_round_trip(rng):
    for _ in range(30):
        b, _ = random_bmp(rng, rng.randint(0, 8), rng.randint(1, 3))
        assert canonical_key(bdd_to_bmp(bmp_to_bdd(b))) == canonical_key(clean(b))


def test_canonical_bdd_has_no_duplicate_nodes(rng):
    for _ in range(20):
        b, _ = random_bmp(rng, rng.randint(2, 7))
        d = bmp_to_bdd(b)
        for lvl, refs in d.levels().items():
            if lvl == b.num_vars - 1:
                continue
            pairs = [d.nodes[r] for r in refs]
            assert len(set(pairs)) == len(pairs)


def test_padding_long_edge():
    # reduced BDD of x2 & x0: the x2 node jumps straight to x0 and to 0
    d = Bdd(ORDER, {(2, 1): ((-1, 1), (0, 1)), (0, 1): ((-1, 1), (-1, 2))}, {1: 0, 2: 1}, ((2, 1),))
    assert not d.is_complete()
    b = bdd_to_bmp(d)
    assert b.row_counts() == [1, 2, 2]
    m0, m1 = b.levels[1]
    assert m0.m == m1.m == (1, 2)  # identity middle level
    assert canonical_key(b) == canonical_key(fn("x2 & x0"))


def test_round_trip_of_worked_bdd():
    f = fn("x0 & (x2 | !x2 & x1)")
    d = loads((GOLDEN / "worked_f.bdd").read_text())
    want = from_truth_table(TruthTable.from_function(
        ORDER, lambda a: int(a["x0"] and (a["x2"] or (not a["x2"] and a["x1"])))), ORDER)
    assert canonical_key(bdd_to_bmp(d)) == canonical_key(want) == canonical_key(f)


def test_terminal_only_bdd():
    d = Bdd(ORDER, {}, {1: 1}, ((-1, 1),))
    b = bdd_to_bmp(d)
    assert b.row_counts() == [1, 1, 1] and b.terminal == (1,)


def test_general_terminals_merge():
    # three terminals, two of them equal
    d = Bdd(("a",), {(0, 1): ((-1, 1), (-1, 3))}, {1: 0, 2: 0, 3: 1}, ((0, 1),))
    b = bdd_to_bmp(d)
    assert b.terminal == (0, 1) and b.row_counts() == [1]


def test_malformed_bdds_are_rejected():
    with pytest.raises(BmpError):
        bdd_to_bmp(Bdd(ORDER, {(2, 1): ((2, 1), (-1, 1))}, {1: 0}, ((2, 1),)))
    with pytest.raises(BmpError):
        bdd_to_bmp(Bdd(ORDER, {(2, 1): ((1, 7), (-1, 1))}, {1: 0}, ((2, 1),)))
    with pytest.raises(BmpError):
        bdd_to_bmp(Bdd(ORDER, {(5, 1): ((-1, 1), (-1, 1))}, {1: 0}, ((5, 1),)))


def test_prune_passthrough_example():
    g = fn("x2 & x0")
    d = bmp_to_bdd(g)
    assert d.node_count() == 5
    p = prune_passthrough(d)
    # only the x2 node and the x0 node testing the variable survive
    assert p.node_count() == 2
    assert {lvl for lvl, _ in p.nodes} == {2, 0}
    for a in assignments(ORDER):
        assert evaluate_bdd(p, a) == g(a)


def test_prune_keeps_reduced_bdds():
    d = bmp_to_bdd(fn("x2 ^ x1 ^ x0"))
    assert prune_passthrough(d) == d


def test_prune_preserves_evaluation(rng):
    for _ in range(20):
        b, _ = random_bmp(rng, rng.randint(1, 8))
        d = bmp_to_bdd(b)
        p = prune_passthrough(d)
        assert p.node_count() <= d.node_count()
        for a in assignments(b.order):
            assert evaluate_bdd(p, a) == evaluate_bdd(d, a)
        assert canonical_key(bdd_to_bmp(p)) == canonical_key(b)


def test_dot_counts():
    text = to_dot(bmp_to_bdd(fn("!x2 & x1 & x0")))
    assert text.count("rank=same") == 3
    assert text.count("shape=box") == 2
    assert len(re.findall(r"->", text)) == 10
    assert text.count("style=dashed") == 5


def test_dot_golden():
    text = to_dot(bmp_to_bdd(fn("x0 & (x2 | !x2 & x1)")))
    assert text == (GOLDEN / "worked_f.dot").read_text()


def test_dot_roots_option():
    text = to_dot(bmp_to_bdd(fn("x2")), show_roots=True)
    assert '"out0" -> "L2_1"' in text


def test_bdd_format_round_trip(rng):
    for _ in range(10):
        b, _ = random_bmp(rng, rng.randint(1, 5), rng.randint(1, 2))
        d = bmp_to_bdd(b)
        assert loads(dumps(d)) == d
    text = (GOLDEN / "worked_f.bdd").read_text()
    assert text.splitlines()[:3] == ["BDD/1", "vars: x2 x1 x0", "node 2 1 low=1:1 high=1:2"]


@pytest.mark.parametrize("text, line", [
    ("BDD/2\n", 1),
    ("BDD/1\nvars: a\nnode 0 1 low=-1:1\nroot 0:1\n", 3),
    ("BDD/1\nvars: a\nnode 0 1 low=-1:x high=-1:1\nroot 0:1\n", 3),
    ("BDD/1\nvars: a\nterm 1 0\nwat\n", 4),
])
def test_bdd_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        loads(text)
    assert err.value.line == line


def test_bdd_parse_rejects_dangling_reference():
    with pytest.raises(ParseError):
        loads("BDD/1\nvars: a\nnode 0 1 low=-1:1 high=-1:2\nterm 1 0\nroot 0:1\n")
