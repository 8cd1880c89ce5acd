import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmpkit.core import canonical_key, from_truth_table, TruthTable, truth_table_of, volume
from bmpkit.errors import BmpError, ParseError
from bmpkit.synth import (BinOp, Const, Not, Var, adder_inputs, adder_interleaved_order,
                          adder_outputs, adder_value, const_bmp, eval_expr, evens_then_odds_order,
                          expr_to_bmp, expr_vars, format_expr, gen_full_adder, gen_or_of_and,
                          index_order, parse_expr, read_expr_file, var_bmp)

from conftest import oracle_row_counts

ORDER = ("x2", "x1", "x0")


def test_precedence_and_associativity():
    e = parse_expr("a | b ^ c & !d")
    assert e == BinOp("|", Var("a"), BinOp("^", Var("b"), BinOp("&", Var("c"), Not(Var("d")))))
    assert parse_expr("a & b & c") == BinOp("&", BinOp("&", Var("a"), Var("b")), Var("c"))
    assert parse_expr("!(a | 1)") == Not(BinOp("|", Var("a"), Const(1)))
    assert expr_vars(parse_expr("x0 & (x2 | !x2 & x1)")) == {"x0", "x1", "x2"}


@pytest.mark.parametrize("text, line, col", [
    ("a &", 1, 4),
    ("a & $", 1, 5),
    ("(a | b", 1, 7),
    ("a b", 1, 3),
    ("a |\n  & b", 2, 3),
])
def test_parse_errors_report_position(text, line, col):
    with pytest.raises(ParseError) as err:
        parse_expr(text)
    assert (err.value.line, err.value.column) == (line, col)


def test_undeclared_variable():
    with pytest.raises(ParseError) as err:
        parse_expr("a & c", declared=["a", "b"])
    assert err.value.column == 5


def test_expr_file():
    names, e = read_expr_file("vars: x2 x1 x0\nx0 & (x2 | !x2 & x1)\n")
    assert names == ["x2", "x1", "x0"]
    assert eval_expr(e, {"x2": 0, "x1": 1, "x0": 1}) == 1
    with pytest.raises(ParseError) as err:
        read_expr_file("vars: a\na & b\n")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        read_expr_file("a & b\n")


@st.composite
def exprs(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        if draw(st.integers(0, 5)) == 0:
            return Const(draw(st.integers(0, 1)))
        return Var(draw(st.sampled_from(["a", "b", "c", "d"])))
    if draw(st.integers(0, 3)) == 0:
        return Not(draw(exprs(depth - 1)))
    return BinOp(draw(st.sampled_from("&^|")), draw(exprs(depth - 1)), draw(exprs(depth - 1)))


@given(exprs())
def test_format_parse_round_trip(e):
    assert parse_expr(format_expr(e)) == e


def test_elementary_trains():
    v = var_bmp("x2", ORDER)
    assert [(m0.m, m1.m) for m0, m1 in v.levels] == [((1,), (2,)), ((1, 2), (1, 2)), ((1, 2), (1, 2))]
    assert v.terminal == (0, 1) and v.canonical
    assert canonical_key(v) == canonical_key(
        from_truth_table(TruthTable.from_function(ORDER, lambda a: a["x2"]), ORDER))
    # rows: one before the split, then two pass-through rows per later level
    assert volume(var_bmp("x1", ORDER)) == 1 + 1 + 2
    c = const_bmp(1, ORDER)
    assert c.row_counts() == [1, 1, 1] and c.terminal == (1,)
    with pytest.raises(BmpError):
        var_bmp("y", ORDER)


def test_worked_expression_volume():
    b = expr_to_bmp(parse_expr("x0 & (x2 | !x2 & x1)"), ORDER)
    assert volume(b) == 5 and b.row_counts() == [1, 2, 2]
    with pytest.raises(BmpError):
        expr_to_bmp(parse_expr("x0 & y"), ORDER)


def test_or_of_and_small_orders():
    e = parse_expr("x0 & x1 | x2 & x3")
    assert volume(expr_to_bmp(e, ["x0", "x1", "x2", "x3"])) == 8
    assert volume(expr_to_bmp(e, ["x0", "x2", "x1", "x3"])) == 10


@pytest.mark.parametrize("k", range(1, 9))
def test_or_of_and_closed_forms(k):
    assert volume(gen_or_of_and(k, index_order(k))) == 5 * k - 2
    assert volume(gen_or_of_and(k, evens_then_odds_order(k))) == 3 * 2 ** k + k - 4


def test_or_of_and_counts_match_oracle():
    k = 3
    b = gen_or_of_and(k, evens_then_odds_order(k))
    names = index_order(k)
    t = TruthTable.from_function(
        names, lambda a: int(any(a[f"x{2*i}"] and a[f"x{2*i+1}"] for i in range(k))))
    order = evens_then_odds_order(k)
    assert b.row_counts() == oracle_row_counts(t, order)


def test_adder_orders():
    assert adder_inputs(2) == ["a0", "a1", "b0", "b1"]
    assert adder_interleaved_order(2) == ["a1", "b1", "a0", "b0"]
    assert adder_outputs(2) == ["s0", "s1", "s2"]
    assert adder_value([1, 0, 1]) == 5


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_adder_exhaustive(n):
    b = gen_full_adder(n)
    assert b.num_outputs == n + 1 and b.num_vars == 2 * n
    for x, y in itertools.product(range(1 << n), repeat=2):
        a = {f"a{i}": (x >> i) & 1 for i in range(n)}
        a.update({f"b{i}": (y >> i) & 1 for i in range(n)})
        assert adder_value(b(a)) == x + y


def test_adder_volumes_frozen():
    # counted with the cofactor oracle at n=2, frozen for larger n
    t = TruthTable.from_function(
        adder_inputs(2),
        lambda a: tuple(((a["a0"] + 2 * a["a1"] + a["b0"] + 2 * a["b1"]) >> i) & 1 for i in range(3)),
        3)
    assert gen_full_adder(2).row_counts() == oracle_row_counts(t, adder_interleaved_order(2))
    assert [volume(gen_full_adder(n)) for n in (2, 4, 8, 10)] == [17, 53, 149, 209]
    assert volume(gen_full_adder(8, adder_inputs(8))) == 2764


def test_adder_methods_agree():
    a = gen_full_adder(3, method="sum")
    b = gen_full_adder(3, method="product")
    assert canonical_key(a) == canonical_key(b)


@settings(max_examples=40, deadline=None)
@given(exprs(depth=4), st.permutations(["a", "b", "c", "d"]))
def test_expr_to_bmp_matches_evaluation(e, order):
    s = expr_to_bmp(e, order, method="sum")
    p = expr_to_bmp(e, order, method="product")
    assert canonical_key(s) == canonical_key(p)
    want = TruthTable.from_function(["a", "b", "c", "d"], lambda a: eval_expr(e, a))
    assert truth_table_of(s, ["a", "b", "c", "d"]) == want


def test_random_expressions_up_to_eight_vars():
    r = random.Random(7)
    names = [f"v{i}" for i in range(8)]
    for _ in range(10):
        terms = [" & ".join(r.sample(names, 3)) for _ in range(4)]
        e = parse_expr(" ^ ".join(f"({t})" for t in terms))
        order = names[:]
        r.shuffle(order)
        s, p = expr_to_bmp(e, order), expr_to_bmp(e, order, "product")
        assert canonical_key(s) == canonical_key(p)
        want = TruthTable.from_function(names, lambda a: eval_expr(e, a))
        assert np.array_equal(truth_table_of(s, names).values, want.values)
