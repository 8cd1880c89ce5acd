"""Boolean functions as binary matrix products (BMPs).

A BMP is a train of per-variable pairs of row-switching matrices closed
by a 0/1 terminal vector; it is the matrix form of a quasi-reduced BDD.
"""
from .bdd import Bdd, bdd_to_bmp, bmp_to_bdd, evaluate_bdd, prune_passthrough, to_dot
from .core import (Bmp, TruthTable, canonical_key, check_invariants, clean, clean_ltr, clean_rtl,
                   evaluate, evaluate_many, from_truth_table, is_canonical, max_bond, normalize,
                   truth_table_of, volume)
from .errors import BmpError, LimitExceeded, ParseError
from .ops import (AND, BINARY_GATES, MAJ3, MUX, NOT, OR, XOR, GateTable, apply, apply_direct_product,
                  apply_direct_sum, apply_n, compose_var, insert_muted, join, negate, reorder, restrict,
                  reverse_order, swap_adjacent)
from .reorder import SearchStats, SiftReport, astar_bnb, astar_optimal_order, chi, sift, sift_variable
from .rsmatrix import RowSwitchMatrix, su_decompose
from .synth import expr_to_bmp, gen_full_adder, gen_or_of_and, parse_expr

__all__ = [
    "AND", "BINARY_GATES", "Bdd", "Bmp", "BmpError", "GateTable", "LimitExceeded", "MAJ3", "MUX", "NOT",
    "OR", "ParseError", "RowSwitchMatrix", "SearchStats", "SiftReport", "TruthTable", "XOR",
    "apply", "apply_direct_product", "apply_direct_sum", "apply_n", "astar_bnb",
    "astar_optimal_order", "bdd_to_bmp", "bmp_to_bdd", "canonical_key", "check_invariants", "chi", "clean", "clean_ltr",
    "clean_rtl", "compose_var", "evaluate", "evaluate_bdd", "evaluate_many", "expr_to_bmp", "from_truth_table",
    "gen_full_adder", "gen_or_of_and", "insert_muted", "is_canonical", "join", "max_bond",
    "negate", "normalize", "parse_expr", "prune_passthrough", "reorder", "restrict", "reverse_order", "sift",
    "sift_variable", "su_decompose", "swap_adjacent", "to_dot", "truth_table_of", "volume",
]
