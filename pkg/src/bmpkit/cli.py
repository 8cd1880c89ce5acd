"""Command-line interface: ``bmpkit <subcommand> ...``.

Exit status 0 on success, 1 on a semantic failure (verification mismatch,
search limits), 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import bdd as bddmod
from . import core
from .core import (Bmp, TruthTable, clean, evaluate, from_truth_table, max_bond, truth_table_of,
                   volume)
from .errors import BmpError, LimitExceeded, ParseError
from .ops import GateTable, apply, reorder
from .reorder import EXACT_LIMIT, astar_bnb, astar_optimal_order, sift
from .synth import (adder_inputs, adder_interleaved_order, eval_expr, evens_then_odds_order,
                    expr_to_bmp, gen_full_adder, gen_or_of_and, index_order, read_expr_file)


class UsageError(Exception):
    pass


def _split_list(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.replace(" ", ",").split(",")) if t]


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_any(path: str):
    """BMP/1, BDD/1 or TT/1 file, chosen by header."""
    text = _read(path)
    head = text.split("\n", 1)[0].strip()
    if head == "BMP/1":
        return core.loads(text)
    if head == "BDD/1":
        return bddmod.loads(text)
    if head == "TT/1":
        return core.loads_table(text)
    raise ParseError(f"unknown file header {head!r} (expected BMP/1, BDD/1 or TT/1)", 1)


def _load_bmp(path: str) -> Bmp:
    obj = _load_any(path)
    if isinstance(obj, bddmod.Bdd):
        return bddmod.bdd_to_bmp(obj)
    if isinstance(obj, TruthTable):
        return from_truth_table(obj)
    return obj


def _parse_assign(text: str) -> dict[str, int]:
    out = {}
    for item in _split_list(text):
        name, eq, val = item.partition("=")
        if not eq or val not in ("0", "1"):
            raise UsageError(f"bad assignment {item!r}; expected name=0 or name=1")
        out[name] = int(val)
    return out


# -- subcommands -----------------------------------------------------------------

def cmd_build(args) -> int:
    names, expr = read_expr_file(_read(args.expr))
    order = _split_list(args.order) if args.order else names
    b = expr_to_bmp(expr, order, method=args.method)
    _write(core.dumps(b), args.output)
    return 0


def cmd_eval(args) -> int:
    b = _load_bmp(args.file)
    assignment = _parse_assign(args.assign)
    missing = [v for v in b.order if v not in assignment]
    if missing:
        raise UsageError(f"missing values for {', '.join(missing)}")
    print(" ".join(str(bit) for bit in evaluate(b, assignment)))
    return 0


def cmd_stats(args) -> int:
    b = _load_bmp(args.file)
    print(f"vars={' '.join(b.order)}")
    print(f"outputs={b.num_outputs}")
    print(f"volume={volume(b)}")
    print(f"rows={' '.join(map(str, b.row_counts()))}")
    print(f"bonds={' '.join(map(str, b.bonds()))}")
    print(f"max_bond={max_bond(b)}")
    print(f"terminal={' '.join(map(str, b.terminal))}")
    print(f"canonical={str(b.canonical).lower()}")
    return 0


def cmd_clean(args) -> int:
    _write(core.dumps(clean(_load_bmp(args.file))), args.output)
    return 0


def cmd_reorder(args) -> int:
    b = clean(_load_bmp(args.file))
    if args.target:
        out = reorder(b, _split_list(args.target))
        info = {"volume": volume(out)}
    elif args.sift:
        t0 = time.perf_counter()
        out, rep = sift(b)
        info = {"initial_volume": rep.initial_volume, "volume": rep.final_volume,
                "passes": rep.passes, "wall_time_ms": round((time.perf_counter() - t0) * 1000, 3)}
    else:
        search = astar_bnb if args.bnb else astar_optimal_order
        order, vol, stats = search(b, max_vars=args.max_vars)
        out = reorder(b, order)
        info = {"volume": vol, **stats.__dict__}
    info["order"] = " ".join(out.order)
    _write(core.dumps(out), args.output)
    # keep stdout machine-readable when the train itself goes there
    stream = sys.stderr if args.output in (None, "-") else sys.stdout
    for k, v in info.items():
        print(f"{k}={v}", file=stream)
    return 0


def cmd_convert(args) -> int:
    obj = _load_any(args.file)
    if args.to == "bdd":
        b = obj if isinstance(obj, Bmp) else _load_bmp(args.file)
        _write(bddmod.dumps(bddmod.bmp_to_bdd(b)), args.output)
    elif args.to == "bmp":
        _write(core.dumps(_load_bmp(args.file)), args.output)
    else:
        _write(core.dumps_table(truth_table_of(_load_bmp(args.file))), args.output)
    return 0


def cmd_export_dot(args) -> int:
    obj = _load_any(args.file)
    if isinstance(obj, bddmod.Bdd):
        d = obj
    else:
        d = bddmod.bmp_to_bdd(obj if isinstance(obj, Bmp) else from_truth_table(obj))
    if args.prune_passthrough:
        d = bddmod.prune_passthrough(d)
    _write(bddmod.to_dot(d, name=args.name, show_roots=args.show_roots), args.output)
    return 0


def cmd_verify(args) -> int:
    b = _load_bmp(args.file)
    core.check_invariants(b)
    names = list(b.order)
    got = truth_table_of(b, names)
    if args.against is None:
        want = truth_table_of(clean(b), names)
        label = "clean(FILE)"
    else:
        text = _read(args.against)
        if text.startswith("TT/1"):
            want = core.loads_table(text)
        elif text.startswith("BMP/1"):
            ref = core.loads(text)
            want = truth_table_of(ref, list(ref.order))
        else:
            enames, expr = read_expr_file(text)
            if set(enames) != set(names):
                print(f"variable sets differ: {sorted(names)} vs {sorted(enames)}", file=sys.stderr)
                return 1
            want = TruthTable.from_function(names, lambda a: (eval_expr(expr, a),), 1)
        label = args.against
    if set(want.var_names) != set(names) or want.num_outputs != got.num_outputs:
        print("shape mismatch between FILE and reference", file=sys.stderr)
        return 1
    if list(want.var_names) != names:
        want = TruthTable.from_function(names, want.lookup, want.num_outputs)
    diff = np.nonzero(np.any(got.values != want.values, axis=1))[0]
    if len(diff):
        row = int(diff[0])
        assign = ",".join(f"{v}={(row >> i) & 1}" for i, v in enumerate(names))
        print(f"mismatch against {label} at {assign}: "
              f"got {' '.join(map(str, got.values[row]))}, "
              f"expected {' '.join(map(str, want.values[row]))}", file=sys.stderr)
        return 1
    print(f"ok: {2 ** len(names)} assignments agree")
    return 0


_ADDER_ORDERS = {
    "a-then-b": adder_inputs,
    "interleaved": adder_interleaved_order,
}


def cmd_bench(args) -> int:
    print("n\tinitial_volume\toptimizer\truntime_s\tvolume\ttable_size")
    last = None
    for n in args.n:
        b = gen_full_adder(n, order=_ADDER_ORDERS[args.initial_order](n))
        t0 = time.perf_counter()
        if args.optimizer == "sift":
            _, rep = sift(b)
            vol = rep.final_volume
        else:
            search = astar_bnb if args.optimizer == "bnb" else astar_optimal_order
            _, vol, _ = search(b, max_vars=max(args.max_vars, 2 * n))
        dt = time.perf_counter() - t0
        # table_size also counts the two terminal entries
        print(f"{n}\t{volume(b)}\t{args.optimizer}\t{dt:.6f}\t{vol}\t{vol + len(b.terminal)}")
        last = (vol, vol + len(b.terminal))
    if args.optimizer != "sift":
        print(f"min_volume={last[0]}")
        print(f"min_table_size={last[1]}")
    return 0


def cmd_gen(args) -> int:
    if args.kind == "adder":
        order = _ADDER_ORDERS[args.order or "interleaved"](args.n)
        b = gen_full_adder(args.n, order=order, method=args.method)
    elif args.kind == "or-of-and":
        order = {"index": index_order, "evens-odds": evens_then_odds_order}[args.order or "index"](args.n)
        b = gen_or_of_and(args.n, order)
    else:
        rng = np.random.default_rng(args.seed)
        names = [f"x{i}" for i in range(args.n)]
        values = rng.integers(0, 2, size=(2 ** args.n, args.outputs), dtype=np.uint8)
        b = from_truth_table(TruthTable(names, values))
    _write(core.dumps(b), args.output)
    return 0


def cmd_apply(args) -> int:
    f, g = _load_bmp(args.left), _load_bmp(args.right)
    _write(core.dumps(apply(f, g, GateTable.parse(args.gate), method=args.method)), args.output)
    return 0


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmpkit", description="Binary matrix product toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("-o", "--output", help="output path (default: stdout)")

    sp = sub.add_parser("build", help="build a BMP from an expression file")
    sp.add_argument("--expr", required=True, help="expression file ('vars:' line, then expression)")
    sp.add_argument("--order", help="comma-separated variable order (default: the vars line)")
    sp.add_argument("--method", choices=["sum", "product"], default="sum")
    out(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("eval", help="evaluate at one assignment")
    sp.add_argument("file")
    sp.add_argument("--assign", required=True, help='e.g. "x2=0,x1=1,x0=1"')
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("stats", help="volume and bond dimensions")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("clean", help="bring a train to canonical form")
    sp.add_argument("file")
    out(sp)
    sp.set_defaults(func=cmd_clean)

    sp = sub.add_parser("reorder", help="change or optimize the variable order")
    sp.add_argument("file")
    how = sp.add_mutually_exclusive_group(required=True)
    how.add_argument("--target", help="comma-separated target order")
    how.add_argument("--sift", action="store_true")
    how.add_argument("--astar", action="store_true")
    sp.add_argument("--bnb", action="store_true", help="with --astar: branch-and-bound pruning")
    sp.add_argument("--max-vars", type=int, default=EXACT_LIMIT, help="exact-search size limit")
    out(sp)
    sp.set_defaults(func=cmd_reorder)

    sp = sub.add_parser("convert", help="convert between BMP/1, BDD/1 and TT/1")
    sp.add_argument("file")
    sp.add_argument("--to", choices=["bdd", "bmp", "tt"], required=True)
    out(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("export-dot", help="Graphviz rendering of the BDD")
    sp.add_argument("file")
    sp.add_argument("--prune-passthrough", action="store_true")
    sp.add_argument("--show-roots", action="store_true", help="draw one entry node per output")
    sp.add_argument("--name", default="bmp", help="graph name (default: bmp)")
    out(sp)
    sp.set_defaults(func=cmd_export_dot)

    sp = sub.add_parser("verify", help="exhaustive comparison against a reference")
    sp.add_argument("file")
    sp.add_argument("--against", help="expression file, TT/1 table or BMP/1 file (default: clean(FILE))")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="variable-order benchmark on the adder family")
    sp.add_argument("family", choices=["adder"])
    sp.add_argument("--n", type=int, nargs="+", default=[8])
    sp.add_argument("--optimizer", choices=["astar", "bnb", "sift"], default="astar")
    sp.add_argument("--initial-order", choices=sorted(_ADDER_ORDERS), default="a-then-b")
    sp.add_argument("--max-vars", type=int, default=EXACT_LIMIT)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gen", help="generate benchmark BMPs")
    sp.add_argument("kind", choices=["adder", "or-of-and", "random"])
    sp.add_argument("--n", type=int, required=True, help="adder bits, OR-of-AND terms or random inputs")
    sp.add_argument("--order", help="adder: interleaved|a-then-b; or-of-and: index|evens-odds")
    sp.add_argument("--method", choices=["sum", "product"], default="sum")
    sp.add_argument("--outputs", type=int, default=1, help="random: number of outputs")
    sp.add_argument("--seed", type=int, default=0)
    out(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("apply", help="combine two BMPs with a 4-bit gate table h(00)h(01)h(10)h(11)")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--gate", required=True)
    sp.add_argument("--method", choices=["sum", "product"], default="sum")
    out(sp)
    sp.set_defaults(func=cmd_apply)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen" and args.order:
        valid = {"adder": _ADDER_ORDERS, "or-of-and": ("index", "evens-odds"), "random": ()}
        if args.order not in valid[args.kind]:
            print(f"bmpkit: error: --order {args.order!r} is not valid for {args.kind}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (UsageError, ParseError) as e:
        print(f"bmpkit: error: {e}", file=sys.stderr)
        return 2
    except (LimitExceeded, BmpError) as e:
        print(f"bmpkit: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
