"""Command-line front end.

Exit status: 0 on success (including zero solutions), 1 when a run stops on
a budget or cap, or when ``check`` finds a constraint outside LEX, 2 on
unreadable or ill-formed input.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .io import InstanceError, format_lex, parse_instance
from .lex import is_in_lex, reduce_disjoint_transpositions
from .model import Csp, instance_size
from .oracle import AlldiffOracle, ExactOracle, NotAnAlldiffClique
from .search import (BUDGET_EXHAUSTED, DelayMetrics, enumerate_generate_and_test, enumerate_lcsp,
                     enumerate_solutions, enumerate_with_symmetry, symmetry_lex_constraints)
from .symmetry import CapExceeded, build_msc, orbits_of_solutions, verify_variable_symmetry

EXIT_OK, EXIT_STOPPED, EXIT_INPUT = 0, 1, 2

DEFAULT_MSC_CAP = 2_000
DEFAULT_GROUP_CAP = 5_040
DEFAULT_SPACE_CAP = 2_000_000


class InputError(Exception):
    pass


def _load(path: str, order_flag: list[int] | None = None) -> Csp:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        csp = parse_instance(text)
    except InstanceError as exc:
        raise InputError(f"{path}: {exc}") from None
    if order_flag is not None:
        seq = [i - 1 for i in order_flag]
        if sorted(seq) != list(range(csp.n)):
            raise InputError("--order must list every variable exactly once")
        csp.order = seq
    return csp


def _printer(csp: Csp, out):
    seq = csp.search_order

    def emit(sol):
        out.write(" ".join(str(sol[v]) for v in seq) + "\n")
    return emit


def _write_metrics(metrics: DelayMetrics, path: str | None) -> None:
    if path:
        Path(path).write_text(metrics.to_csv(), encoding="utf-8")


def _finish(metrics: DelayMetrics) -> int:
    if metrics.status == BUDGET_EXHAUSTED:
        print("search stopped: node budget exhausted", file=sys.stderr)
        return EXIT_STOPPED
    return EXIT_OK


def _check_symmetries(csp: Csp, msc_cap: int) -> None:
    for sym, line in zip(csp.symmetries, csp.symmetry_lines or [None] * len(csp.symmetries)):
        where = f"sym on line {line}" if line else f"sym {sym}"
        if not sym.is_involution():
            raise InputError(f"{where} is not an involution")
    literals = sum(hi - lo + 1 for lo, hi in csp.domains)
    if literals > msc_cap:
        print(f"warning: {literals} literals exceed the verification cap {msc_cap}; "
              "symmetries are not verified", file=sys.stderr)
        return
    msc = build_msc(csp, node_cap=msc_cap)
    for sym, line in zip(csp.symmetries, csp.symmetry_lines or [None] * len(csp.symmetries)):
        where = f"sym on line {line}" if line else f"sym {sym}"
        try:
            ok = verify_variable_symmetry(csp, sym, msc)
        except ValueError as exc:
            raise InputError(f"{where}: {exc}") from None
        if not ok:
            raise InputError(f"{where} is not a variable symmetry of the instance")


def _make_oracle(csp: Csp, kind: str, budget: int | None):
    if kind == "alldiff":
        try:
            return AlldiffOracle(csp)
        except NotAnAlldiffClique as exc:
            raise InputError(f"alldiff oracle does not apply: {exc}") from None
    return ExactOracle(csp, node_budget=budget)


def cmd_enumerate(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    seq = csp.search_order
    emit = _printer(csp, out)
    if not csp.constraints and all(is_in_lex(c, seq) for c in csp.lex_constraints):
        metrics = enumerate_lcsp(csp.lex_constraints, csp.make_domains(), seq, emit,
                                 node_budget=args.node_budget)
    else:
        metrics = enumerate_solutions(csp, seq, emit, node_budget=args.node_budget)
    _write_metrics(metrics, args.metrics_out)
    return _finish(metrics)


def cmd_enumerate_sym(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    _check_symmetries(csp, args.msc_cap)
    oracle = _make_oracle(csp, args.oracle, args.oracle_budget)
    try:
        symmetry_lex_constraints(csp, csp.symmetries)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    metrics = enumerate_with_symmetry(csp, csp.symmetries, oracle, csp.search_order,
                                      _printer(csp, out), node_budget=args.node_budget)
    _write_metrics(metrics, args.metrics_out)
    return _finish(metrics)


def cmd_reduce(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    for sym, line in zip(csp.symmetries, csp.symmetry_lines):
        if not sym.is_involution():
            raise InputError(f"sym on line {line} is not an involution")
        out.write(format_lex(reduce_disjoint_transpositions(sym, csp.search_order)) + "\n")
    return EXIT_OK


def _without_lex(csp: Csp) -> Csp:
    return Csp(csp.n, csp.domains, csp.constraints, csp.symmetries, [], csp.order, csp.name)


def _all_solutions(csp: Csp, space_cap: int) -> list[tuple[int, ...]]:
    space = 1
    for lo, hi in csp.domains:
        space *= hi - lo + 1
    if space > space_cap:
        raise CapExceeded(f"assignment space {space} exceeds cap {space_cap}")
    sols: list[tuple[int, ...]] = []
    enumerate_solutions(csp, csp.search_order, sols.append)
    return sols


def cmd_orbits(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    sols = _all_solutions(_without_lex(csp), args.space_cap)
    try:
        orbits = orbits_of_solutions(sols, csp.symmetries)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    sizes = sorted((len(o) for o in orbits), reverse=True)
    if len(sizes) == 1:
        out.write(f"1 orbit: size {sizes[0]}\n")
    else:
        out.write(f"{len(sizes)} orbits: sizes {', '.join(map(str, sizes))}\n")
    return EXIT_OK


def cmd_bench(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    _check_symmetries(csp, args.msc_cap)
    oracle = _make_oracle(csp, args.oracle, args.oracle_budget)
    problem = _without_lex(csp)
    t0 = time.perf_counter()
    lex_metrics = enumerate_with_symmetry(csp, csp.symmetries, oracle, csp.search_order,
                                          node_budget=args.node_budget)
    t1 = time.perf_counter()
    gt_metrics = DelayMetrics()
    kept = enumerate_generate_and_test(problem, csp.symmetries, order=csp.search_order,
                                       group_cap=args.group_cap, space_cap=args.space_cap,
                                       metrics=gt_metrics)
    t2 = time.perf_counter()
    rows = [
        ("engine", "emitted", "enumerated", "max_gap_nodes", "max_gap_oracle_calls", "seconds"),
        ("lexleader", lex_metrics.solutions, lex_metrics.solutions, lex_metrics.max_gap("nodes"),
         lex_metrics.max_gap("oracle_calls"), f"{t1 - t0:.4f}"),
        ("generate-and-test", len(kept), gt_metrics.inspected, gt_metrics.max_gap("nodes"),
         gt_metrics.max_gap("oracle_calls"), f"{t2 - t1:.4f}"),
    ]
    widths = [max(len(str(r[c])) for r in rows) for c in range(len(rows[0]))]
    for r in rows:
        out.write("  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")
    return _finish(lex_metrics)


def cmd_check(args, out=sys.stdout) -> int:
    csp = _load(args.file, args.order)
    seq = csp.search_order
    ok = True
    out.write(f"instance {csp.name}: {csp.n} variables, size {instance_size(csp):.2f} bits\n")
    for c in csp.lex_constraints:
        member = is_in_lex(c, seq)
        ok &= member
        out.write(f"{format_lex(c)}: {'in LEX' if member else 'NOT in LEX'}\n")
    verify = sum(hi - lo + 1 for lo, hi in csp.domains) <= args.msc_cap
    msc = build_msc(csp, node_cap=args.msc_cap) if verify and csp.symmetries else None
    for sym, line in zip(csp.symmetries, csp.symmetry_lines):
        if not sym.is_involution():
            ok = False
            out.write(f"sym line {line} {sym}: not an involution\n")
            continue
        red = reduce_disjoint_transpositions(sym, seq)
        member = is_in_lex(red, seq)
        ok &= member
        status = "in LEX" if member else "NOT in LEX"
        if msc is None:
            verdict = "unverified (cap)"
        else:
            try:
                verdict = "symmetry" if verify_variable_symmetry(csp, sym, msc) else "NOT a symmetry"
            except ValueError as exc:
                verdict = f"unverifiable ({exc})"
            ok &= verdict == "symmetry"
        out.write(f"sym line {line} {sym}: {format_lex(red)}: {status}; {verdict}\n")
    return EXIT_OK if ok else EXIT_STOPPED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexenum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="instance file")
        p.add_argument("--order", type=int, nargs="+", metavar="I",
                       help="search order as 1-based indices (overrides the file's order line)")

    def budgets(p):
        p.add_argument("--node-budget", type=int, default=None,
                       help="stop after this many search nodes (default: unlimited)")
        p.add_argument("--metrics-out", default=None, help="write per-gap delay metrics CSV here")

    def oracle(p):
        p.add_argument("--oracle", choices=["exact", "alldiff"], default="exact")
        p.add_argument("--oracle-budget", type=int, default=None,
                       help="node budget per exact-oracle query (default: unlimited)")
        p.add_argument("--msc-cap", type=int, default=DEFAULT_MSC_CAP,
                       help=f"literal count above which symmetries are not verified (default {DEFAULT_MSC_CAP})")

    p = sub.add_parser("enumerate", help="all solutions, without symmetry handling")
    common(p)
    budgets(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("enumerate-sym", help="symmetrically distinct solutions via lexleaders")
    common(p)
    budgets(p)
    oracle(p)
    p.set_defaults(func=cmd_enumerate_sym)

    p = sub.add_parser("reduce", help="print the reduced lex directive of every sym line")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("orbits", help="orbit count and sizes (brute force)")
    common(p)
    p.add_argument("--space-cap", type=int, default=DEFAULT_SPACE_CAP,
                   help=f"largest assignment space to enumerate (default {DEFAULT_SPACE_CAP})")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("bench", help="lexleader search versus generate-and-test")
    common(p)
    oracle(p)
    p.add_argument("--node-budget", type=int, default=None)
    p.add_argument("--group-cap", type=int, default=DEFAULT_GROUP_CAP,
                   help=f"largest symmetry group to generate (default {DEFAULT_GROUP_CAP})")
    p.add_argument("--space-cap", type=int, default=DEFAULT_SPACE_CAP,
                   help=f"largest assignment space to enumerate (default {DEFAULT_SPACE_CAP})")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="LEX membership and symmetry verification report")
    common(p)
    p.add_argument("--msc-cap", type=int, default=DEFAULT_MSC_CAP)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out=sys.stdout)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STOPPED


if __name__ == "__main__":
    sys.exit(main())
