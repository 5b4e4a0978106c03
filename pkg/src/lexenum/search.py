"""Enumeration engines with per-solution-gap delay instrumentation.

``enumerate_lcsp`` runs chronological search maintaining GAC on a family of
lexleader constraints only.  ``enumerate_with_symmetry`` adds problem
constraints that are consulted only through an extendability oracle.  Both
share one search loop: pick the variable at the current depth of the fixed
order, tentatively assign its smallest remaining value, propagate the lex
family, ask the oracle, then descend, emit, or drop the value.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .domains import Domains, Outcome
from .lex import LexLeq, is_in_lex, reduce_disjoint_transpositions
from .model import Csp, Propagator
from .oracle import BudgetExhausted
from .symmetry import CapExceeded, Permutation, generate_group

Sink = Callable[[tuple[int, ...]], None]

COMPLETE = "complete"
BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class GapRecord:
    nodes: int = 0
    values_rejected: int = 0
    propagations: int = 0
    oracle_calls: int = 0
    failed_nodes: int = 0
    wall_ns: int = 0


@dataclass
class DelayMetrics:
    """Work done before the first solution, between solutions, and after the last one."""

    gaps: list[GapRecord] = field(default_factory=list)
    solutions: int = 0
    status: str = COMPLETE
    # solutions examined before filtering (generate-and-test only)
    inspected: int = 0
    # partial assignments ({var: value}) at which propagation wiped out a domain
    failures: list[dict[int, int]] = field(default_factory=list)

    def total(self, name: str) -> int:
        return sum(getattr(g, name) for g in self.gaps)

    @property
    def nodes_expanded(self) -> int:
        return self.total("nodes")

    @property
    def failed_node_count(self) -> int:
        return self.total("failed_nodes")

    @property
    def oracle_calls(self) -> int:
        return self.total("oracle_calls")

    def max_gap(self, name: str) -> int:
        return max((getattr(g, name) for g in self.gaps), default=0)

    def to_csv(self) -> str:
        rows = ["gap_index,nodes,values_rejected,propagations,oracle_calls,wall_ns"]
        for idx, g in enumerate(self.gaps):
            rows.append(f"{idx},{g.nodes},{g.values_rejected},{g.propagations},{g.oracle_calls},{g.wall_ns}")
        return "\n".join(rows) + "\n"


MAX_RECORDED_FAILURES = 1000


def _check_order(order: Sequence[int] | None, n: int) -> list[int]:
    seq = list(range(n)) if order is None else list(order)
    if sorted(seq) != list(range(n)):
        raise ValueError(f"search order {seq} is not a permutation of 0..{n - 1}")
    return seq


def _run(n: int, order: list[int], propagator: Propagator, domains: Domains,
         oracle, sink: Sink | None, node_budget: int | None) -> DelayMetrics:
    metrics = DelayMetrics()
    gap = GapRecord()
    clock = time.perf_counter_ns
    start = clock()
    calls_seen = propagator.calls

    def close_gap():
        nonlocal gap, start, calls_seen
        now = clock()
        gap.wall_ns = now - start
        gap.propagations = propagator.calls - calls_seen
        metrics.gaps.append(gap)
        gap = GapRecord()
        start = now
        calls_seen = propagator.calls

    if n == 0:
        # the empty assignment is the only candidate
        if oracle is None or oracle(domains, {}):
            metrics.solutions = 1
            close_gap()
            if sink is not None:
                sink(())
        close_gap()
        return metrics

    if propagator.run(domains) is Outcome.CONFLICT:
        close_gap()
        return metrics

    masks = domains.masks
    entries = domains.trail.entries
    off = domains.offset
    watch = propagator.watch
    marks = [0] * n
    values = [0] * n
    assignment: dict[int, int] = {}
    budget = node_budget

    def retract(level, var, d):
        # undo the tentative assignment at ``level`` and drop ``d`` from its domain
        del assignment[var]
        mark = marks[level]
        while len(entries) > mark:
            v, old = entries.pop()
            masks[v] = old
        old = masks[var]
        entries.append((var, old))
        masks[var] = old & ~(1 << (d - off))

    i = 0
    try:
        while i >= 0:
            var = order[i]
            m = masks[var]
            if m == 0:
                # every value of this level is used up: undo the parent's choice
                i -= 1
                if i >= 0:
                    retract(i, order[i], values[i])
                continue
            low = m & -m
            d = low.bit_length() - 1 + off
            if budget is not None:
                if budget <= 0:
                    metrics.status = BUDGET_EXHAUSTED
                    break
                budget -= 1
            gap.nodes += 1
            marks[i] = len(entries)
            values[i] = d
            assignment[var] = d
            if m != low:
                entries.append((var, m))
                masks[var] = low
            # propagate even when already singleton: the retracted values are not yet propagated
            if watch[var] and propagator.run(domains, seeds=(var,)) is Outcome.CONFLICT:
                gap.failed_nodes += 1
                if len(metrics.failures) < MAX_RECORDED_FAILURES:
                    metrics.failures.append(dict(assignment))
                retract(i, var, d)
                continue
            if oracle is not None:
                gap.oracle_calls += 1
                if not oracle(domains, assignment):
                    gap.values_rejected += 1
                    retract(i, var, d)
                    continue
            if i == n - 1:
                sol = [0] * n
                for v, val in assignment.items():
                    sol[v] = val
                metrics.solutions += 1
                close_gap()
                if sink is not None:
                    sink(tuple(sol))
                retract(i, var, d)
            else:
                i += 1
    except BudgetExhausted:
        metrics.status = BUDGET_EXHAUSTED
    close_gap()
    return metrics


def enumerate_lcsp(lex_family: Iterable[LexLeq], domains: Domains, order: Sequence[int] | None = None,
                   sink: Sink | None = None, *, require_lex: bool = True,
                   node_budget: int | None = None) -> DelayMetrics:
    """All assignments satisfying a LEX family, in lexicographic order of ``order``.

    With ``require_lex`` (the default) every constraint must be in LEX for the
    given order; switching it off allows running mismatched orders, where
    search is no longer guaranteed failure-free.
    """
    family = list(lex_family)
    n = len(domains)
    seq = _check_order(order, n)
    if require_lex:
        for c in family:
            if not is_in_lex(c, seq):
                raise ValueError(f"{c} is not in LEX for order {[v + 1 for v in seq]}")
    return _run(n, seq, Propagator(family, n), domains, None, sink, node_budget)


def symmetry_lex_constraints(csp: Csp, symmetries: Iterable[Permutation],
                             order: Sequence[int] | None = None) -> list[LexLeq]:
    """Reduced lexleader constraints for ``symmetries`` plus the instance's explicit ones."""
    seq = _check_order(order if order is not None else csp.order, csp.n)
    out = [reduce_disjoint_transpositions(s, seq) for s in symmetries]
    out.extend(csp.lex_constraints)
    for c in out:
        if not is_in_lex(c, seq):
            raise ValueError(f"{c} is not in LEX for order {[v + 1 for v in seq]}")
    return out


def enumerate_with_symmetry(csp: Csp, symmetries: Iterable[Permutation], oracle,
                            order: Sequence[int] | None = None, sink: Sink | None = None,
                            *, node_budget: int | None = None) -> DelayMetrics:
    """Solutions of ``csp`` that also satisfy the lexleaders of ``symmetries``.

    Step by step: assign the smallest value left for the next variable,
    enforce GAC on the lexleader constraints, ask ``oracle`` whether the
    prefix still extends to a solution of the problem constraints over the
    reduced domains, and either go deeper, emit, or drop the value.
    """
    seq = _check_order(order if order is not None else csp.order, csp.n)
    family = symmetry_lex_constraints(csp, symmetries, seq)
    domains = csp.make_domains()
    return _run(csp.n, seq, Propagator(family, csp.n), domains, oracle, sink, node_budget)


def enumerate_solutions(csp: Csp, order: Sequence[int] | None = None, sink: Sink | None = None,
                        *, node_budget: int | None = None) -> DelayMetrics:
    """Plain chronological search maintaining GAC on every constraint of ``csp``."""
    seq = _check_order(order if order is not None else csp.order, csp.n)
    prop = Propagator(csp.all_constraints(), csp.n)
    return _run(csp.n, seq, prop, csp.make_domains(), None, sink, node_budget)


def enumerate_generate_and_test(csp: Csp, symmetries: Sequence[Permutation], *,
                                order: Sequence[int] | None = None, sink: Sink | None = None,
                                group_cap: int = 5040, space_cap: int = 10_000_000,
                                metrics: DelayMetrics | None = None) -> set[tuple[int, ...]]:
    """Baseline: enumerate every solution, keep the lexicographically least of each orbit.

    When ``metrics`` is given it is filled with gaps measured between kept
    (canonical) solutions.
    """
    seq = _check_order(order if order is not None else csp.order, csp.n)
    space = 1
    for lo, hi in csp.domains:
        space *= hi - lo + 1
    if space > space_cap:
        raise CapExceeded(f"assignment space {space} exceeds cap {space_cap}")
    group = generate_group(symmetries, cap=group_cap, n=csp.n)
    inverses = [g.inverse().image for g in group if not g.is_identity()]
    kept: set[tuple[int, ...]] = set()
    marks = []
    seen = 0

    def consider(sol):
        nonlocal seen
        index = seen
        seen += 1
        key = [sol[v] for v in seq]
        for inv in inverses:
            # the image of sol under g has value sol[inv[v]] at variable v
            if [sol[inv[v]] for v in seq] < key:
                return
        kept.add(sol)
        marks.append(index)
        if sink is not None:
            sink(sol)

    raw = enumerate_solutions(csp, seq, consider)
    if metrics is not None:
        _regroup(raw, marks, metrics)
    return kept


def _regroup(raw: DelayMetrics, marks: list[int], out: DelayMetrics) -> None:
    # raw.gaps[j] ends at the (j+1)-th raw solution; merge gaps up to each kept solution
    bounds = [m + 1 for m in marks]
    prev = 0
    for b in bounds + [len(raw.gaps)]:
        merged = GapRecord()
        for g in raw.gaps[prev:b]:
            for name in ("nodes", "values_rejected", "propagations", "oracle_calls", "failed_nodes", "wall_ns"):
                setattr(merged, name, getattr(merged, name) + getattr(g, name))
        out.gaps.append(merged)
        prev = b
    out.solutions = len(marks)
    out.inspected = raw.solutions
    out.status = raw.status
    out.failures = raw.failures
