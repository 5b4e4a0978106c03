"""CSP representation, problem constraints and fixpoint propagation."""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .domains import Domains, Outcome, mask_of
from .lex import LexLeq

if TYPE_CHECKING:
    from .symmetry import Permutation


@dataclass(frozen=True)
class Extensional:
    """Positive table constraint: ``scope`` takes one of the allowed ``tuples``."""

    scope: tuple[int, ...]
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(self, "tuples", tuple(tuple(t) for t in self.tuples))
        object.__setattr__(self, "_allowed", frozenset(self.tuples))

    def propagate(self, domains: Domains) -> Outcome:
        return enforce_gac_extensional(self, domains)

    def satisfied(self, values: Sequence[int]) -> bool:
        return tuple(values[i] for i in self.scope) in self._allowed


@dataclass(frozen=True)
class NotEqual:
    i: int
    j: int

    @property
    def scope(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def propagate(self, domains: Domains) -> Outcome:
        return enforce_gac_extensional(self, domains)

    def satisfied(self, values: Sequence[int]) -> bool:
        return values[self.i] != values[self.j]


@dataclass(frozen=True)
class UnaryIn:
    var: int
    values: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "values", frozenset(self.values))

    @property
    def scope(self) -> tuple[int, ...]:
        return (self.var,)

    def propagate(self, domains: Domains) -> Outcome:
        allowed = mask_of((v for v in self.values if v >= domains.offset), domains.offset)
        changed = domains.keep(self.var, allowed)
        if domains.masks[self.var] == 0:
            return Outcome.CONFLICT
        return Outcome.REVISED if changed else Outcome.UNCHANGED

    def satisfied(self, values: Sequence[int]) -> bool:
        return values[self.var] in self.values


Constraint = Extensional | NotEqual | UnaryIn


@dataclass
class Csp:
    n: int
    domains: list[tuple[int, int]]
    constraints: list = field(default_factory=list)
    symmetries: list = field(default_factory=list)
    lex_constraints: list[LexLeq] = field(default_factory=list)
    order: list[int] | None = None
    name: str = "csp"
    # 1-based source line per symmetry, filled in by the parser
    symmetry_lines: list[int] = field(default_factory=list, compare=False, repr=False)

    def make_domains(self) -> Domains:
        return Domains(self.domains)

    @property
    def search_order(self) -> list[int]:
        return list(self.order) if self.order is not None else list(range(self.n))

    def all_constraints(self) -> list:
        return list(self.constraints) + list(self.lex_constraints)


def validate_csp(csp: Csp) -> list[str]:
    """Structural problems of ``csp``; an empty list means it is well formed."""
    errors = []
    n = csp.n
    if n < 0:
        errors.append(f"negative variable count {n}")
    if len(csp.domains) != n:
        errors.append(f"expected {n} domains, got {len(csp.domains)}")
    for i, dom in enumerate(csp.domains):
        if dom is None:
            errors.append(f"missing domain for variable {i + 1}")
        elif dom[0] > dom[1]:
            errors.append(f"empty domain for variable {i + 1}")

    def in_range(idx):
        return 0 <= idx < n

    for c in csp.constraints:
        if not all(in_range(i) for i in c.scope):
            errors.append(f"scope out of range in {c}")
            continue
        if isinstance(c, NotEqual) and c.i == c.j:
            errors.append(f"neq on a single variable {c.i + 1}")
        if isinstance(c, Extensional):
            if len(set(c.scope)) != len(c.scope):
                errors.append(f"repeated variable in scope {[i + 1 for i in c.scope]}")
            if len(set(c.tuples)) != len(c.tuples):
                errors.append(f"duplicate tuple in constraint on {[i + 1 for i in c.scope]}")
            for t in c.tuples:
                if len(t) != len(c.scope):
                    errors.append(f"arity mismatch: tuple {t} under scope of length {len(c.scope)}")
                    break
                doms = [csp.domains[i] for i in c.scope]
                if any(d is not None and not d[0] <= v <= d[1] for v, d in zip(t, doms)):
                    errors.append(f"tuple {t} has a value outside the initial domains")
                    break
    for c in csp.lex_constraints:
        if not all(in_range(i) for i in c.lhs + c.rhs):
            errors.append(f"scope out of range in lex constraint {c}")
    for s in csp.symmetries:
        if s.n != n:
            errors.append(f"symmetry {s} acts on {s.n} variables, instance has {n}")
        elif sorted(s.image) != list(range(n)):
            errors.append(f"symmetry {s} is not a bijection")
    if csp.order is not None and sorted(csp.order) != list(range(n)):
        errors.append("search order is not a permutation of the variables")
    return errors


def _table_size(c, csp: Csp) -> int:
    if isinstance(c, Extensional):
        return len(c.tuples)
    if isinstance(c, NotEqual):
        (a, b), (p, q) = csp.domains[c.i], csp.domains[c.j]
        overlap = max(0, min(b, q) - max(a, p) + 1)
        return (b - a + 1) * (q - p + 1) - overlap
    return len(c.values)


def instance_size(csp: Csp) -> float:
    """Encoding size in bits: the log of the variable count, every table at
    ``arity * rows * log2(M)`` and every lexleader at ``2k * log2(n)``.

    ``neq`` and unary constraints are charged as their equivalent tables.
    """
    if csp.n == 0:
        return 0.0
    log_n = math.log2(csp.n)
    biggest = max(hi - lo + 1 for lo, hi in csp.domains)
    log_m = math.log2(biggest) if biggest > 0 else 0.0
    size = log_n
    for c in csp.constraints:
        size += len(c.scope) * _table_size(c, csp) * log_m
    for c in csp.lex_constraints:
        size += 2 * c.k * log_n
    return size


def enforce_gac_extensional(c, domains: Domains) -> Outcome:
    """Remove every value of ``c``'s scope that has no allowed tuple over ``domains``."""
    masks = domains.masks
    if isinstance(c, NotEqual):
        i, j = c.i, c.j
        changed = False
        mi = masks[i]
        if mi and mi & (mi - 1) == 0:
            changed |= domains.keep(j, ~mi)
        mj = masks[j]
        if mj and mj & (mj - 1) == 0:
            changed |= domains.keep(i, ~mj)
        if masks[i] == 0 or masks[j] == 0:
            return Outcome.CONFLICT
        return Outcome.REVISED if changed else Outcome.UNCHANGED
    if isinstance(c, UnaryIn):
        return c.propagate(domains)

    off = domains.offset
    scope = c.scope
    current = [masks[v] for v in scope]
    support = [0] * len(scope)
    for t in c.tuples:
        bits = []
        for m, val in zip(current, t):
            if val < off:
                break
            b = 1 << (val - off)
            if not m & b:
                break
            bits.append(b)
        else:
            for p, b in enumerate(bits):
                support[p] |= b
    changed = False
    for v, keep in zip(scope, support):
        changed |= domains.keep(v, keep)
    if any(masks[v] == 0 for v in scope):
        return Outcome.CONFLICT
    return Outcome.REVISED if changed else Outcome.UNCHANGED


class Propagator:
    """Constraint queue that drives a set of constraints to their common GAC fixpoint."""

    def __init__(self, constraints: Iterable, n: int):
        self.constraints = list(constraints)
        self.watch: list[list[int]] = [[] for _ in range(n)]
        for ci, c in enumerate(self.constraints):
            for v in c.scope:
                self.watch[v].append(ci)
        self.calls = 0

    def run(self, domains: Domains, seeds: Iterable[int] | None = None,
            rng: random.Random | None = None) -> Outcome:
        """Propagate until fixpoint.  ``seeds`` lists changed variables; None means all constraints."""
        if seeds is None:
            pending = list(range(len(self.constraints)))
        else:
            pending = list(dict.fromkeys(ci for v in seeds for ci in self.watch[v]))
        if not pending:
            return Outcome.FIXPOINT
        queued = set(pending)
        queue = deque(pending)
        trail = domains.trail
        constraints = self.constraints
        watch = self.watch
        while queue:
            if rng is not None:
                queue.rotate(-rng.randrange(len(queue)))
            ci = queue.popleft()
            queued.discard(ci)
            before = len(trail)
            self.calls += 1
            res = constraints[ci].propagate(domains)
            if res is Outcome.CONFLICT:
                return Outcome.CONFLICT
            if res is Outcome.REVISED:
                for v in trail.changed_since(before):
                    for cj in watch[v]:
                        if cj != ci and cj not in queued:
                            queued.add(cj)
                            queue.append(cj)
        return Outcome.FIXPOINT


def propagate_fixpoint(csp: Csp, domains: Domains, rng: random.Random | None = None) -> Outcome:
    """GAC closure over every problem and lex constraint of ``csp``."""
    return Propagator(csp.all_constraints(), csp.n).run(domains, rng=rng)


def is_consecutive(assignment: Mapping[int, int], order: Sequence[int]) -> bool:
    return set(assignment) == set(order[:len(assignment)])


def _as_total(csp: Csp, a) -> list[int]:
    if isinstance(a, Mapping):
        if set(a) != set(range(csp.n)):
            raise ValueError("assignment is not total")
        return [a[i] for i in range(csp.n)]
    values = list(a)
    if len(values) != csp.n or any(v is None for v in values):
        raise ValueError("assignment is not total")
    return values


def is_solution(csp: Csp, a) -> bool:
    values = _as_total(csp, a)
    for (lo, hi), v in zip(csp.domains, values):
        if not lo <= v <= hi:
            return False
    return all(c.satisfied(values) for c in csp.all_constraints())
