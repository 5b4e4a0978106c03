"""Extendability oracles: can a consecutive partial assignment be completed
to a solution of the problem constraints over the current reduced domains?"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .domains import Domains, Outcome, mask_of
from .model import Csp, NotEqual, Propagator, UnaryIn


class BudgetExhausted(RuntimeError):
    """A configured node budget ran out before the question was settled."""


@dataclass
class OracleQuery:
    csp: Csp
    domains: Domains
    assignment: Mapping[int, int] = field(default_factory=dict)

    def check(self) -> None:
        for var, value in self.assignment.items():
            if self.domains.masks[var] != self.domains.bit(value):
                raise ValueError(f"assigned variable {var + 1} does not have singleton domain {{{value}}}")


class ExactOracle:
    """Complete backtracking with GAC over the problem constraints (lex constraints ignored).

    Exponential in the worst case; ``node_budget`` bounds the work per query.
    """

    def __init__(self, csp: Csp, node_budget: int | None = None):
        self.csp = csp
        self.node_budget = node_budget
        self.propagator = Propagator(csp.constraints, csp.n)
        self.nodes = 0

    def __call__(self, domains: Domains, assignment: Mapping[int, int] | None = None) -> bool:
        doms = domains.copy()
        if any(m == 0 for m in doms.masks):
            return False
        if self.propagator.run(doms) is Outcome.CONFLICT:
            return False
        self._left = self.node_budget
        return self._extend(doms)

    def _extend(self, doms: Domains) -> bool:
        masks = doms.masks
        var, best = -1, None
        for v, m in enumerate(masks):
            if m & (m - 1):
                size = bin(m).count("1")
                if best is None or size < best:
                    var, best = v, size
        if var < 0:
            return True
        for value in doms.values(var):
            self.nodes += 1
            if self._left is not None:
                if self._left <= 0:
                    raise BudgetExhausted(f"exact oracle exceeded {self.node_budget} nodes")
                self._left -= 1
            mark = doms.mark()
            doms.assign(var, value)
            if self.propagator.run(doms, seeds=(var,)) is not Outcome.CONFLICT and self._extend(doms):
                return True
            doms.undo(mark)
        return False


class NotAnAlldiffClique(ValueError):
    pass


class AlldiffOracle:
    """Matching oracle for instances whose only non-unary constraints form one
    complete clique of binary disequalities (a decomposed alldifferent).

    The instance class is closed under domain reductions, so the answer is a
    system-of-distinct-representatives test on the reduced domains.  The last
    matching found is reused as a warm start for the next query.
    """

    def __init__(self, csp: Csp):
        pairs = set()
        self.unary: dict[int, frozenset[int]] = {}
        for c in csp.constraints:
            if isinstance(c, NotEqual):
                pairs.add(frozenset((c.i, c.j)))
            elif isinstance(c, UnaryIn):
                prev = self.unary.get(c.var)
                self.unary[c.var] = c.values if prev is None else prev & c.values
            else:
                raise NotAnAlldiffClique(f"constraint {c} is not a disequality")
        clique = sorted({v for p in pairs for v in p})
        expected = {frozenset(p) for p in itertools.combinations(clique, 2)}
        if pairs != expected:
            raise NotAnAlldiffClique("disequalities do not form a complete clique")
        self.csp = csp
        self.clique = clique
        self._match = [0] * len(clique)
        self._unary_masks: dict[int, int] = {}
        self._offset = None

    def _unary_for(self, offset: int) -> dict[int, int]:
        if self._offset != offset:
            self._offset = offset
            self._unary_masks = {
                v: mask_of((x for x in vals if x >= offset), offset) for v, vals in self.unary.items()}
        return self._unary_masks

    def __call__(self, domains: Domains, assignment: Mapping[int, int] | None = None) -> bool:
        masks = domains.masks
        if 0 in masks:
            return False
        clique = self.clique
        if self.unary:
            unary = self._unary_for(domains.offset)
            for v, u in unary.items():
                if masks[v] & u == 0:
                    return False
            dom = [masks[v] & unary.get(v, -1) for v in clique]
        else:
            dom = [masks[v] for v in clique]
        used = 0
        for m in dom:
            if not m & (m - 1):
                if used & m:
                    return False
                used |= m

        k = len(clique)
        prev = self._match
        owner: dict[int, int] = {}
        match = [0] * k
        for p in range(k):
            b = prev[p]
            if b and dom[p] & b and b not in owner:
                owner[b] = p
                match[p] = b

        def augment(p, seen):
            rest = dom[p] & ~seen[0]
            while rest:
                b = rest & -rest
                rest ^= b
                seen[0] |= b
                q = owner.get(b)
                if q is None or augment(q, seen):
                    owner[b] = p
                    match[p] = b
                    return True
            return False

        ok = True
        for p in range(k):
            if not match[p] and not augment(p, [0]):
                ok = False
                break
        self._match = match
        return ok


def exact_oracle(q: OracleQuery, node_budget: int | None = None) -> bool:
    q.check()
    return ExactOracle(q.csp, node_budget)(q.domains, q.assignment)


def alldiff_oracle(q: OracleQuery) -> bool:
    q.check()
    return AlldiffOracle(q.csp)(q.domains, q.assignment)


ORACLES = {"exact": ExactOracle, "alldiff": AlldiffOracle}
