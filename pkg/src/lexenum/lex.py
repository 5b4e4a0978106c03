"""Lexleader constraints: construction, reduction, LEX membership, and GAC."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .domains import Domains, Outcome

if TYPE_CHECKING:
    from .symmetry import Permutation


@dataclass(frozen=True)
class LexLeq:
    """``[x_lhs[0], ..., x_lhs[k-1]] <=lex [x_rhs[0], ..., x_rhs[k-1]]`` over 0-based indices."""

    lhs: tuple[int, ...]
    rhs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(int(i) for i in self.lhs))
        object.__setattr__(self, "rhs", tuple(int(i) for i in self.rhs))
        if len(self.lhs) != len(self.rhs):
            raise ValueError(f"lhs and rhs lengths differ: {len(self.lhs)} != {len(self.rhs)}")

    @property
    def k(self) -> int:
        return len(self.lhs)

    @property
    def scope(self) -> tuple[int, ...]:
        return tuple(dict.fromkeys(self.lhs + self.rhs))

    def propagate(self, domains: Domains) -> Outcome:
        return propagate_lex_gac(self, domains)

    def satisfied(self, values: Sequence[int]) -> bool:
        return lex_satisfied(self, values)

    def relabel(self, position: Sequence[int]) -> "LexLeq":
        return LexLeq([position[i] for i in self.lhs], [position[i] for i in self.rhs])

    def __str__(self) -> str:
        left = ",".join(f"x{i + 1}" for i in self.lhs)
        right = ",".join(f"x{i + 1}" for i in self.rhs)
        return f"[{left}] <=lex [{right}]"


def _positions(order: Sequence[int] | None, n: int) -> list[int]:
    if order is None:
        return list(range(n))
    pos = [0] * len(order)
    for p, v in enumerate(order):
        pos[v] = p
    return pos


def lexleader_from_perm(sigma: "Permutation") -> LexLeq:
    """Full lexleader ``[x_0..x_{n-1}] <=lex [x_sigma(0)..x_sigma(n-1)]``.

    The result is generally not in LEX; see :func:`reduce_disjoint_transpositions`.
    """
    sigma.check()
    return LexLeq(range(sigma.n), sigma.image)


def reduce_disjoint_transpositions(sigma: "Permutation", order: Sequence[int] | None = None) -> LexLeq:
    """Reduced lexleader of an involution, in LEX with respect to ``order``.

    Fixed points are dropped, and for each swapped pair only the occurrence
    whose left variable comes first in ``order`` is kept.
    """
    sigma.check()
    if not sigma.is_involution():
        raise ValueError(f"not an involution: {sigma}")
    seq = list(order) if order is not None else list(range(sigma.n))
    lhs, rhs = [], []
    seen = set()
    for v in seq:
        w = sigma.image[v]
        if w == v or v in seen:
            continue
        seen.add(w)
        lhs.append(v)
        rhs.append(w)
    return LexLeq(lhs, rhs)


def is_in_lex(c: LexLeq, order: Sequence[int] | None = None) -> bool:
    if len(c.lhs) != len(c.rhs):
        return False
    n = max(c.lhs + c.rhs, default=-1) + 1
    if order is not None:
        n = len(order)
        if any(i < 0 or i >= n for i in c.lhs + c.rhs):
            return False
    pos = _positions(order, n)
    left = [pos[i] for i in c.lhs]
    right = [pos[i] for i in c.rhs]
    if any(a >= b for a, b in zip(left, left[1:])):
        return False
    return all(a <= b for a, b in zip(left, right))


def lex_satisfied(c: LexLeq, values: Sequence[int]) -> bool:
    if any(v is None for v in values):
        raise ValueError("lex_satisfied needs a total assignment")
    for a, b in zip(c.lhs, c.rhs):
        va, vb = values[a], values[b]
        if va < vb:
            return True
        if va > vb:
            return False
    return True


# -- propagation ----------------------------------------------------------

def _low(m: int) -> int:
    return (m & -m).bit_length() - 1


def _below(b: int) -> int:
    """Mask of bits strictly below bit index ``b``."""
    return (1 << b) - 1 if b > 0 else 0


def _above(b: int) -> int:
    """Mask of bits strictly above bit index ``b`` (open-ended, as a negative int)."""
    return -1 << (b + 1)


def _nontrivial_pairs(c: LexLeq) -> list[tuple[int, int]]:
    # a pair (x, x) is always equal and never decides the comparison
    return [(a, b) for a, b in zip(c.lhs, c.rhs) if a != b]


def propagate_lex_gac(c: LexLeq, domains: Domains) -> Outcome:
    """Make ``c`` generalised arc consistent over ``domains``.

    Constraints whose variable occurrences are pairwise distinct use a linear
    prefix/suffix filter; any repeated variable falls back to an exact
    per-value support test.  Either way the filter is rerun until it removes
    nothing more.
    """
    pairs = _nontrivial_pairs(c)
    if not pairs:
        for v in c.scope:
            if domains.masks[v] == 0:
                return Outcome.CONFLICT
        return Outcome.UNCHANGED
    flat = [v for p in pairs for v in p]
    distinct = len(set(flat)) == len(flat)
    step = _filter_distinct if distinct else _filter_shared
    outcome = Outcome.UNCHANGED
    while True:
        res = step(pairs, domains)
        if res is Outcome.CONFLICT:
            return res
        if res is Outcome.UNCHANGED:
            return outcome
        outcome = Outcome.REVISED


def _filter_distinct(pairs: list[tuple[int, int]], domains: Domains) -> Outcome:
    masks = domains.masks
    k = len(pairs)
    for x, y in pairs:
        if masks[x] == 0 or masks[y] == 0:
            return Outcome.CONFLICT
    # beta: pairs [0, beta) can all be made equal
    beta = 0
    while beta < k and masks[pairs[beta][0]] & masks[pairs[beta][1]]:
        beta += 1
    # alpha: first position (inside the equalisable prefix) where x < y is possible
    alpha = None
    for j in range(min(beta + 1, k)):
        x, y = pairs[j]
        if _low(masks[x]) < masks[y].bit_length() - 1:
            alpha = j
            break
    if alpha is None and beta < k:
        return Outcome.CONFLICT
    # suffix feasibility of the lex comparison on pairs [j, k)
    feas = [True] * (k + 1)
    for j in range(k - 1, -1, -1):
        x, y = pairs[j]
        mx, my = masks[x], masks[y]
        feas[j] = _low(mx) < my.bit_length() - 1 or (mx & my != 0 and feas[j + 1])
    if not feas[0]:
        return Outcome.CONFLICT
    last = k - 1 if alpha is None else alpha
    changed = False
    for j in range(last + 1):
        x, y = pairs[j]
        mx, my = masks[x], masks[y]
        keep_x = _below(my.bit_length() - 1)
        keep_y = _above(_low(mx))
        if feas[j + 1]:
            keep_x |= my
            keep_y |= mx
        changed |= domains.keep(x, keep_x)
        changed |= domains.keep(y, keep_y)
        if masks[x] == 0 or masks[y] == 0:
            return Outcome.CONFLICT
    return Outcome.REVISED if changed else Outcome.UNCHANGED


def _satisfiable_shared(pairs: list[tuple[int, int]], masks: dict[int, int]) -> bool:
    """Exact satisfiability of a lex comparison whose pairs may share variables.

    Walks the pairs while merging the equality classes forced by the prefix;
    a strict ``x < y`` at position j is feasible iff the two classes differ
    and min(class of x) < max(class of y).
    """
    if any(m == 0 for m in masks.values()):
        return False
    parent = {v: v for v in masks}
    cls = dict(masks)

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for x, y in pairs:
        a, b = find(x), find(y)
        if a == b:
            continue
        if _low(cls[a]) < cls[b].bit_length() - 1:
            return True
        merged = cls[a] & cls[b]
        if not merged:
            return False
        parent[b] = a
        cls[a] = merged
    return True


def _filter_shared(pairs: list[tuple[int, int]], domains: Domains) -> Outcome:
    masks = domains.masks
    local = {v: masks[v] for p in pairs for v in p}
    if not _satisfiable_shared(pairs, local):
        return Outcome.CONFLICT
    supported = {}
    for v, m in local.items():
        keep = 0
        rest = m
        while rest:
            low = rest & -rest
            rest ^= low
            local[v] = low
            if _satisfiable_shared(pairs, local):
                keep |= low
        local[v] = m
        supported[v] = keep
    changed = False
    for v, keep in supported.items():
        changed |= domains.keep(v, keep)
        if masks[v] == 0:
            return Outcome.CONFLICT
    return Outcome.REVISED if changed else Outcome.UNCHANGED
