"""Variable permutations, microstructure-complement checks, groups and orbits."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Csp, Extensional, NotEqual, UnaryIn


class CapExceeded(RuntimeError):
    """A desk-scale resource cap (group size, literal count, ...) was hit."""


@dataclass(frozen=True)
class Permutation:
    """Variable permutation given by its image: ``image[i]`` is sigma(i), 0-based."""

    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(int(i) for i in self.image))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Sequence[int]) -> "Permutation":
        image = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                image[a] = b
        return cls(image)

    @property
    def n(self) -> int:
        return len(self.image)

    def check(self) -> None:
        if sorted(self.image) != list(range(self.n)):
            raise ValueError(f"not a bijection: {list(self.image)}")

    def __call__(self, i: int) -> int:
        return self.image[i]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        return Permutation(self.image[j] for j in other.image)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))

    def is_involution(self) -> bool:
        return all(self.image[j] == i for i, j in enumerate(self.image))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(self.n):
            if start in seen or self.image[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            j = self.image[start]
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self.image[j]
            out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cyc)


def apply_symmetry(sigma: Permutation, s: Sequence[int]) -> tuple[int, ...]:
    """Image assignment ``s'`` with ``s'[sigma(i)] = s[i]``."""
    if len(s) != sigma.n:
        raise ValueError("assignment length does not match permutation")
    out = [None] * sigma.n
    for i, v in enumerate(s):
        out[sigma.image[i]] = v
    return tuple(out)


@dataclass
class Msc:
    nodes: set[tuple[int, int]]
    edges: set[frozenset[tuple[int, int]]]


def _constraint_table(c, csp: Csp) -> tuple[tuple[int, ...], set[tuple[int, ...]]]:
    if isinstance(c, Extensional):
        return c.scope, set(c.tuples)
    if isinstance(c, NotEqual):
        (a, b), (p, q) = csp.domains[c.i], csp.domains[c.j]
        allowed = {(u, v) for u in range(a, b + 1) for v in range(p, q + 1) if u != v}
        return c.scope, allowed
    if isinstance(c, UnaryIn):
        return c.scope, {(v,) for v in c.values}
    raise TypeError(f"no table form for {c!r}")


def build_msc(csp: Csp, node_cap: int = 10_000, edge_cap: int = 200_000) -> Msc:
    """Microstructure complement over the initial domains (problem constraints only)."""
    nodes = {(x, d) for x, (lo, hi) in enumerate(csp.domains) for d in range(lo, hi + 1)}
    if len(nodes) > node_cap:
        raise CapExceeded(f"microstructure has {len(nodes)} literals, cap is {node_cap}")
    edges: set[frozenset] = set()
    for x, (lo, hi) in enumerate(csp.domains):
        for d1, d2 in itertools.combinations(range(lo, hi + 1), 2):
            edges.add(frozenset({(x, d1), (x, d2)}))
    for c in csp.constraints:
        scope, allowed = _constraint_table(c, csp)
        ranges = [range(csp.domains[v][0], csp.domains[v][1] + 1) for v in scope]
        count = 1
        for r in ranges:
            count *= len(r)
        if len(edges) + count > edge_cap:
            raise CapExceeded(f"microstructure edge count exceeds cap {edge_cap}")
        for t in itertools.product(*ranges):
            if t not in allowed:
                edges.add(frozenset(zip(scope, t)))
    return Msc(nodes, edges)


def verify_variable_symmetry(csp: Csp, sigma: Permutation, msc: Msc | None = None) -> bool:
    """True iff ``(x, d) -> (sigma(x), d)`` is an automorphism of the instance's MSC."""
    sigma.check()
    if sigma.n != csp.n:
        raise ValueError(f"permutation acts on {sigma.n} variables, instance has {csp.n}")
    for i, j in enumerate(sigma.image):
        if csp.domains[i] != csp.domains[j]:
            raise ValueError(
                f"variables {i + 1} and {j + 1} are exchanged but have different domains")
    if msc is None:
        msc = build_msc(csp)
    for edge in msc.edges:
        image = frozenset((sigma.image[x], d) for x, d in edge)
        if image not in msc.edges:
            return False
    return True


def generate_group(generators: Iterable[Permutation], cap: int = 5040, n: int | None = None) -> set[Permutation]:
    """Closure of ``generators`` under composition (breadth first)."""
    gens = list(generators)
    for g in gens:
        g.check()
    if n is None:
        n = gens[0].n if gens else 0
    ident = Permutation.identity(n)
    group = {ident}
    frontier = deque([ident])
    while frontier:
        p = frontier.popleft()
        for g in gens:
            q = g.compose(p)
            if q not in group:
                group.add(q)
                if len(group) > cap:
                    raise CapExceeded(f"group has more than {cap} elements")
                frontier.append(q)
    return group


def orbits_of_solutions(solutions: Iterable[Sequence[int]], generators: Sequence[Permutation]) -> list[set[tuple[int, ...]]]:
    """Partition ``solutions`` into orbits of the group generated by ``generators``."""
    pool = {tuple(s) for s in solutions}
    seen: set[tuple[int, ...]] = set()
    orbits = []
    for start in sorted(pool):
        if start in seen:
            continue
        orbit = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for g in generators:
                t = apply_symmetry(g, s)
                if t not in pool:
                    raise ValueError(f"{g} maps solution {s} outside the solution set")
                if t not in orbit:
                    orbit.add(t)
                    seen.add(t)
                    queue.append(t)
        orbits.append(orbit)
    return orbits
