"""Exhaustive reference computations and random instance generators for tests.

Nothing here calls the propagators or search engines under test.
"""
import itertools
import random

import numpy as np

from lexenum.lex import LexLeq
from lexenum.model import Csp, Extensional, NotEqual
from lexenum.symmetry import Permutation


def assignments(value_sets):
    """All total assignments as an int array of shape (count, n)."""
    if not value_sets:
        return np.zeros((1, 0), dtype=int)
    grids = np.meshgrid(*[np.asarray(sorted(vs)) for vs in value_sets], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def lex_holds(arr, lhs, rhs):
    """Row-wise ``arr[:, lhs] <=lex arr[:, rhs]``."""
    if len(lhs) == 0:
        return np.ones(len(arr), dtype=bool)
    diff = arr[:, list(lhs)] - arr[:, list(rhs)]
    nz = diff != 0
    first = nz.argmax(axis=1)
    decided = diff[np.arange(len(arr)), first]
    return ~nz.any(axis=1) | (decided < 0)


def gac_filter_lex(lhs, rhs, value_sets):
    """Supported values per variable of a single lex constraint (None means conflict)."""
    arr = assignments(value_sets)
    ok = arr[lex_holds(arr, lhs, rhs)]
    if len(ok) == 0:
        return None
    scope = set(lhs) | set(rhs)
    return [sorted(set(ok[:, v].tolist())) if v in scope else sorted(value_sets[v])
            for v in range(len(value_sets))]


def gac_filter_table(scope, tuples, value_sets):
    allowed = [t for t in tuples if all(v in value_sets[x] for x, v in zip(scope, t))]
    if not allowed:
        return None
    out = [sorted(vs) for vs in value_sets]
    for p, x in enumerate(scope):
        out[x] = sorted({t[p] for t in allowed})
    return out


def lex_family_solutions(family, value_sets):
    arr = assignments(value_sets)
    keep = np.ones(len(arr), dtype=bool)
    for c in family:
        keep &= lex_holds(arr, c.lhs, c.rhs)
    return [tuple(int(v) for v in row) for row in arr[keep]]


def satisfies(constraint, values):
    if isinstance(constraint, NotEqual):
        return values[constraint.i] != values[constraint.j]
    if isinstance(constraint, Extensional):
        return tuple(values[i] for i in constraint.scope) in set(constraint.tuples)
    if isinstance(constraint, LexLeq):
        for a, b in zip(constraint.lhs, constraint.rhs):
            if values[a] != values[b]:
                return values[a] < values[b]
        return True
    return values[constraint.var] in constraint.values


def solutions(csp, value_sets=None, with_lex=True):
    if value_sets is None:
        value_sets = [range(lo, hi + 1) for lo, hi in csp.domains]
    cons = list(csp.constraints) + (list(csp.lex_constraints) if with_lex else [])
    return [t for t in itertools.product(*[sorted(vs) for vs in value_sets])
            if all(satisfies(c, t) for c in cons)]


def image(sigma, s):
    out = [None] * len(s)
    for i, v in enumerate(s):
        out[sigma.image[i]] = v
    return tuple(out)


def brute_orbits(sols, gens):
    pool = set(sols)
    left = set(pool)
    orbits = []
    while left:
        s = min(left)
        orbit, frontier = {s}, [s]
        while frontier:
            t = frontier.pop()
            for g in gens:
                u = image(g, t)
                if u not in orbit:
                    orbit.add(u)
                    frontier.append(u)
        orbits.append(orbit)
        left -= orbit
    return orbits


def closure(gens, n):
    group = {tuple(range(n))}
    frontier = [tuple(range(n))]
    while frontier:
        p = frontier.pop()
        for g in gens:
            q = tuple(g.image[j] for j in p)
            if q not in group:
                group.add(q)
                frontier.append(q)
    return [Permutation(p) for p in group]


# -- random generators ------------------------------------------------------

def random_lex(rng, n, k_max=None, in_lex=True):
    k_max = n if k_max is None else k_max
    k = rng.randint(0, min(k_max, n))
    if in_lex:
        lhs = sorted(rng.sample(range(n), k))
        rhs = [rng.randint(l, n - 1) for l in lhs]
    else:
        lhs = [rng.randrange(n) for _ in range(k)]
        rhs = [rng.randrange(n) for _ in range(k)]
    return LexLeq(lhs, rhs)


def random_involution(rng, n, max_swaps=None):
    if n < 2:
        return Permutation(range(n))
    free = list(range(n))
    rng.shuffle(free)
    swaps = rng.randint(1, max(1, min(max_swaps or n // 2, n // 2)))
    image = list(range(n))
    for a in range(swaps):
        x, y = free[2 * a], free[2 * a + 1]
        image[x], image[y] = y, x
    return Permutation(image)


def random_value_sets(rng, n, universe):
    out = []
    for _ in range(n):
        k = rng.randint(1, len(universe))
        out.append(set(rng.sample(universe, k)))
    return out


def symmetrize(n, d, scopes_and_tables, group):
    cons = set()
    for scope, table in scopes_and_tables:
        for g in group:
            cons.add(Extensional(tuple(g.image[i] for i in scope), tuple(sorted(table))))
    return Csp(n, [(0, d - 1)] * n, sorted(cons, key=repr))


def random_symmetric_csp(rng, n_range=(3, 6), d_range=(2, 3), gens_range=(1, 3)):
    """Random extensional CSP closed under a random set of involutions."""
    n = rng.randint(*n_range)
    d = rng.randint(*d_range)
    gens = [random_involution(rng, n) for _ in range(rng.randint(*gens_range))]
    group = closure(gens, n)
    seeds = []
    for _ in range(rng.randint(1, 3)):
        arity = rng.randint(2, min(3, n))
        scope = tuple(rng.sample(range(n), arity))
        full = list(itertools.product(range(d), repeat=arity))
        table = rng.sample(full, rng.randint(len(full) // 2, len(full)))
        seeds.append((scope, table))
    return symmetrize(n, d, seeds, group), gens


def alldiff_csp(n, lo=1, hi=None):
    hi = n if hi is None else hi
    return Csp(n, [(lo, hi)] * n, [NotEqual(i, j) for i, j in itertools.combinations(range(n), 2)])


def make_rng(seed):
    return random.Random(seed)
