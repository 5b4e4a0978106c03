"""Line-oriented instance files.

Directives (indices are 1-based, ``#`` starts a comment)::

    csp NAME
    vars N
    dom I MIN MAX
    ext K I1..IK ; T11..T1K ; T21..T2K ; ...
    neq I J
    alldiff I1..IK
    sym IMG1..IMGN
    lex K L1..LK <= R1..RK
    order I1..IN
"""
from __future__ import annotations

import itertools

from .lex import LexLeq
from .model import Csp, Extensional, NotEqual, UnaryIn, validate_csp
from .symmetry import Permutation


class InstanceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not t.lstrip("+-").isdigit())
        raise InstanceError(f"expected an integer, got {bad!r}", lineno) from None


def parse_instance(text: str, *, validate: bool = True) -> Csp:
    name = "csp"
    n = None
    domains: list = []
    constraints: list = []
    symmetries: list[Permutation] = []
    sym_lines: list[int] = []
    lex: list[LexLeq] = []
    order = None

    def index(i: int, lineno: int) -> int:
        if not 1 <= i <= n:
            raise InstanceError(f"variable index {i} out of range 1..{n}", lineno)
        return i - 1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "csp":
            if len(rest) != 1:
                raise InstanceError("csp takes exactly one name", lineno)
            name = rest[0]
            continue
        if head == "vars":
            if n is not None:
                raise InstanceError("vars given twice", lineno)
            (count,) = _ints(rest, lineno) if len(rest) == 1 else (None,)
            if count is None or count < 0:
                raise InstanceError("vars takes one non-negative count", lineno)
            n = count
            domains = [None] * n
            continue
        if n is None:
            raise InstanceError(f"{head!r} before vars", lineno)
        if head == "dom":
            args = _ints(rest, lineno)
            if len(args) != 3:
                raise InstanceError("dom takes I MIN MAX", lineno)
            i = index(args[0], lineno)
            if args[1] > args[2]:
                raise InstanceError(f"empty domain for variable {args[0]}", lineno)
            domains[i] = (args[1], args[2])
        elif head == "neq":
            args = _ints(rest, lineno)
            if len(args) != 2:
                raise InstanceError("neq takes I J", lineno)
            constraints.append(NotEqual(index(args[0], lineno), index(args[1], lineno)))
        elif head == "alldiff":
            vs = [index(i, lineno) for i in _ints(rest, lineno)]
            if len(set(vs)) != len(vs):
                raise InstanceError("alldiff lists a variable twice", lineno)
            constraints.extend(NotEqual(a, b) for a, b in itertools.combinations(vs, 2))
        elif head == "ext":
            parts = " ".join(rest).split(";")
            header = _ints(parts[0].split(), lineno)
            if not header or header[0] != len(header) - 1:
                raise InstanceError("ext header must be K followed by K indices", lineno)
            scope = tuple(index(i, lineno) for i in header[1:])
            tuples = []
            for chunk in parts[1:]:
                vals = _ints(chunk.split(), lineno)
                if not vals and not chunk.strip():
                    continue
                if len(vals) != len(scope):
                    raise InstanceError(f"arity mismatch: tuple {vals} under scope of length {len(scope)}", lineno)
                tuples.append(tuple(vals))
            constraints.append(Extensional(scope, tuples))
        elif head == "unary":
            args = _ints(rest, lineno)
            if not args:
                raise InstanceError("unary takes I V1..VM", lineno)
            constraints.append(UnaryIn(index(args[0], lineno), args[1:]))
        elif head == "sym":
            img = _ints(rest, lineno)
            if len(img) != n:
                raise InstanceError(f"sym needs {n} images, got {len(img)}", lineno)
            if sorted(img) != list(range(1, n + 1)):
                raise InstanceError("sym is not a permutation of 1..N", lineno)
            symmetries.append(Permutation(i - 1 for i in img))
            sym_lines.append(lineno)
        elif head == "lex":
            if "<=" not in rest:
                raise InstanceError("lex needs '<='", lineno)
            cut = rest.index("<=")
            left = _ints(rest[:cut], lineno)
            right = _ints(rest[cut + 1:], lineno)
            if not left or left[0] != len(left) - 1 or len(right) != left[0]:
                raise InstanceError("lex must be K L1..LK <= R1..RK", lineno)
            lex.append(LexLeq([index(i, lineno) for i in left[1:]], [index(i, lineno) for i in right]))
        elif head == "order":
            seq = [index(i, lineno) for i in _ints(rest, lineno)]
            if sorted(seq) != list(range(n)):
                raise InstanceError("order must list every variable exactly once", lineno)
            order = seq
        else:
            raise InstanceError(f"unknown directive {head!r}", lineno)

    if n is None:
        raise InstanceError("missing vars directive")
    csp = Csp(n=n, domains=domains, constraints=constraints, symmetries=symmetries,
              lex_constraints=lex, order=order, name=name, symmetry_lines=sym_lines)
    if validate:
        problems = validate_csp(csp)
        if problems:
            raise InstanceError("; ".join(problems))
    return csp


def format_lex(c: LexLeq) -> str:
    left = " ".join(str(i + 1) for i in c.lhs)
    right = " ".join(str(i + 1) for i in c.rhs)
    return " ".join(p for p in (f"lex {c.k}", left, "<=", right) if p)


def format_instance(csp: Csp) -> str:
    lines = [f"csp {csp.name}", f"vars {csp.n}"]
    for i, (lo, hi) in enumerate(csp.domains):
        lines.append(f"dom {i + 1} {lo} {hi}")
    for c in csp.constraints:
        if isinstance(c, NotEqual):
            lines.append(f"neq {c.i + 1} {c.j + 1}")
        elif isinstance(c, Extensional):
            head = " ".join([f"ext {len(c.scope)}"] + [str(i + 1) for i in c.scope])
            rows = " ; ".join(" ".join(map(str, t)) for t in c.tuples)
            lines.append(f"{head} ; {rows}" if c.tuples else head)
        elif isinstance(c, UnaryIn):
            lines.append(" ".join([f"unary {c.var + 1}"] + [str(v) for v in sorted(c.values)]))
    for s in csp.symmetries:
        lines.append("sym " + " ".join(str(i + 1) for i in s.image))
    for c in csp.lex_constraints:
        lines.append(format_lex(c))
    if csp.order is not None:
        lines.append("order " + " ".join(str(i + 1) for i in csp.order))
    return "\n".join(lines) + "\n"
