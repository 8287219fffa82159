"""Closed 3-manifold groups by geometry: boundary descriptors and reference groups.

The reference groups (``Z^d``, free groups, Nil and Sol lattices, ``F_k x Z``)
follow the same small protocol as :class:`~gmboundary.fundgroup.GraphGroup`:
``identity``, ``mul``, ``inv``, ``norm``, ``generators``, ``cursor``,
``format`` and ``parse``.  So the walk engine can run on any of them.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from math import isqrt

from .errors import DomainError, MalformedWordError, ValidationError
from .freegroup import (
    BlockElement,
    SurfaceData,
    free_reduce,
    letter_power,
    word_inv,
    word_mul,
)


class GeometryTag(str, enum.Enum):
    S3 = "S3"
    E3 = "E3"
    S2xR = "S2xR"
    Nil = "Nil"
    Sol = "Sol"
    H2xR = "H2xR"
    SL2R = "SL2R~"
    H3 = "H3"
    NPC = "NPC"
    NonPrime = "NonPrime"
    GraphManifold = "GraphManifold"


@dataclass(frozen=True)
class BoundaryDescriptor:
    tag: GeometryTag
    triviality: str  # "trivial" | "nontrivial"
    description: str
    reduction_chain: tuple = ()
    computed_here: bool = False

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "triviality": self.triviality,
            "description": self.description,
            "reduction_chain": list(self.reduction_chain),
            "computed_here": self.computed_here,
        }


_T, _N = "trivial", "nontrivial"

_ATLAS = {
    GeometryTag.S3: BoundaryDescriptor(
        GeometryTag.S3, _T,
        "Finite fundamental group; the trivial group has trivial boundary and passing to a finite-index "
        "subgroup does not change it.",
        ("finite cover by S^3", "finite group -> trivial subgroup of finite index"),
    ),
    GeometryTag.E3: BoundaryDescriptor(
        GeometryTag.E3, _T,
        "Virtually abelian: finitely covered by the 3-torus. Abelian groups have trivial boundary.",
        ("finite cover by T^3", "virtually Z^3", "abelian -> trivial"),
        True,
    ),
    GeometryTag.S2xR: BoundaryDescriptor(
        GeometryTag.S2xR, _T,
        "Virtually abelian: finitely covered by S^2 x S^1, so virtually Z.",
        ("finite cover by S^2 x S^1", "virtually Z", "abelian -> trivial"),
        True,
    ),
    GeometryTag.Nil: BoundaryDescriptor(
        GeometryTag.Nil, _T,
        "Virtually nilpotent: finitely covered by a torus bundle with Dehn-twist power monodromy, "
        "pi_1 = <a,b,c | ab=ba, cac^-1=a, cbc^-1=ba^n>. Nilpotent groups have trivial boundary.",
        ("finite cover: torus bundle, Dehn twist power", "virtually nilpotent (class 2)", "nilpotent -> trivial"),
        True,
    ),
    GeometryTag.Sol: BoundaryDescriptor(
        GeometryTag.Sol, _N,
        "Finite index polycyclic Z^2 x| Z with hyperbolic monodromy, "
        "pi_1 = <a,b,c | ab=ba, cac^-1=a^k b^l, cbc^-1=a^m b^n>, kn-ml=1, |k+n|>2. "
        "The boundary of such polycyclic groups is known for measures with finite first moment.",
        ("finite cover of degree <= 2: Anosov torus bundle", "finite index polycyclic Z^2 x| Z"),
    ),
    GeometryTag.H2xR: BoundaryDescriptor(
        GeometryTag.H2xR, _N,
        "Finite index pi_1(F) x Z for a compact hyperbolic surface F; as a central extension its boundary "
        "is that of pi_1(F) under the pushed-forward measure.",
        ("finite cover F x S^1", "finite index pi_1(F) x Z", "central pushforward to pi_1(F)",
         "pi_1(F) hyperbolic"),
        True,
    ),
    GeometryTag.SL2R: BoundaryDescriptor(
        GeometryTag.SL2R, _N,
        "Finitely covered by the unit tangent bundle of a closed hyperbolic surface; pi_1 is a central "
        "Z-extension of pi_1(F), reduced to pi_1(F) by pushing the measure forward.",
        ("finite cover UF", "central Z-extension of pi_1(F)", "central pushforward to pi_1(F)",
         "pi_1(F) hyperbolic"),
    ),
    GeometryTag.H3: BoundaryDescriptor(
        GeometryTag.H3, _N,
        "Hyperbolic group and cocompact lattice in PSL2(C); boundary known for finite entropy and finite "
        "first logarithmic moment. Not computed here.",
        ("hyperbolic group",),
    ),
    GeometryTag.NPC: BoundaryDescriptor(
        GeometryTag.NPC, _N,
        "Cocompact isometry group of a Cartan-Hadamard manifold; boundary known from the literature. "
        "Not computed here.",
        ("universal cover is Cartan-Hadamard",),
    ),
    GeometryTag.NonPrime: BoundaryDescriptor(
        GeometryTag.NonPrime, _N,
        "Free product of nontrivial groups: either Z/2 * Z/2 (virtually abelian, trivial boundary) or a "
        "group with infinitely many ends, whose boundary is known. The generic case is listed.",
        ("free product of prime summands", "Z/2*Z/2 -> virtually abelian -> trivial",
         "otherwise infinitely many ends"),
    ),
    GeometryTag.GraphManifold: BoundaryDescriptor(
        GeometryTag.GraphManifold, _N,
        "Space of ends of the Bass-Serre covering tree of the JSJ graph of groups, with its unique "
        "stationary measure, for measures with finite entropy and finite first logarithmic moment.",
        ("finite cover with product blocks and no self-glued tori", "action on the Bass-Serre tree",
         "ends of Bass-Serre covering tree"),
        True,
    ),
}


def classify(tag) -> BoundaryDescriptor:
    return _ATLAS[GeometryTag(tag)]


# reference groups ---------------------------------------------------------------


class ValueCursor:
    """Walk position in a group without tree structure: plain right multiplication."""

    __slots__ = ("group", "value")

    def __init__(self, group, start=None):
        self.group = group
        self.value = group.identity() if start is None else start

    def rmul(self, x):
        self.value = self.group.mul(self.value, x)
        return self

    @property
    def depth(self) -> int:
        return self.group.norm(self.value)

    def prefix(self, d: int):
        pre = getattr(self.group, "prefix", None)
        return None if pre is None else pre(self.value, d)

    def element(self):
        return self.value


class _AtlasGroup:
    def cursor(self, start=None):
        return ValueCursor(self, start)

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self).__name__, self.params))

    def __repr__(self):
        return f"{type(self).__name__}{self.params}"


class AbelianGroup(_AtlasGroup):
    """``Z^d`` with the l1 word norm of the standard generators."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = d
        self.params = (d,)

    def identity(self):
        return (0,) * self.d

    def mul(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x):
        return tuple(-a for a in x)

    def norm(self, x) -> int:
        return sum(abs(a) for a in x)

    def generators(self):
        out = []
        for i in range(self.d):
            for s in (1, -1):
                e = [0] * self.d
                e[i] = s
                out.append(tuple(e))
        return out

    def format(self, x) -> str:
        return "(" + ",".join(map(str, x)) + ")"

    def parse(self, text: str):
        vals = tuple(int(v) for v in text.strip().strip("()").split(","))
        if len(vals) != self.d:
            raise MalformedWordError(f"expected {self.d} coordinates")
        return vals


class FreeGroup(_AtlasGroup):
    """Free group of rank ``k``; elements are reduced tuples of signed ints."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("rank must be >= 1")
        self.k = k
        self.params = (k,)

    def identity(self):
        return ()

    def mul(self, x, y):
        return word_mul(x, y)

    def inv(self, x):
        return word_inv(x)

    def norm(self, x) -> int:
        return len(x)

    def generators(self):
        return [g for i in range(1, self.k + 1) for g in ((i,), (-i,))]

    def prefix(self, x, d: int):
        """Vertex at depth ``d`` on the Cayley-tree geodesic from the identity to ``x``."""
        return x[:d] if len(x) >= d else None

    def format(self, x) -> str:
        if not x:
            return "1"
        return " ".join(f"x{abs(a)}" + ("" if a > 0 else "^-1") for a in x)

    def parse(self, text: str):
        letters = []
        for tok in text.split():
            if tok == "1":
                continue
            m = re.fullmatch(r"x(\d+)(?:\^(-?\d+))?", tok)
            if not m:
                raise MalformedWordError(f"bad token {tok!r}")
            letters += letter_power(int(m.group(1)), int(m.group(2) or 1))
        return free_reduce(letters, self.k)


class NilGroup(_AtlasGroup):
    """``<a,b,c | ab=ba, cac^-1=a, cbc^-1=ba^n>``; ``(i, j, k)`` means ``a^i b^j c^k``.

    Collection rule: ``c^k b^j' = b^j' a^(n k j') c^k``, ``a`` central.
    Norm ``|j| + |k| + isqrt(|i|)`` (homogeneous, comparable to word length).
    """

    def __init__(self, n: int = 1):
        if n < 1:
            raise ValueError("twist n must be >= 1")
        self.n = n
        self.params = (n,)

    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        return nil_mul(x, y, self.n)

    def inv(self, x):
        i, j, k = x
        # (a^i b^j c^k)^-1 = c^-k b^-j a^-i = a^(-i + n k j) b^-j c^-k
        return (-i + self.n * k * j, -j, -k)

    def norm(self, x) -> int:
        i, j, k = x
        return abs(j) + abs(k) + isqrt(abs(i))

    def generators(self):
        return [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]

    def format(self, x) -> str:
        return "a^{} b^{} c^{}".format(*x)

    def parse(self, text: str):
        m = re.fullmatch(r"\s*a\^(-?\d+)\s+b\^(-?\d+)\s+c\^(-?\d+)\s*", text)
        if not m:
            raise MalformedWordError(f"expected 'a^i b^j c^k', got {text!r}")
        return tuple(int(v) for v in m.groups())


def nil_mul(x, y, n: int):
    i, j, k = x
    i2, j2, k2 = y
    return (i + i2 + n * k * j2, j + j2, k + k2)


def check_sol_params(k: int, l: int, m: int, n: int):
    errs = []
    if k * n - m * l != 1:
        errs.append(f"kn - ml = {k * n - m * l}, expected 1")
    if abs(k + n) <= 2:
        errs.append(f"|k + n| = {abs(k + n)}, expected > 2")
    if errs:
        raise ValidationError("; ".join(errs))
    return (k, l, m, n)


class SolGroup(_AtlasGroup):
    """``<a,b,c | ab=ba, cac^-1=a^k b^l, cbc^-1=a^m b^n>``.

    ``(v1, v2, t)`` means ``a^v1 b^v2 c^t``.  Conjugation by ``c`` acts on
    exponent columns by ``A = [[k, m], [l, n]]``.
    Norm ``|t| + bitlength(|v1| + |v2|)`` (Sol distorts the fiber exponentially).
    """

    def __init__(self, k: int = 2, l: int = 1, m: int = 1, n: int = 1):
        self.params = check_sol_params(k, l, m, n)
        self.A = ((k, m), (l, n))
        # det = kn - ml = 1
        self.Ainv = ((n, -m), (-l, k))
        self._pow = {0: ((1, 0), (0, 1))}

    def matrix_power(self, t: int):
        if t not in self._pow:
            step = t - 1 if t > 0 else t + 1
            base = self.A if t > 0 else self.Ainv
            self._pow[t] = _matmul(base, self.matrix_power(step))
        return self._pow[t]

    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        p = self.matrix_power(x[2])
        return (
            x[0] + p[0][0] * y[0] + p[0][1] * y[1],
            x[1] + p[1][0] * y[0] + p[1][1] * y[1],
            x[2] + y[2],
        )

    def inv(self, x):
        p = self.matrix_power(-x[2])
        return (-(p[0][0] * x[0] + p[0][1] * x[1]), -(p[1][0] * x[0] + p[1][1] * x[1]), -x[2])

    def norm(self, x) -> int:
        return abs(x[2]) + (abs(x[0]) + abs(x[1])).bit_length()

    def generators(self):
        return [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]

    def format(self, x) -> str:
        return "a^{} b^{} c^{}".format(*x)

    def parse(self, text: str):
        return NilGroup.parse(self, text)


def sol_mul(x, y, params):
    return SolGroup(*params).mul(x, y)


def _matmul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


class BlockGroup(_AtlasGroup):
    """``pi_1(B) x Z`` for a surface ``B``: the product with a designated central factor."""

    def __init__(self, surface: SurfaceData):
        self.surface = surface
        self.params = (surface.genus, surface.boundary_count)

    def identity(self):
        return BlockElement((), 0, self.surface.rank)

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        return ~x

    def norm(self, x) -> int:
        return x.norm

    def generators(self):
        r = self.surface.rank
        out = []
        for i in range(1, r + 1):
            out += [BlockElement((i,), 0, r), BlockElement((-i,), 0, r)]
        return out + [BlockElement((), 1, r), BlockElement((), -1, r)]

    def quotient(self) -> FreeGroup:
        return FreeGroup(self.surface.rank)

    def project(self, x):
        return x.base

    def format(self, x) -> str:
        from .freegroup import format_block

        return format_block(self.surface, x)

    def parse(self, text: str):
        from .freegroup import parse_block

        return parse_block(self.surface, text)


def atlas_group(label: str):
    """Group named by ``z3``, ``z``, ``f2``, ``nil:n``, ``sol:k,l,m,n`` or ``block:g,b``."""
    name, _, arg = label.partition(":")
    try:
        if name == "z":
            return AbelianGroup(int(arg) if arg else 1)
        if re.fullmatch(r"z\d+", name):
            return AbelianGroup(int(name[1:]))
        if re.fullmatch(r"f\d+", name):
            return FreeGroup(int(name[1:]))
        if name == "nil":
            return NilGroup(int(arg) if arg else 1)
        if name == "sol":
            return SolGroup(*(int(v) for v in arg.split(","))) if arg else SolGroup()
        if name == "block":
            g, b = (int(v) for v in arg.split(","))
            return BlockGroup(SurfaceData(g, b))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad group name {label!r}: {exc}") from None
    raise ValidationError(f"unknown group {label!r}")


def central_pushforward(m):
    """Image of a measure on ``pi_1(B) x Z`` under the projection that forgets the fiber.

    Weights of elements that agree after dropping the fiber are summed.  A tail
    keeps its length law and pushes its generator list forward entry by entry.
    """
    from .measures import StepMeasure, Tail

    group = m.group
    if not isinstance(group, BlockGroup):
        raise DomainError("central pushforward needs a block group with a designated fiber")
    target = group.quotient()
    merged = {}
    for g, w in m.core:
        x = group.project(g)
        merged[x] = merged.get(x, 0) + w
    tail = None
    if m.tail is not None:
        tail = Tail(m.tail.mass, m.tail.q, tuple(group.project(s) for s in m.tail.generators))
    return StepMeasure(target, list(merged.items()), tail)
