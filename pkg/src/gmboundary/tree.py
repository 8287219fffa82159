"""Bass-Serre tree geometry.

A tree vertex is the coset ``x G_v``.  It is named by the canonical path of
``x`` with its final syllable dropped: ``g0 t1 g1 ... tn``.  The base vertex
``o`` is the empty path.  Canonical paths read left to right follow the
geodesic from ``o``.  Two vertices therefore share exactly the geodesic
segment given by their longest common canonical prefix.

Ends are named by finite prefixes.  The cylinder of a prefix ``p`` is the set
of ends whose ray from ``o`` passes through ``p``.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .errors import DomainError
from .freegroup import BlockElement, block_identity, iter_reduced_words
from .fundgroup import GraphGroup, GroupElement, PathBuilder, format_path, parse_raw


class TreeVertex:
    __slots__ = ("group", "edges", "syls", "_hash")

    def __init__(self, group: GraphGroup, edges: tuple = (), syls: tuple = ()):
        if len(edges) != len(syls):
            raise DomainError("a tree vertex needs one syllable per edge")
        self.group = group
        self.edges = tuple(edges)
        self.syls = tuple(syls)
        self._hash = None

    @property
    def depth(self) -> int:
        return len(self.edges)

    @property
    def label(self):
        """The vertex of the underlying graph this coset belongs to."""
        return self.group.tgt[self.edges[-1]] if self.edges else self.group.base

    def __eq__(self, other):
        if not isinstance(other, TreeVertex):
            return NotImplemented
        return self.edges == other.edges and self.syls == other.syls and (
            self.group is other.group or self.group == other.group
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.edges, self.syls))
        return self._hash

    def __reduce__(self):
        return (type(self), (self.group, self.edges, self.syls))

    def __str__(self):
        if not self.edges:
            return "o"
        return format_path(self.group, self.edges, self.syls)

    def __repr__(self):
        return f"{type(self).__name__}({self})"

    def truncate(self, d: int) -> "TreeVertex":
        return TreeVertex(self.group, self.edges[:d], self.syls[:d])

    def as_path(self) -> PathBuilder:
        """Open path from the base to this vertex with an identity last syllable."""
        return PathBuilder(
            self.group, None, self.edges, self.syls + (block_identity(self.group.rank[self.label]),)
        )

    def coset_representative(self) -> GroupElement:
        """An element ``x`` with ``x o = self``, if the label is the base vertex."""
        return self.as_path().element()


class EndPrefix(TreeVertex):
    """Depth ``>= 1`` initial segment of a geodesic ray from ``o``."""

    __slots__ = ()

    def __init__(self, group, edges=(), syls=()):
        super().__init__(group, edges, syls)
        if not self.edges:
            raise DomainError("an end prefix has depth >= 1")


def base_vertex(group: GraphGroup) -> TreeVertex:
    return TreeVertex(group)


def vertex_of(x: GroupElement) -> TreeVertex:
    """The vertex ``x o``."""
    return TreeVertex(x.group, x.edges, x.syls[:-1])


def end_prefix(v: TreeVertex, d: Optional[int] = None) -> EndPrefix:
    if d is not None:
        if d > v.depth:
            raise DomainError(f"vertex has depth {v.depth} < {d}")
        v = v.truncate(d)
    return EndPrefix(v.group, v.edges, v.syls)


def parse_vertex(group: GraphGroup, text: str) -> TreeVertex:
    """Parse ``g0 | t1 | ... | tn`` (or ``o``) into a canonical vertex."""
    text = text.strip()
    if text in ("o", ""):
        return TreeVertex(group)
    raw = parse_raw(group, text + " | 1")
    b = PathBuilder(group)
    b.extend_raw(raw)
    return TreeVertex(group, tuple(b.edges), tuple(b.syls[:-1]))


def _check(u, v):
    if u.group is not v.group and u.group != v.group:
        raise DomainError("vertices belong to different graphs of groups")


def act_vertex(x: GroupElement, v: TreeVertex) -> TreeVertex:
    """Left action ``x . v``."""
    _check(x, v)
    b = PathBuilder(x.group, None, x.edges, x.syls)
    for t, g in zip(v.edges, v.syls):
        b.mul_last(g)
        b.append_edge(t)
    return TreeVertex(x.group, tuple(b.edges), tuple(b.syls[:-1]))


def common_depth(u: TreeVertex, v: TreeVertex) -> int:
    """Depth of the last common vertex on the geodesics from ``o`` to ``u`` and ``v``."""
    k = 0
    n = min(u.depth, v.depth)
    while k < n and u.edges[k] == v.edges[k] and u.syls[k] == v.syls[k]:
        k += 1
    return k


def tree_distance(u: TreeVertex, v: TreeVertex) -> int:
    _check(u, v)
    return u.depth + v.depth - 2 * common_depth(u, v)


def path_distance(u: TreeVertex, v: TreeVertex) -> int:
    """Tree distance computed as the edge count of the reduced path ``u^-1 v``.

    This is an independent route to :func:`tree_distance`.
    """
    _check(u, v)
    grp = u.group
    raw = []
    ident = lambda vert: block_identity(grp.rank[vert])
    raw.append(ident(u.label))
    for j in range(u.depth - 1, -1, -1):
        raw.append(-u.edges[j])
        g = u.syls[j]
        raw.append(BlockElement(tuple(-x for x in reversed(g.base)), -g.fiber, g.rank))
    b = PathBuilder(grp, u.label)
    b.extend_raw(raw)
    for t, g in zip(v.edges, v.syls):
        b.mul_last(g)
        b.append_edge(t)
    return len(b.edges)


def geodesic(u: TreeVertex, v: TreeVertex) -> list:
    """Vertices of the unique geodesic from ``u`` to ``v``, endpoints included."""
    _check(u, v)
    k = common_depth(u, v)
    up = [u.truncate(d) for d in range(u.depth, k - 1, -1)]
    down = [v.truncate(d) for d in range(k + 1, v.depth + 1)]
    return up + down


def confluence_depth(x: GroupElement, p: TreeVertex) -> int:
    """Length of the common initial segment of ``[o, x o]`` and the prefix ``p``."""
    return common_depth(vertex_of(x), p)


def cylinder_contains(p: TreeVertex, q: TreeVertex) -> bool:
    """Whether ``q`` (a prefix or vertex) lies in the cylinder of ``p``."""
    _check(p, q)
    return q.depth >= p.depth and q.edges[: p.depth] == p.edges and q.syls[: p.depth] == p.syls


def coset_representatives(group: GraphGroup, vertex, letter: int, bound: int) -> Iterable[BlockElement]:
    """Canonical left coset representatives of ``<c> x Z`` in ``G_vertex`` with norm ``<= bound``."""
    r = group.rank[vertex]
    for w in iter_reduced_words(r, bound):
        if w and abs(w[-1]) == letter:
            continue
        yield BlockElement(w, 0, r)


def enumerate_neighbors(v: TreeVertex, norm_bound: int) -> list:
    """Neighbours of ``v`` reached through coset representatives of norm ``<= norm_bound``.

    The parent, if there is one, always comes first.
    """
    if norm_bound < 0:
        raise ValueError("norm_bound must be >= 0")
    grp = v.group
    out = []
    last = v.edges[-1] if v.edges else None
    if last is not None:
        out.append(v.truncate(v.depth - 1))
    for t in grp.traversals_from[v.label]:
        for h in coset_representatives(grp, v.label, grp.src_letter[t], norm_bound):
            if t == -(last or 0) and not h.base:
                continue
            out.append(TreeVertex(grp, v.edges + (t,), v.syls + (h,)))
    return out


def in_hull(x: TreeVertex, points: list) -> bool:
    """Whether ``x`` lies in the convex hull of the finite vertex set ``points``."""
    if x in points:
        return True
    dist = {p: tree_distance(x, p) for p in points}
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            if dist[a] + dist[b] == tree_distance(a, b):
                return True
    return False


def median(a: TreeVertex, b: TreeVertex, c: TreeVertex) -> TreeVertex:
    """The unique vertex on all three pairwise geodesics."""
    ab = set(geodesic(a, b))
    bc = set(geodesic(b, c))
    ca = set(geodesic(c, a))
    common = ab & bc & ca
    if len(common) != 1:
        raise AssertionError(f"median not unique: {len(common)} candidates")
    return next(iter(common))
