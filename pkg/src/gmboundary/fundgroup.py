"""Normal forms in the fundamental group of a graph of groups.

An element is a closed decorated edge path at the base vertex::

    g0  t1  g1  t2 ... tn  gn

Each ``t`` is an edge traversal: ``+k`` crosses edge ``k`` left to right and
``-k`` crosses it backwards.  ``g_j`` is a :class:`BlockElement` of the vertex
the path sits at.  For an edge group element ``m``, the relation is
``src_image(m) * t == t * tgt_image(m)``.

The canonical form is Britton reduced, so no ``t h t^-1`` with ``h`` in the
edge image occurs.  Every ``g_j`` with ``j < n`` is also a canonical left
coset representative of the image of the next edge at its source: it has no
trailing power of that slot's ``c`` generator and zero fiber.  Canonical
forms are unique, so group equality is tuple equality.

Word norm: letters plus ``|fiber|`` over all syllables, plus one per
traversal.  Under gluings whose matrices are signed permutations, moving an
edge-group element across an edge does not change its norm.  Other gluings
can stretch it.
"""
from __future__ import annotations

import re
from collections import deque
from typing import Iterable, Optional, Sequence

from .errors import DomainError, MalformedWordError
from .freegroup import (
    BlockElement,
    block_element,
    block_identity,
    format_block,
    letter_power,
    parse_block,
    power_of_letter,
    strip_trailing,
    word_inv,
    word_mul,
)
from .graph import GraphOfGroups, check_graph, integer_inverse

_new_block = tuple.__new__


class GraphGroup:
    """The fundamental group of a validated graph of groups, based at ``graph.base``."""

    def __init__(self, graph: GraphOfGroups):
        self.graph = check_graph(graph)
        self.base = graph.base
        self.rank = {v: s.rank for v, s in graph.vertices.items()}
        self.src, self.tgt, self.src_letter, self.tgt_letter, self.transport = {}, {}, {}, {}, {}
        for k, e in enumerate(graph.edges, 1):
            lv, ls = e.left
            rv, rs = e.right
            lc = graph.vertices[lv].boundary_letter(ls)
            rc = graph.vertices[rv].boundary_letter(rs)
            a = e.matrix
            for t, sv, tv, sc, tc, mat in ((k, lv, rv, lc, rc, a), (-k, rv, lv, rc, lc, integer_inverse(a))):
                self.src[t], self.tgt[t] = sv, tv
                self.src_letter[t], self.tgt_letter[t] = sc, tc
                self.transport[t] = mat
        self.traversals_from = {v: [] for v in graph.vertices}
        for t in sorted(self.src, key=lambda t: (abs(t), -t)):
            self.traversals_from[self.src[t]].append(t)
        self._identity = GroupElement(self, (), (block_identity(self.rank[self.base]),))

    def __reduce__(self):
        return (GraphGroup, (self.graph,))

    def __eq__(self, other):
        return isinstance(other, GraphGroup) and self.graph == other.graph

    def __hash__(self):
        return hash(self.graph)

    def __repr__(self):
        return f"GraphGroup({len(self.graph.vertices)} vertices, {len(self.graph.edges)} edges)"

    # group protocol used by the walk engine
    def identity(self) -> "GroupElement":
        return self._identity

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        return ~x

    def norm(self, x) -> int:
        return x.norm

    def cursor(self, start=None) -> "PathBuilder":
        b = PathBuilder(self)
        if start is not None:
            b.rmul(start)
        return b

    # construction helpers
    def syllable(self, vertex=None, letters: Iterable = (), fiber: int = 0) -> BlockElement:
        vertex = self.base if vertex is None else vertex
        return block_element(self.graph.vertices[vertex], letters, fiber)

    def vertex_element(self, letters: Iterable = (), fiber: int = 0) -> "GroupElement":
        """Element of the base vertex group."""
        return GroupElement(self, (), (self.syllable(self.base, letters, fiber),))

    def from_path(self, raw: Sequence, start=None) -> "GroupElement":
        return normalize(self, raw, start)

    def tree_path(self, v) -> list:
        """Traversals of a fixed spanning-tree path from the base to ``v``."""
        return self._spanning_paths()[v]

    def _spanning_paths(self):
        paths = getattr(self, "_paths", None)
        if paths is None:
            paths = {self.base: []}
            todo = deque([self.base])
            while todo:
                v = todo.popleft()
                for t in self.traversals_from[v]:
                    w = self.tgt[t]
                    if w not in paths:
                        paths[w] = paths[v] + [t]
                        todo.append(w)
            self._paths = paths
        return paths

    def conjugate_into(self, v, g: BlockElement) -> "GroupElement":
        """``P g P^-1`` for the spanning-tree path ``P`` from the base to ``v``."""
        path = self.tree_path(v)
        raw = [block_identity(self.rank[self.base])]
        for t in path:
            raw += [t, block_identity(self.rank[self.tgt[t]])]
        raw[-1] = g
        for t in reversed(path):
            raw += [-t, block_identity(self.rank[self.src[t]])]
        return normalize(self, raw)

    def generators(self) -> list:
        """A symmetric generating set.

        It contains the generators and fiber of every vertex group, conjugated
        to the base along spanning-tree paths, plus one loop per non-tree edge.
        Duplicates and the identity are dropped.  The order is deterministic.
        """
        paths = self._spanning_paths()
        tree_edges = {abs(t) for p in paths.values() for t in p}
        out = []
        for v in self.graph.vertices:
            r = self.rank[v]
            gens = [BlockElement((i,), 0, r) for i in range(1, r + 1)] + [BlockElement((), 1, r)]
            out += [self.conjugate_into(v, g) for g in gens]
        for k in range(1, len(self.graph.edges) + 1):
            if k in tree_edges:
                continue
            raw = [block_identity(self.rank[self.base])]
            for t in paths[self.src[k]]:
                raw += [t, block_identity(self.rank[self.tgt[t]])]
            raw += [k, block_identity(self.rank[self.tgt[k]])]
            for t in reversed(paths[self.tgt[k]]):
                raw += [-t, block_identity(self.rank[self.src[t]])]
            out.append(normalize(self, raw))
        seen, result = set(), []
        for g in out:
            for h in (g, ~g):
                if not h.is_identity and h not in seen:
                    seen.add(h)
                    result.append(h)
        return result

    def parse(self, text: str) -> "GroupElement":
        return parse_element(self, text)

    def format(self, x) -> str:
        return format_element(x)


class PathBuilder:
    """Mutable canonical path, extended by right multiplication.

    The contents stay canonical after every call.  Only the end of the path
    changes, so appending a short element costs ``O(len(element))`` amortized.
    """

    __slots__ = ("group", "edges", "syls", "start")

    def __init__(self, group: GraphGroup, start=None, edges=None, syls=None):
        self.group = group
        self.start = group.base if start is None else start
        self.edges = list(edges) if edges is not None else []
        if syls is not None:
            self.syls = list(syls)
        else:
            self.syls = [block_identity(group.rank[self.start])]

    @property
    def end(self):
        return self.group.tgt[self.edges[-1]] if self.edges else self.start

    def mul_last(self, g: BlockElement):
        last = self.syls[-1]
        if last[2] != g[2]:
            raise DomainError("syllable does not belong to the current vertex group")
        self.syls[-1] = _new_block(BlockElement, (word_mul(last[0], g[0]), last[1] + g[1], last[2]))

    def append_edge(self, t: int):
        grp = self.group
        try:
            sv = grp.src[t]
        except KeyError:
            raise DomainError(f"unknown edge traversal {t}") from None
        if sv != self.end:
            raise DomainError(f"traversal {t} starts at {sv!r}, path is at {self.end!r}")
        edges, syls = self.edges, self.syls
        last = syls[-1]
        letter = grp.src_letter[t]
        if edges and edges[-1] == -t:
            a = power_of_letter(last[0], letter)
            if a is not None:
                # pinch: e h e^-1 with h in the edge image
                edges.pop()
                syls.pop()
                p, q = _apply(grp.transport[t], (a, last[1]))
                prev = syls[-1]
                tl = grp.tgt_letter[t]
                syls[-1] = _new_block(
                    BlockElement, (word_mul(prev[0], letter_power(tl, p)), prev[1] + q, prev[2])
                )
                return
        r, a = strip_trailing(last[0], letter)
        p, q = _apply(grp.transport[t], (a, last[1]))
        syls[-1] = _new_block(BlockElement, (r, 0, last[2]))
        edges.append(t)
        syls.append(_new_block(BlockElement, (letter_power(grp.tgt_letter[t], p), q, grp.rank[grp.tgt[t]])))

    def rmul(self, x: "GroupElement"):
        """Right-multiply in place by a closed element at the current end vertex."""
        xs = x.syls
        self.mul_last(xs[0])
        for t, g in zip(x.edges, xs[1:]):
            self.append_edge(t)
            self.mul_last(g)
        return self

    def extend_raw(self, raw: Sequence):
        """Append a raw path ``g0, t1, g1, ...`` (first item a syllable)."""
        if not raw:
            return self
        if len(raw) % 2 == 0:
            raise DomainError("raw path must alternate syllable, edge, ..., syllable")
        self.mul_last(raw[0])
        for i in range(1, len(raw), 2):
            self.append_edge(raw[i])
            self.mul_last(raw[i + 1])
        return self

    # views
    @property
    def depth(self) -> int:
        return len(self.edges)

    def prefix(self, d: int):
        """Key of the depth-``d`` vertex on the geodesic from ``o``, or None if shallower."""
        if len(self.edges) < d:
            return None
        return (tuple(self.edges[:d]), tuple(self.syls[:d]))

    def element(self) -> "GroupElement":
        if self.start != self.group.base or self.end != self.group.base:
            raise DomainError("path is not closed at the base vertex")
        return GroupElement(self.group, tuple(self.edges), tuple(self.syls))

    def copy(self) -> "PathBuilder":
        return PathBuilder(self.group, self.start, self.edges, self.syls)


def _apply(a, m):
    return (a[0][0] * m[0] + a[0][1] * m[1], a[1][0] * m[0] + a[1][1] * m[1])


class GroupElement:
    """Canonical form of an element of the fundamental group; immutable."""

    __slots__ = ("group", "edges", "syls", "_hash")

    def __init__(self, group: GraphGroup, edges: tuple, syls: tuple):
        self.group = group
        self.edges = edges
        self.syls = syls
        self._hash = None

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.edges == other.edges and self.syls == other.syls and (
            self.group is other.group or self.group == other.group
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.edges, self.syls))
        return self._hash

    def __reduce__(self):
        return (GroupElement, (self.group, self.edges, self.syls))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return gog_mul(self, other)

    def __invert__(self) -> "GroupElement":
        return gog_inv(self)

    def __pow__(self, k: int) -> "GroupElement":
        x = self if k >= 0 else ~self
        b = PathBuilder(self.group)
        for _ in range(abs(k)):
            b.rmul(x)
        return b.element()

    def __repr__(self):
        return f"<{format_element(self)}>"

    def __str__(self):
        return format_element(self)

    @property
    def is_identity(self) -> bool:
        return not self.edges and not self.syls[0][0] and not self.syls[0][1]

    @property
    def norm(self) -> int:
        return word_length(self)


def _same_group(x, y):
    if x.group is not y.group and x.group != y.group:
        raise DomainError("elements belong to different graphs of groups")


def normalize(group: GraphGroup, raw: Sequence, start=None) -> GroupElement:
    """Canonical form of a raw decorated path ``[g0, t1, g1, ..., tn, gn]``.

    Syllables may be :class:`BlockElement` values or token strings.  When
    ``start`` is None the path must be closed at the base and a
    :class:`GroupElement` is returned.  Otherwise a :class:`PathBuilder`
    holding the canonical open path is returned.
    """
    start_v = group.base if start is None else start
    b = PathBuilder(group, start_v)
    items = list(raw)
    if not items:
        items = [block_identity(group.rank[start_v])]
    if len(items) % 2 == 0:
        raise DomainError("raw path must alternate syllable, edge, ..., syllable")
    v = start_v
    for i in range(0, len(items), 2):
        if i:
            t = items[i - 1]
            if t not in group.src:
                raise DomainError(f"unknown edge traversal {t!r}")
            if group.src[t] != v:
                raise DomainError(f"edge sequence is not a path: {t} does not start at {v!r}")
            v = group.tgt[t]
            b.append_edge(t)
        g = items[i]
        if isinstance(g, str):
            g = parse_block(group.graph.vertices[v], g)
        b.mul_last(g)
    if start is None:
        if v != group.base:
            raise DomainError(f"path ends at {v!r}, not at the base {group.base!r}")
        return b.element()
    return b


def gog_mul(x: GroupElement, y: GroupElement) -> GroupElement:
    _same_group(x, y)
    if y.is_identity:
        return x
    if x.is_identity:
        return y
    b = PathBuilder(x.group, None, x.edges, x.syls)
    b.rmul(y)
    return b.element()


def gog_inv(x: GroupElement) -> GroupElement:
    if not x.edges:
        g = x.syls[0]
        return GroupElement(x.group, (), (_new_block(BlockElement, (word_inv(g[0]), -g[1], g[2])),))
    raw = []
    for i in range(len(x.edges), -1, -1):
        g = x.syls[i]
        raw.append(_new_block(BlockElement, (word_inv(g[0]), -g[1], g[2])))
        if i:
            raw.append(-x.edges[i - 1])
    return normalize(x.group, raw)


def word_length(x: GroupElement) -> int:
    return sum(len(g[0]) + abs(g[1]) for g in x.syls) + len(x.edges)


# token grammar ----------------------------------------------------------------

_EDGE_RE = re.compile(r"^e(\d+)(?:\^(-?1))?$")


def format_edge(t: int) -> str:
    return f"e{t}" if t > 0 else f"e{-t}^-1"


def format_path(group: GraphGroup, edges: Sequence, syls: Sequence, start=None) -> str:
    v = group.base if start is None else start
    parts = [format_block(group.graph.vertices[v], syls[0])]
    for j, t in enumerate(edges):
        v = group.tgt[t]
        parts.append(format_edge(t))
        if j + 1 < len(syls):
            parts.append(format_block(group.graph.vertices[v], syls[j + 1]))
    return " | ".join(parts)


def format_element(x: GroupElement) -> str:
    """Print as ``c2 z^2 | e1 | c2^-1 | e1^-1 | 1``."""
    return format_path(x.group, x.edges, x.syls)


def parse_edge(tok: str) -> int:
    m = _EDGE_RE.match(tok.strip())
    if not m:
        raise MalformedWordError(f"bad edge token {tok!r}")
    k = int(m.group(1))
    return -k if m.group(2) == "-1" else k


def parse_raw(group: GraphGroup, text: str, start=None) -> list:
    fields = [f.strip() for f in text.split("|")]
    if len(fields) % 2 == 0:
        raise MalformedWordError("token string must alternate syllable | edge | ... | syllable")
    v = group.base if start is None else start
    raw = []
    for i, f in enumerate(fields):
        if i % 2:
            t = parse_edge(f)
            if t not in group.src:
                raise DomainError(f"unknown edge traversal {f!r}")
            if group.src[t] != v:
                raise DomainError(f"edge sequence is not a path: {f} does not start at {v!r}")
            v = group.tgt[t]
            raw.append(t)
        else:
            raw.append(parse_block(group.graph.vertices[v], f))
    return raw


def parse_element(group: GraphGroup, text: str) -> GroupElement:
    """Parse the token grammar and return the canonical form."""
    return normalize(group, parse_raw(group, text))
