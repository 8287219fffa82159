"""Exact checks of stabilizer and orbit properties on finite balls.

Everything here works on the ball of syllable norm ``<= r``.  A violation
found on a ball is conclusive.  A confirmation only holds up to that radius.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ResourceError
from .freegroup import BlockElement, is_peripheral, iter_reduced_words
from .fundgroup import GraphGroup, GroupElement, PathBuilder, normalize
from .tree import (
    TreeVertex,
    act_vertex,
    base_vertex,
    enumerate_neighbors,
    in_hull,
    tree_distance,
)

DEFAULT_LIMIT = 2_000_000


def fixes_vertex(g: GroupElement, u: TreeVertex) -> bool:
    return act_vertex(g, u) == u


def _block_ball(rank: int, budget: int):
    for w in iter_reduced_words(rank, budget):
        rest = budget - len(w)
        yield BlockElement(w, 0, rank)
        for f in range(1, rest + 1):
            yield BlockElement(w, f, rank)
            yield BlockElement(w, -f, rank)


def _graph_distances(group: GraphGroup) -> dict:
    dist = {group.base: 0}
    todo = deque([group.base])
    while todo:
        v = todo.popleft()
        for t in group.traversals_from[v]:
            w = group.tgt[t]
            if w not in dist:
                dist[w] = dist[v] + 1
                todo.append(w)
    return dist


def iter_ball(group: GraphGroup, r: int):
    """Yield every canonical form of norm ``<= r`` exactly once, by increasing edge count."""
    dist = _graph_distances(group)

    def rec(v, budget, edges, syls, prev):
        if v == group.base:
            for g in _block_ball(group.rank[v], budget):
                yield GroupElement(group, edges, syls + (g,))
        if budget < 1:
            return
        for t in group.traversals_from[v]:
            w = group.tgt[t]
            room = budget - 1 - dist[w]
            if room < 0:
                continue
            letter = group.src_letter[t]
            for word in iter_reduced_words(group.rank[v], room):
                if word and abs(word[-1]) == letter:
                    continue
                if prev == -t and not word:
                    continue
                h = BlockElement(word, 0, group.rank[v])
                yield from rec(w, budget - 1 - len(word), edges + (t,), syls + (h,), t)

    yield from rec(group.base, r, (), (), None)


def ball_enumerate(group: GraphGroup, r: int, limit: int = DEFAULT_LIMIT) -> list:
    """All distinct elements of norm ``<= r``, sorted by (norm, printed form)."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    out = []
    for x in iter_ball(group, r):
        out.append(x)
        if len(out) > limit:
            raise ResourceError(f"ball of radius {r} exceeds {limit} elements", len(out))
    out.sort(key=lambda x: (x.norm, len(x.edges), str(x)))
    return out


def ball_by_products(group: GraphGroup, r: int) -> set:
    """Independent ball oracle.

    Builds every raw path of raw norm ``<= r`` with arbitrary syllables,
    normalizes it, and keeps the results of canonical norm ``<= r``.
    """
    dist = _graph_distances(group)
    out = set()

    def rec(v, budget, raw):
        for g in _block_ball(group.rank[v], budget):
            cur = raw + [g]
            rest = budget - g.norm
            if v == group.base:
                x = normalize(group, cur)
                if x.norm <= r:
                    out.add(x)
            for t in group.traversals_from[v]:
                w = group.tgt[t]
                if rest - 1 >= dist[w]:
                    rec(w, rest - 1, cur + [t])

    rec(group.base, r, [])
    return out


@dataclass
class StabReport:
    pair: tuple
    distance: int
    radius: int
    elements: list = field(default_factory=list)
    structure: str = "trivial"
    generator: Optional[GroupElement] = None

    def to_dict(self) -> dict:
        return {
            "pair": [str(v) for v in self.pair],
            "distance": self.distance,
            "radius": self.radius,
            "elements_found": len(self.elements),
            "elements": [str(x) for x in self.elements],
            "structure": self.structure,
            "generator": None if self.generator is None else str(self.generator),
        }


def _powers(g: GroupElement, kmax: int) -> dict:
    out = {}
    pos = neg = g.group.identity()
    ginv = ~g
    for k in range(1, kmax + 1):
        pos = pos * g
        neg = neg * ginv
        out[pos] = k
        out[neg] = -k
    return out


def classify_subgroup_sample(elements: list, kmax: Optional[int] = None):
    """Classify a finite sample of a subgroup: trivial, cyclic(generator) or other."""
    nontrivial = [x for x in elements if not x.is_identity]
    if not nontrivial:
        return "trivial", None
    nontrivial.sort(key=lambda x: (x.norm, str(x)))
    g = nontrivial[0]
    kmax = kmax or (max(x.norm for x in nontrivial) + 1)
    pw = _powers(g, kmax)
    if all(x in pw for x in nontrivial):
        return "cyclic", g
    return "other", None


def stab_intersection_check(u: TreeVertex, v: TreeVertex, r: int, ball: Optional[list] = None) -> StabReport:
    """Elements of ``Stab(u) & Stab(v)`` in the ball of radius ``r``, and their structure."""
    if r < 1:
        raise ValueError("radius must be >= 1")
    ball = ball if ball is not None else ball_enumerate(u.group, r)
    found = [g for g in ball if g.norm <= r and fixes_vertex(g, u) and fixes_vertex(g, v)]
    structure, gen = classify_subgroup_sample(found)
    return StabReport((u, v), tree_distance(u, v), r, found, structure, gen)


def fiber_conjugate(w: TreeVertex) -> GroupElement:
    """``h z_w h^-1``, the fiber of the block at tree vertex ``w = h o_w``."""
    return vertex_conjugate(w, BlockElement((), 1, w.group.rank[w.label]))


def is_fiber_generator(g: GroupElement, middle: TreeVertex) -> bool:
    z = fiber_conjugate(middle)
    return g == z or g == ~z


def vertex_conjugate(u: TreeVertex, g: BlockElement) -> GroupElement:
    """``h g h^-1`` for the coset representative path ``h`` of ``u``."""
    b = u.as_path()
    b.mul_last(g)
    for j in range(u.depth - 1, -1, -1):
        s = u.syls[j]
        b.append_edge(-u.edges[j])
        b.mul_last(BlockElement(tuple(-x for x in reversed(s.base)), -s.fiber, s.rank))
    return b.element()


def local_word(g: GroupElement, u: TreeVertex) -> Optional[BlockElement]:
    """For ``g`` fixing ``u``, the vertex-group element ``h^-1 g h``; None if ``g`` moves ``u``."""
    b = PathBuilder(u.group, u.label)
    for j in range(u.depth - 1, -1, -1):
        s = u.syls[j]
        b.append_edge(-u.edges[j])
        b.mul_last(BlockElement(tuple(-x for x in reversed(s.base)), -s.fiber, s.rank))
    b.rmul(g)
    for t, s in zip(u.edges, u.syls):
        b.mul_last(s)
        b.append_edge(t)
    if b.edges:
        return None
    return b.syls[0]


def moves_all_neighbors(g: GroupElement, u: TreeVertex, witness_bound: int) -> bool:
    return all(act_vertex(g, n) != n for n in enumerate_neighbors(u, witness_bound))


def sole_fixer_search(u: TreeVertex, r: int, witness_bound: int = 6, ball: Optional[list] = None):
    """An element of ``Stab(u)`` moving every enumerated neighbour of ``u``, or None.

    Candidates whose local word is non-peripheral in the block's base surface
    are tried first, then the rest of ``Stab(u)`` in the ball.
    """
    if r < 2:
        raise ValueError("radius must be >= 2")
    grp = u.group
    surface = grp.graph.vertices[u.label]
    ball = ball if ball is not None else ball_enumerate(grp, r)
    first, rest = [], []
    for g in ball:
        if g.is_identity or g.norm > r:
            continue
        loc = local_word(g, u)
        if loc is None:
            continue
        (rest if is_peripheral(surface, loc.base) else first).append(g)
    for g in first + rest:
        if moves_all_neighbors(g, u, witness_bound):
            return g
    return None


def orbit_probe(candidate: Iterable[TreeVertex], r: int, ball: Optional[list] = None):
    """An element ``g`` with ``g . c`` outside the convex hull of ``candidate`` for some ``c``.

    Returns None only when the ball of radius ``r`` is exhausted.
    """
    pts = list(dict.fromkeys(candidate))
    if not pts:
        raise ValueError("candidate set must be nonempty")
    grp = pts[0].group
    ball = ball if ball is not None else ball_enumerate(grp, r)
    for g in ball:
        if g.norm > r or g.is_identity:
            continue
        for c in pts:
            if not in_hull(act_vertex(g, c), pts):
                return g
    return None


def standard_pair(group: GraphGroup, distance: int) -> tuple:
    """A pair of tree vertices at the given distance, for CLI and smoke checks.

    Distance 2 gives ``(h1 t o', h2 t o')`` through ``o``, with ``h2`` a
    generator outside the edge slot.  Larger distances give ``o`` and a
    vertex reached by alternating edges with non-peripheral syllables.
    """
    base = base_vertex(group)
    t = group.traversals_from[group.base][0]
    letter = group.src_letter[t]
    other = next(i for i in range(1, group.rank[group.base] + 1) if i != letter)
    if distance == 2:
        u = TreeVertex(group, (t,), (BlockElement((), 0, group.rank[group.base]),))
        v = TreeVertex(group, (t,), (BlockElement((other,), 0, group.rank[group.base]),))
        return u, v
    if distance < 1:
        return base, base
    b = PathBuilder(group)
    v, prev = group.base, None
    for step in range(distance):
        choices = group.traversals_from[v]
        t = choices[0]
        if prev is not None and t == -prev and len(choices) > 1:
            t = choices[1]
        r = group.rank[v]
        if step:
            b.mul_last(BlockElement((next(i for i in range(1, r + 1) if i != group.src_letter[t]),), 0, r))
        b.append_edge(t)
        prev, v = t, group.tgt[t]
    w = TreeVertex(group, tuple(b.edges), tuple(b.syls[:-1]))
    assert w.depth == distance
    return base, w
