"""Graph-manifold data: blocks glued along tori by ``GL_2(Z)`` matrices.

Each edge glues boundary slot ``i`` of its left vertex to slot ``i'`` of its
right vertex.  The edge group is ``Z^2``.  On the left, ``(m1, m2)`` maps to
``(c_i^m1, z^m2)``.  On the right it maps to ``(c_i'^p, z^q)`` with
``(p, q) = A (m1, m2)``.  Matrices are written ``[[p, r], [q, s]]``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .freegroup import BlockElement, SurfaceData, letter_power, power_of_letter

LEFT, RIGHT = "left", "right"


def _det(a) -> int:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


def _apply(a, m):
    return (a[0][0] * m[0] + a[0][1] * m[1], a[1][0] * m[0] + a[1][1] * m[1])


def integer_inverse(a):
    d = _det(a)
    if d not in (1, -1):
        raise ValidationError(f"matrix {a} is not in GL2(Z)")
    (p, r), (q, s) = a
    return ((d * s, -d * r), (-d * q, d * p))


@dataclass(frozen=True)
class EdgeGluing:
    left: tuple  # (vertex id, boundary index)
    right: tuple
    matrix: tuple  # ((p, r), (q, s))

    @property
    def det(self) -> int:
        return _det(self.matrix)


@dataclass(frozen=True)
class Issue:
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"code": v.code, "message": v.message} for v in self.violations],
            "warnings": [{"code": w.code, "message": w.message} for w in self.warnings],
        }


@dataclass(frozen=True, eq=False)
class GraphOfGroups:
    vertices: dict  # vertex id -> SurfaceData
    edges: tuple  # EdgeGluing, edge k is edges[k-1]
    base: str

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))

    def __reduce__(self):
        return (GraphOfGroups, (dict(self.vertices), self.edges, self.base))

    def surface(self, v) -> SurfaceData:
        return self.vertices[v]

    def edge(self, k: int) -> EdgeGluing:
        return self.edges[k - 1]

    def fingerprint(self) -> tuple:
        return (
            tuple(sorted((str(k), v.genus, v.boundary_count) for k, v in self.vertices.items())),
            self.edges,
            self.base,
        )

    def __eq__(self, other):
        return isinstance(other, GraphOfGroups) and self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())


def validate_graph(g: GraphOfGroups) -> ValidationReport:
    """Check every structural invariant and list all violations found."""
    rep = ValidationReport()
    bad = rep.violations.append
    for vid, s in g.vertices.items():
        if s.euler_characteristic >= 0:
            bad(Issue("euler characteristic", f"vertex {vid}: chi = {s.euler_characteristic} >= 0"))
    if g.base not in g.vertices:
        bad(Issue("unknown base", f"base vertex {g.base!r} is not a vertex"))
    if not g.edges:
        bad(Issue("no edges", "graph has no edges"))
    used = {}
    for k, e in enumerate(g.edges, 1):
        ends_ok = True
        for side, (vid, slot) in ((LEFT, e.left), (RIGHT, e.right)):
            if vid not in g.vertices:
                bad(Issue("unknown vertex", f"edge e{k} {side} end: vertex {vid!r} missing"))
                ends_ok = False
                continue
            b = g.vertices[vid].boundary_count
            if not 1 <= slot < b:
                bad(Issue("slot out of range",
                          f"edge e{k} {side} end: slot {slot} not in 1..{b - 1} at vertex {vid!r}"))
            if (vid, slot) in used:
                bad(Issue("slot reused", f"slot ({vid!r}, {slot}) used by e{used[(vid, slot)]} and e{k}"))
            else:
                used[(vid, slot)] = k
        if ends_ok and e.left[0] == e.right[0]:
            bad(Issue("loop edge", f"edge e{k} joins vertex {e.left[0]!r} to itself"))
        a = e.matrix
        if len(a) != 2 or any(len(row) != 2 for row in a):
            bad(Issue("matrix shape", f"edge e{k}: matrix must be 2x2"))
            continue
        if _det(a) not in (1, -1):
            bad(Issue("determinant", f"edge e{k}: det = {_det(a)}, expected +-1"))
        if a[0][1] == 0:
            bad(Issue("fiber glued to fiber",
                      f"edge e{k}: A(0,1) = ({a[0][1]}, {a[1][1]}) has zero first coordinate"))
    if g.vertices and g.base in g.vertices:
        seen = {g.base}
        todo = deque([g.base])
        adj = {}
        for e in g.edges:
            adj.setdefault(e.left[0], []).append(e.right[0])
            adj.setdefault(e.right[0], []).append(e.left[0])
        while todo:
            v = todo.popleft()
            for w in adj.get(v, ()):
                if w in g.vertices and w not in seen:
                    seen.add(w)
                    todo.append(w)
        if len(seen) != len(g.vertices):
            missing = sorted(map(str, set(g.vertices) - seen))
            bad(Issue("disconnected", f"vertices unreachable from base: {missing}"))
    for vid, s in g.vertices.items():
        free = [i for i in range(1, s.boundary_count + 1) if (vid, i) not in used]
        if free:
            rep.warnings.append(Issue("unglued boundary",
                                      f"vertex {vid!r}: boundary slots {free} are not glued"))
    return rep


def check_graph(g: GraphOfGroups) -> GraphOfGroups:
    rep = validate_graph(g)
    if not rep.ok:
        raise ValidationError("; ".join(v.message for v in rep.violations))
    return g


def edge_embed(g: GraphOfGroups, k: int, side: str, m) -> BlockElement:
    """Image of ``m in Z^2`` under edge ``k``'s monomorphism into the ``side`` vertex group."""
    e = g.edge(k)
    if side == LEFT:
        vid, slot = e.left
        p, q = m
    elif side == RIGHT:
        vid, slot = e.right
        p, q = _apply(e.matrix, m)
    else:
        raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
    s = g.vertices[vid]
    return BlockElement(letter_power(s.boundary_letter(slot), p), q, s.rank)


def edge_coordinates(g: GraphOfGroups, k: int, side: str, x: BlockElement) -> Optional[tuple]:
    """Inverse of :func:`edge_embed`: the ``m`` with image ``x``, or None if ``x`` is not in the image."""
    e = g.edge(k)
    vid, slot = e.left if side == LEFT else e.right
    p = power_of_letter(x.base, g.vertices[vid].boundary_letter(slot))
    if p is None:
        return None
    if side == LEFT:
        return (p, x.fiber)
    return _apply(integer_inverse(e.matrix), (p, x.fiber))


_TOP_KEYS = {"vertices", "edges", "base"}
_VERTEX_KEYS = {"id", "genus", "boundary"}
_EDGE_KEYS = {"from", "to", "matrix"}


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ValidationError(f"{where}: unknown fields {sorted(extra)}")
    missing = allowed - set(obj)
    if missing:
        raise ValidationError(f"{where}: missing fields {sorted(missing)}")


def _int(x, where):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(f"{where}: expected an integer, got {x!r}")
    return x


def graph_from_dict(doc: dict) -> GraphOfGroups:
    """Build a graph from the config document; unknown fields are rejected."""
    _check_keys(doc, _TOP_KEYS, "graph")
    vertices = {}
    for i, v in enumerate(doc["vertices"]):
        _check_keys(v, _VERTEX_KEYS, f"vertices[{i}]")
        vid = str(v["id"])
        if vid in vertices:
            raise ValidationError(f"duplicate vertex id {vid!r}")
        try:
            vertices[vid] = SurfaceData(_int(v["genus"], vid), _int(v["boundary"], vid))
        except ValueError as exc:
            raise ValidationError(f"vertex {vid!r}: {exc}") from None
    edges = []
    for i, e in enumerate(doc["edges"]):
        where = f"edges[{i}]"
        _check_keys(e, _EDGE_KEYS, where)
        ends = []
        for key in ("from", "to"):
            end = e[key]
            if not isinstance(end, list) or len(end) != 2:
                raise ValidationError(f"{where}.{key}: expected [id, slot]")
            ends.append((str(end[0]), _int(end[1], f"{where}.{key}")))
        mat = e["matrix"]
        if not isinstance(mat, list) or len(mat) != 2 or any(not isinstance(r, list) or len(r) != 2 for r in mat):
            raise ValidationError(f"{where}.matrix: expected [[p, r], [q, s]]")
        matrix = tuple(tuple(_int(x, f"{where}.matrix") for x in row) for row in mat)
        edges.append(EdgeGluing(ends[0], ends[1], matrix))
    return GraphOfGroups(vertices, tuple(edges), str(doc["base"]))


def graph_to_dict(g: GraphOfGroups) -> dict:
    return {
        "vertices": [{"id": k, "genus": s.genus, "boundary": s.boundary_count} for k, s in g.vertices.items()],
        "edges": [
            {"from": list(e.left), "to": list(e.right), "matrix": [list(r) for r in e.matrix]}
            for e in g.edges
        ],
        "base": g.base,
    }


def load_graph(path) -> GraphOfGroups:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return graph_from_dict(doc)


def default_graph() -> GraphOfGroups:
    """Two pairs of pants times a circle, glued along one torus by the fiber swap."""
    from importlib.resources import files

    doc = json.loads(files("gmboundary.data").joinpath("two_block.cfg").read_text())
    return graph_from_dict(doc)


def random_gl2(rng, steps: int = 3, bound: int = 3):
    """A random matrix in ``GL_2(Z)`` with nonzero top-right entry and entries in ``[-bound, bound]``."""
    while True:
        a = ((1, 0), (0, 1))
        for _ in range(steps):
            k = rng.choice((-1, 1))
            e = rng.choice((((1, k), (0, 1)), ((1, 0), (k, 1)), ((0, 1), (1, 0)), ((-1, 0), (0, 1))))
            a = ((a[0][0] * e[0][0] + a[0][1] * e[1][0], a[0][0] * e[0][1] + a[0][1] * e[1][1]),
                 (a[1][0] * e[0][0] + a[1][1] * e[1][0], a[1][0] * e[0][1] + a[1][1] * e[1][1]))
        if a[0][1] != 0 and all(abs(x) <= bound for row in a for x in row):
            return a


def random_graph(rng, max_vertices: int = 3, extra_edges: int = 1) -> GraphOfGroups:
    """A random valid graph: a spanning tree of blocks plus up to ``extra_edges`` more edges.

    Draws are repeated until the graph validates (slots can run out).
    """
    while True:
        g = _random_graph_candidate(rng, max_vertices, extra_edges)
        if validate_graph(g).ok:
            return g


def _random_graph_candidate(rng, max_vertices, extra_edges):
    n = rng.randint(2, max_vertices)
    ids = [f"v{i + 1}" for i in range(n)]
    vertices = {}
    for v in ids:
        genus = rng.choice((0, 0, 1))
        vertices[v] = SurfaceData(genus, rng.randint(3 if genus == 0 else 2, 4))
    free = {v: list(range(1, vertices[v].boundary_count)) for v in ids}
    for v in ids:
        rng.shuffle(free[v])
    pairs = [(ids[rng.randrange(i)], ids[i]) for i in range(1, n)]
    for _ in range(extra_edges):
        pairs.append(tuple(rng.sample(ids, 2)))
    edges = []
    for a, b in pairs:
        if free[a] and free[b]:
            edges.append(EdgeGluing((a, free[a].pop()), (b, free[b].pop()), random_gl2(rng)))
    return GraphOfGroups(vertices, tuple(edges), ids[0])
