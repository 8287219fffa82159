import random

import pytest

from gmboundary.errors import ResourceError
from gmboundary.fundgroup import GraphGroup
from gmboundary.graph import random_graph
from gmboundary.stabilizers import (
    ball_by_products,
    ball_enumerate,
    fiber_conjugate,
    fixes_vertex,
    is_fiber_generator,
    local_word,
    orbit_probe,
    sole_fixer_search,
    stab_intersection_check,
    standard_pair,
)
from gmboundary.tree import base_vertex, enumerate_neighbors, parse_vertex, tree_distance


@pytest.fixture(scope="module")
def ball4(G):
    return ball_enumerate(G, 4)


def test_ball_sizes(G):
    assert [len(ball_enumerate(G, r)) for r in range(5)] == [1, 7, 29, 101, 337]


def test_ball_oracle(G):
    assert set(ball_enumerate(G, 3)) == ball_by_products(G, 3)


def test_ball_oracle_random_graph():
    grp = GraphGroup(random_graph(random.Random("stab/1")))
    assert set(ball_enumerate(grp, 3)) == ball_by_products(grp, 3)


def test_ball_guard(G):
    with pytest.raises(ResourceError) as err:
        ball_enumerate(G, 4, limit=100)
    assert err.value.count == 101


def test_distance_two_is_fiber(G, ball4):
    u, v = standard_pair(G, 2)
    rep = stab_intersection_check(u, v, 4, ball4)
    assert rep.distance == 2 and rep.structure == "cyclic"
    assert str(rep.generator) == "z"
    assert len(rep.elements) == 9


def test_distance_two_other_middle(G, ball4):
    # middle vertex 1 | e1, whose fiber is conjugate to c1 under the swap gluing
    u = base_vertex(G)
    v = parse_vertex(G, "1 | e1 | c2 | e1^-1")
    rep = stab_intersection_check(u, v, 4, ball4)
    assert rep.structure == "cyclic"
    assert is_fiber_generator(rep.generator, parse_vertex(G, "1 | e1"))
    assert str(fiber_conjugate(parse_vertex(G, "1 | e1"))) == "c1"


@pytest.mark.parametrize("d", [3, 4])
def test_far_pairs_trivial(G, ball4, d):
    u, v = standard_pair(G, d)
    assert tree_distance(u, v) == d
    rep = stab_intersection_check(u, v, 4, ball4)
    assert rep.structure == "trivial" and [str(x) for x in rep.elements] == ["1"]


def test_local_word(G):
    w = parse_vertex(G, "c2 | e1")
    z = fiber_conjugate(w)
    assert fixes_vertex(z, w)
    loc = local_word(z, w)
    assert loc.base == () and loc.fiber == 1
    assert local_word(G.parse("c2"), w) is None


def test_sole_fixer(G, ball4):
    o = base_vertex(G)
    g = sole_fixer_search(o, 4, 4, ball4)
    assert g is not None and str(g) == "c1 c2^-1"
    assert fixes_vertex(g, o)
    assert all(not fixes_vertex(g, n) for n in enumerate_neighbors(o, 4))


def test_orbit_probe(G, ball4):
    o = base_vertex(G)
    assert orbit_probe([o], 2) is None
    g = orbit_probe([o], 4, ball4)
    assert g is not None and g.edges
    pts = [o] + enumerate_neighbors(o, 1)
    assert orbit_probe(pts, 4, ball4) is not None
