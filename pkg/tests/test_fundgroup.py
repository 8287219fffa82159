import random

import pytest

from _support import insert_pinch, random_element, raw_path
from gmboundary.errors import DomainError, MalformedWordError
from gmboundary.freegroup import BlockElement
from gmboundary.fundgroup import (
    GraphGroup,
    PathBuilder,
    format_element,
    gog_inv,
    gog_mul,
    normalize,
    parse_element,
)
from gmboundary.graph import default_graph, random_graph


def groups():
    yield GraphGroup(default_graph())
    for i in range(4):
        yield GraphGroup(random_graph(random.Random(f"fg/{i}")))


def test_default_generators(G):
    names = [str(g) for g in G.generators()]
    assert names == ["c1", "c1^-1", "c2", "c2^-1", "z", "z^-1",
                     "1 | e1 | c2 | e1^-1 | 1", "1 | e1 | c2^-1 | e1^-1 | 1"]
    assert [g.norm for g in G.generators()] == [1, 1, 1, 1, 1, 1, 3, 3]


def test_edge_relation(G):
    # swap gluing: c1 e1 = e1 z' and z e1 = e1 c1'
    a = parse_element(G, "c1 | e1 | 1 | e1^-1 | 1")
    b = parse_element(G, "1 | e1 | z | e1^-1 | 1")
    assert a == b == G.parse("c1")
    assert G.parse("1 | e1 | c1 | e1^-1 | 1") == G.parse("z")


def test_canonical_syllables(G):
    x = G.parse("c2 c1^3 z^2 | e1 | c2 | e1^-1 | 1")
    # c1^3 z^2 crosses as c1'^2 z'^3, then the fiber z'^3 crosses back as c1^3
    assert str(x) == "c2 | e1 | c1^2 c2 | e1^-1 | c1^3"


@pytest.mark.parametrize("group", list(groups()), ids=lambda g: repr(g))
def test_group_laws(group):
    rng = random.Random(7)
    e = group.identity()
    for _ in range(150):
        x, y, z = (random_element(group, rng) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert (x * ~x).is_identity and (~x * x).is_identity
        assert x * e == x == e * x
        assert ~(x * y) == ~y * ~x


@pytest.mark.parametrize("group", list(groups()), ids=lambda g: repr(g))
def test_pinch_insertions_normalize_back(group):
    rng = random.Random(11)
    for _ in range(300):
        x = random_element(group, rng)
        raw = raw_path(x)
        for _ in range(rng.randint(1, 3)):
            raw = insert_pinch(group, raw, rng)
        assert normalize(group, raw) == x


def test_format_parse_roundtrip(G):
    rng = random.Random(3)
    for _ in range(200):
        x = random_element(G, rng, 10)
        assert parse_element(G, format_element(x)) == x


def test_builder_matches_products(G):
    rng = random.Random(5)
    b = PathBuilder(G)
    x = G.identity()
    for _ in range(300):
        g = rng.choice(G.generators())
        b.rmul(g)
        x = gog_mul(x, g)
        assert b.element() == x
        assert b.depth == len(x.edges)


def test_norm_examples(G):
    assert G.identity().norm == 0
    assert G.parse("c1^2 z^-1").norm == 3
    assert gog_inv(G.parse("c2 | e1 | c2 | e1^-1 | 1")).norm == 4


def test_errors(G):
    with pytest.raises(MalformedWordError):
        G.parse("c7")
    with pytest.raises(DomainError):
        normalize(G, [BlockElement((), 0, 2), 1, BlockElement((), 0, 2)])
    with pytest.raises(DomainError):
        normalize(G, [BlockElement((), 0, 2), -1, BlockElement((), 0, 2)])
    other = GraphGroup(random_graph(random.Random(99)))
    with pytest.raises(DomainError):
        G.identity() * other.identity()
