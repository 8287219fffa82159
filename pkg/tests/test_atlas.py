import random
from fractions import Fraction

import pytest

from gmboundary.atlas import (
    AbelianGroup,
    BlockGroup,
    FreeGroup,
    GeometryTag,
    NilGroup,
    SolGroup,
    atlas_group,
    central_pushforward,
    check_sol_params,
    classify,
    nil_mul,
)
from gmboundary.errors import DomainError, ValidationError
from gmboundary.freegroup import BlockElement, SurfaceData
from gmboundary.measures import build_measure, moment_report, point_mass, uniform_measure


def test_classify_total():
    for tag in GeometryTag:
        d = classify(tag)
        assert d.triviality in ("trivial", "nontrivial")
        assert d.description and d.reduction_chain
    assert classify("E3").triviality == "trivial"
    assert "virtually Z^3" in classify("E3").reduction_chain
    assert classify("Sol").triviality == "nontrivial"
    assert "finite index polycyclic Z^2 x| Z" in classify("Sol").reduction_chain
    assert "ends of Bass-Serre covering tree" in classify(GeometryTag.GraphManifold).reduction_chain
    assert classify("Nil").triviality == "trivial"
    with pytest.raises(ValueError):
        classify("Mystery")


def rand3(rng, k=20):
    return tuple(rng.randint(-k, k) for _ in range(3))


def comm(g, x, y):
    return g.mul(g.mul(x, y), g.mul(g.inv(x), g.inv(y)))


def test_nil_rule():
    assert nil_mul((0, 0, 1), (0, 1, 0), 1) == (1, 1, 1)
    g = NilGroup(3)
    rng = random.Random(1)
    for _ in range(10_000):
        x, y, z = rand3(rng), rand3(rng), rand3(rng)
        assert g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z))
    for _ in range(500):
        x, y, z = rand3(rng), rand3(rng), rand3(rng)
        c = comm(g, x, y)
        assert c[1:] == (0, 0)
        assert g.mul(c, z) == g.mul(z, c)
        assert comm(g, c, z) == (0, 0, 0)
        assert g.mul(x, g.inv(x)) == g.identity() == g.mul(g.inv(x), x)
    with pytest.raises(ValueError):
        NilGroup(0)


def test_sol_rule():
    g = SolGroup(2, 1, 1, 1)
    a, b, c = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    conj = lambda x: g.mul(g.mul(c, x), g.inv(c))
    assert conj(a) == (2, 1, 0)
    assert conj(b) == (1, 1, 0)
    rng = random.Random(2)
    for _ in range(10_000):
        x, y, z = rand3(rng, 6), rand3(rng, 6), rand3(rng, 6)
        assert g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z))
        assert g.mul(x, g.inv(x)) == g.identity()


def test_sol_growth():
    g = SolGroup(2, 1, 1, 1)
    prev = 1
    for t in range(1, 12):
        big = max(abs(v) for row in g.matrix_power(t) for v in row)
        assert big >= 1.5 * prev
        prev = big
    assert g.matrix_power(-3) == tuple(map(tuple, g.matrix_power(-3)))


def test_sol_validator():
    assert check_sol_params(2, 1, 1, 1)
    for bad in [(2, 1, 1, 2), (1, 1, 0, 1), (1, 0, 0, 1), (-1, 0, 0, -1)]:
        with pytest.raises(ValidationError):
            SolGroup(*bad)


def test_reference_groups():
    z3 = AbelianGroup(3)
    assert len(z3.generators()) == 6 and z3.norm((1, -2, 3)) == 6
    f2 = FreeGroup(2)
    assert f2.mul((1, 2), (-2, 1)) == (1, 1)
    assert f2.prefix((1, 2, 1), 2) == (1, 2) and f2.prefix((1,), 2) is None
    assert f2.parse(f2.format((1, -2))) == (1, -2)
    assert atlas_group("sol:3,2,1,1") == SolGroup(3, 2, 1, 1)
    assert atlas_group("nil:2") == NilGroup(2)
    with pytest.raises(ValidationError):
        atlas_group("sol:1,1")
    with pytest.raises(ValidationError):
        atlas_group("torus")


def test_pushforward_examples():
    s = SurfaceData(0, 3)
    g = BlockGroup(s)
    z = BlockElement((), 1, 2)
    p = central_pushforward(point_mass(g, z))
    assert p.core == [((), Fraction(1))]
    x1 = lambda f: BlockElement((1,), f, 2)
    m = build_measure(g, [(x1(1), Fraction(1, 2)), (x1(-1), Fraction(1, 2))], check=False)
    assert central_pushforward(m).core == [((1,), Fraction(1))]
    with pytest.raises(DomainError):
        central_pushforward(uniform_measure(FreeGroup(2)))


def test_pushforward_moments_do_not_grow():
    g = BlockGroup(SurfaceData(1, 2))
    rng = random.Random(3)
    gens = g.generators()
    for _ in range(200):
        elems = []
        for _ in range(rng.randint(1, 6)):
            x = g.identity()
            for _ in range(rng.randint(0, 4)):
                x = g.mul(x, rng.choice(gens))
            elems.append(x)
        ws = [rng.randint(1, 5) for _ in elems]
        m = build_measure(g, [(x, Fraction(w, sum(ws))) for x, w in zip(elems, ws)], check=False)
        a, b = moment_report(m), moment_report(central_pushforward(m))
        assert b.entropy <= a.entropy + 1e-12
        assert b.log_moment <= a.log_moment + 1e-12
        assert b.first_moment <= a.first_moment + 1e-12
