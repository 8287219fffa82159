import json
import math
from collections import Counter
from fractions import Fraction

import pytest

from gmboundary.atlas import AbelianGroup, FreeGroup
from gmboundary.errors import DomainError, ValidationError
from gmboundary.measures import (
    build_measure,
    draw_factors,
    geometric_entropy,
    graph_preset,
    load_measure,
    measure_to_dict,
    moment_report,
    point_mass,
    resolve_measure,
    sample_step,
    stream_rng,
    tail_measure,
    uniform_measure,
)


def test_build_checks(G):
    u = uniform_measure(G)
    assert u.core_mass == 1 and len(u.core) == 8
    z = G.parse("z")
    with pytest.raises(ValidationError):
        build_measure(G, [(z, Fraction(1, 2)), (~z, Fraction(1, 2))])
    with pytest.raises(DomainError):
        build_measure(G, [(z, Fraction(3, 2)), (~z, Fraction(-1, 2))])
    with pytest.raises(DomainError):
        build_measure(G, [(z, Fraction(1, 2))])
    with pytest.raises(DomainError):
        build_measure(G, [(z, Fraction(1, 2))], tail_q=1)
    # a tail makes any core generating
    m = build_measure(G, [(z, Fraction(1, 2))], tail_q=Fraction(1, 2))
    assert m.tail.mass == Fraction(1, 2)


def test_moment_examples(G):
    r = moment_report(point_mass(G, G.identity()))
    assert r.entropy == 0 and r.log_moment == 0 and r.first_moment == 0 and r.exact
    f2 = moment_report(uniform_measure(FreeGroup(4)))
    assert math.isclose(f2.entropy, math.log(8)) and f2.log_moment == 0
    u = moment_report(uniform_measure(G))
    # six generators of norm 1 and two cross elements of norm 3
    assert math.isclose(u.log_moment, 2 * math.log(3) / 8)
    assert math.isclose(u.first_moment, 12 / 8)


def test_tail_bounds(G):
    m = tail_measure(G)
    r = moment_report(m)
    assert not r.exact and r.finite()
    assert math.isclose(r.core["entropy"], 0.9 * math.log(8 / 0.9))
    tb = r.tail_bound
    assert math.isclose(tb["first_moment"], 0.1 * 3 * 2)
    assert math.isclose(tb["log_moment"], 0.1 * (math.log(3) + math.log(2)))
    assert math.isclose(tb["entropy"], -0.1 * math.log(0.1) + 0.1 * (geometric_entropy(0.5) + 2 * math.log(8)))
    assert math.isclose(geometric_entropy(0.5), 2 * math.log(2))
    for q in (Fraction(1, 10), Fraction(9, 10), Fraction(999, 1000)):
        assert moment_report(tail_measure(G, q=q)).finite()


def test_point_mass_sampler(G):
    x = G.parse("c2 | e1 | c2 | e1^-1 | 1")
    m = point_mass(G, x)
    rng = stream_rng(1, "t", 0)
    assert all(sample_step(m, rng) == x for _ in range(50))


def test_uniform_frequencies():
    f = FreeGroup(4)
    m = uniform_measure(f)
    rng = stream_rng(7, "freq", 0)
    n = 1_000_000
    counts = Counter(draw_factors(m, rng)[0] for _ in range(n))
    sigma = math.sqrt(n * (1 / 8) * (7 / 8))
    assert all(abs(counts[g] - n / 8) < 4 * sigma for g in f.generators())


def test_tail_length_law():
    z = AbelianGroup(1)
    m = build_measure(z, [], tail_q=Fraction(1, 2))
    rng = stream_rng(3, "tail", 0)
    n = 100_000
    lengths = [len(draw_factors(m, rng)) for _ in range(n)]
    q = 0.5
    mean, var = 1 / (1 - q), q / (1 - q) ** 2
    assert abs(sum(lengths) / n - mean) < 4 * math.sqrt(var / n)
    assert min(lengths) == 1


def test_determinism(G):
    m = tail_measure(G)
    a = [sample_step(m, stream_rng(5, "s", i)) for i in range(200)]
    b = [sample_step(m, stream_rng(5, "s", i)) for i in range(200)]
    assert a == b
    assert a != [sample_step(m, stream_rng(6, "s", i)) for i in range(200)]


def test_presets_and_files(G, tmp_path):
    for name in ("uniform", "tail", "hyperbolic"):
        assert graph_preset(G, name).core
    grp, m = resolve_measure("preset:z3")
    assert grp == AbelianGroup(3) and len(m.core) == 6
    with pytest.raises(ValidationError):
        resolve_measure("preset:uniform")
    path = tmp_path / "m.json"
    path.write_text(json.dumps(measure_to_dict(tail_measure(G))))
    back = load_measure(G, path)
    assert back.core == tail_measure(G).core and back.tail.q == Fraction(1, 2)
    path.write_text(json.dumps({"core": [["z", "1"]], "check": True}))
    with pytest.raises(ValidationError):
        load_measure(G, path)
    path.write_text(json.dumps({"core": [["z", "1"]], "weights": 1}))
    with pytest.raises(ValidationError):
        load_measure(G, path)
