"""Step measures: a finite core of weighted elements plus an optional geometric tail.

The tail draws ``L >= 1`` with ``P(L = k) = (1 - q) q^(k-1)`` and returns the
product of ``L`` uniform generators.  Its law is only known in bound form,
which is enough for the moment accounting below.
"""
from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from pathlib import Path
from typing import Optional

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class Tail:
    mass: Fraction
    q: Fraction
    generators: tuple

    @property
    def mean_length(self) -> float:
        return 1 / (1 - float(self.q))


@dataclass
class StepMeasure:
    group: object
    core: list  # [(element, Fraction)]
    tail: Optional[Tail] = None
    _table: tuple = field(default=None, repr=False, compare=False)

    @property
    def core_mass(self) -> Fraction:
        return sum((w for _, w in self.core), Fraction(0))

    def support(self) -> list:
        return [g for g, _ in self.core]

    def table(self):
        """Cumulative float weights over the core, then the tail."""
        if self._table is None:
            cum = list(accumulate(float(w) for _, w in self.core))
            self._table = (cum, [g for g, _ in self.core])
        return self._table


def _frac(x, what) -> Fraction:
    try:
        return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10**9)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"{what}: not a number: {x!r}") from None


def is_generating(group, core, tail) -> bool:
    """Structural semigroup-generation check: a tail, or every generator in the core."""
    if tail is not None and tail.mass > 0:
        return True
    support = {g for g, w in core if w > 0}
    return all(g in support for g in group.generators())


def build_measure(group, core, tail_q=None, check: bool = True) -> StepMeasure:
    """Validate ``core`` (pairs of element and weight) and fill the remaining mass with a tail.

    ``tail_q`` is the length ratio of the geometric tail.  Without it the core
    weights must sum to exactly 1.
    """
    merged = {}
    order = []
    for g, w in core:
        w = _frac(w, f"weight of {g}")
        if w < 0:
            raise DomainError(f"negative weight {w} on {g}")
        if w == 0:
            continue
        if g not in merged:
            order.append(g)
            merged[g] = Fraction(0)
        merged[g] += w
    entries = [(g, merged[g]) for g in order]
    s = sum((w for _, w in entries), Fraction(0))
    if s > 1:
        raise DomainError(f"core weights sum to {s} > 1")
    tail = None
    if tail_q is not None:
        q = _frac(tail_q, "tail ratio")
        if not 0 < q < 1:
            raise DomainError(f"tail ratio q = {q} must lie in (0, 1)")
        if s < 1:
            tail = Tail(1 - s, q, tuple(group.generators()))
    elif s != 1:
        raise DomainError(f"core weights sum to {s}; add a tail or normalize")
    if check and not is_generating(group, entries, tail):
        raise ValidationError("support does not contain a symmetric generating set")
    return StepMeasure(group, entries, tail)


def uniform_measure(group, elements=None, check: bool = True) -> StepMeasure:
    elements = list(group.generators() if elements is None else elements)
    w = Fraction(1, len(elements))
    return build_measure(group, [(g, w) for g in elements], check=check)


def point_mass(group, g) -> StepMeasure:
    return build_measure(group, [(g, 1)], check=False)


def tail_measure(group, core_mass=Fraction(9, 10), q=Fraction(1, 2)) -> StepMeasure:
    gens = group.generators()
    w = Fraction(core_mass) / len(gens)
    return build_measure(group, [(g, w) for g in gens], tail_q=q)


# moments -----------------------------------------------------------------------


@dataclass
class MomentReport:
    entropy: float
    log_moment: float
    first_moment: float
    exact: bool  # False when tail terms are upper bounds
    core: dict = field(default_factory=dict)
    tail_bound: dict = field(default_factory=dict)

    def finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.entropy, self.log_moment, self.first_moment))

    def to_dict(self) -> dict:
        return {
            "entropy": self.entropy,
            "log_moment": self.log_moment,
            "first_moment": self.first_moment,
            "exact": self.exact,
            "finite": self.finite(),
            "core": self.core,
            "tail_bound": self.tail_bound,
        }


def _log_norm(n: int) -> float:
    return math.log(n) if n > 0 else 0.0


def geometric_entropy(q: float) -> float:
    """Entropy of the geometric law on ``{1, 2, ...}`` with ratio ``q``."""
    return (-(1 - q) * math.log(1 - q) - q * math.log(q)) / (1 - q)


def moment_report(m: StepMeasure) -> MomentReport:
    """Exact sums over the core plus closed-form upper bounds for the tail.

    The tail bounds use ``|s_1 ... s_L| <= L max|s|``, Jensen for the log,
    subadditivity of ``-x log x`` for the entropy, and the fact that the
    product map can only lower the entropy of the word ``(L, s_1..s_L)``.
    """
    group = m.group
    h = lm = fm = 0.0
    for g, w in m.core:
        wf = float(w)
        n = group.norm(g)
        h -= wf * math.log(wf)
        lm += wf * _log_norm(n)
        fm += wf * n
    core = {"entropy": h, "log_moment": lm, "first_moment": fm}
    tail = {}
    if m.tail is not None:
        tau = float(m.tail.mass)
        q = float(m.tail.q)
        big = max(group.norm(s) for s in m.tail.generators)
        k = len(m.tail.generators)
        el = 1 / (1 - q)
        tail = {
            "mass": tau,
            "q": q,
            "first_moment": tau * big * el,
            "log_moment": tau * (_log_norm(big) + math.log(el)),
            "entropy": -tau * math.log(tau) + tau * (geometric_entropy(q) + el * math.log(k)),
        }
    return MomentReport(
        entropy=h + tail.get("entropy", 0.0),
        log_moment=lm + tail.get("log_moment", 0.0),
        first_moment=fm + tail.get("first_moment", 0.0),
        exact=m.tail is None,
        core=core,
        tail_bound=tail,
    )


# sampling ----------------------------------------------------------------------


def stream_rng(seed, stream: str, index: int) -> random.Random:
    """Independent generator for walk ``index`` of a named stream."""
    return random.Random(f"{seed}/{stream}/{index}")


def draw_factors(m: StepMeasure, rng: random.Random) -> list:
    """One step as a list of factors whose product is the sampled element."""
    cum, elems = m.table()
    u = rng.random()
    if m.tail is None:
        i = bisect_right(cum, u * cum[-1]) if cum else 0
        return [elems[min(i, len(elems) - 1)]]
    i = bisect_right(cum, u)
    if i < len(elems):
        return [elems[i]]
    gens = m.tail.generators
    q = float(m.tail.q)
    out = [gens[rng.randrange(len(gens))]]
    while rng.random() < q:
        out.append(gens[rng.randrange(len(gens))])
    return out


def sample_step(m: StepMeasure, rng: random.Random):
    f = draw_factors(m, rng)
    x = f[0]
    for y in f[1:]:
        x = m.group.mul(x, y)
    return x


# presets and files -------------------------------------------------------------

GRAPH_PRESETS = ("uniform", "tail", "hyperbolic")


def hyperbolic_element(group):
    """A letter off the edge slot times the cross element; it translates along an axis through ``o``."""
    slot = group.src_letter[group.traversals_from[group.base][0]]
    letter = next(i for i in range(1, group.rank[group.base] + 1) if i != slot)
    cross = next(g for g in group.generators() if g.edges)
    return group.vertex_element((letter,)) * cross


def graph_preset(group, name: str) -> StepMeasure:
    if name == "uniform":
        return uniform_measure(group)
    if name == "tail":
        return tail_measure(group)
    if name == "hyperbolic":
        return point_mass(group, hyperbolic_element(group))
    raise ValidationError(f"unknown preset {name!r}; graph presets are {', '.join(GRAPH_PRESETS)}")


def resolve_measure(source: str, group=None):
    """``preset:<name>`` or a JSON file; returns ``(group, measure)``.

    Atlas presets (``z3``, ``z``, ``f2``, ``nil:n``, ``sol:k,l,m,n``) bring
    their own group and the uniform measure on its generators.  Graph presets
    and files need ``group``.
    """
    from .atlas import atlas_group

    if source.startswith("preset:"):
        name = source[len("preset:"):]
        if name in GRAPH_PRESETS:
            if group is None:
                raise ValidationError(f"preset {name!r} needs a graph")
            return group, graph_preset(group, name)
        g = atlas_group(name)
        return g, uniform_measure(g)
    if group is None:
        raise ValidationError("a measure file needs a graph")
    return group, load_measure(group, source)


def measure_from_dict(group, doc: dict) -> StepMeasure:
    """``{"core": [[element, weight], ...], "tail_q": q, "check": true}``."""
    if not isinstance(doc, dict):
        raise ValidationError("measure: expected an object")
    extra = set(doc) - {"core", "tail_q", "check"}
    if extra:
        raise ValidationError(f"measure: unknown fields {sorted(extra)}")
    core = []
    for i, item in enumerate(doc.get("core", [])):
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], str):
            raise ValidationError(f"measure core[{i}]: expected [element, weight]")
        core.append((group.parse(item[0]), _frac(str(item[1]), f"core[{i}] weight")))
    return build_measure(group, core, doc.get("tail_q"), check=bool(doc.get("check", True)))


def load_measure(group, path) -> StepMeasure:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return measure_from_dict(group, doc)


def measure_to_dict(m: StepMeasure) -> dict:
    fmt = getattr(m.group, "format", str)
    doc = {"core": [[fmt(g), str(w)] for g, w in m.core]}
    if m.tail is not None:
        doc["tail_q"] = str(m.tail.q)
    return doc
