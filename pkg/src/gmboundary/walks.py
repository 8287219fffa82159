"""Random walks: traces, end convergence, harmonic histograms and diagnostics.

Every walk ``i`` of a named stream draws from its own generator seeded by
``(seed, stream, i)``.  Results therefore do not depend on how walks are
split across worker processes.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Optional

from .errors import DomainError, ValidationError
from .measures import StepMeasure, draw_factors, stream_rng
from .tree import EndPrefix, TreeVertex, vertex_of

UNDECIDED = "undecided"


# traces ------------------------------------------------------------------------


@dataclass
class WalkTrace:
    steps: list
    positions: list
    projections: list  # tree vertex of z_k o (graph groups) or None


def _project(group, x):
    if hasattr(group, "traversals_from"):
        return vertex_of(x)
    if hasattr(group, "prefix"):
        return x
    return None


def run_walk(m: StepMeasure, n: int, seed, stream: str = "walk", index: int = 0) -> WalkTrace:
    if n < 1:
        raise ValueError("a walk needs n >= 1 steps")
    rng = stream_rng(seed, stream, index)
    group = m.group
    cur = group.identity()
    steps, positions, projections = [], [], []
    for _ in range(n):
        f = draw_factors(m, rng)
        g = f[0]
        for h in f[1:]:
            g = group.mul(g, h)
        cur = group.mul(cur, g)
        steps.append(g)
        positions.append(cur)
        projections.append(_project(group, cur))
    return WalkTrace(steps, positions, projections)


def _prefix_of(v, d):
    if isinstance(v, TreeVertex):
        return v.truncate(d) if v.depth >= d else None
    if isinstance(v, tuple):
        return v[:d] if len(v) >= d else None
    return None


def detect_end_convergence(t: WalkTrace, depth: int, patience: int):
    """The depth-``d`` prefix shared by the last ``patience`` projections, else None (undecided)."""
    if depth < 1 or patience < 1:
        raise ValueError("depth and patience must be >= 1")
    if len(t.projections) < patience:
        return None
    keys = [_prefix_of(v, depth) for v in t.projections[-patience:]]
    first = keys[0]
    if first is None or any(k != first for k in keys[1:]):
        return None
    if isinstance(first, TreeVertex):
        return EndPrefix(first.group, first.edges, first.syls)
    return first


# streaming walks -----------------------------------------------------------------


def _label(group, key):
    if key is None:
        return UNDECIDED
    if hasattr(group, "traversals_from"):
        return str(EndPrefix(group, *key))
    fmt = getattr(group, "format", str)
    return fmt(key)


def walk_outcome(m: StepMeasure, n: int, depth: int, patience: int, rng, start=None):
    """Run one walk without storing it: (prefix label, final displacement, decided)."""
    group = m.group
    c = group.cursor(start)
    last, run = None, 0
    for _ in range(n):
        for h in draw_factors(m, rng):
            c.rmul(h)
        k = c.prefix(depth)
        if k is None:
            run = 0
        elif k == last:
            run += 1
        else:
            run = 1
        last = k
    decided = run >= patience
    return (_label(group, last) if decided else UNDECIDED), c.depth, decided


def _chunk(args):
    m, n, depth, patience, seed, stream, lo, hi, start = args
    out = []
    for i in range(lo, hi):
        lab, dist, _ = walk_outcome(m, n, depth, patience, stream_rng(seed, stream, i), start)
        out.append((lab, dist))
    return out


def walk_records(m: StepMeasure, walks: int, steps: int, depth: int, seed, patience: int, jobs: int = 1,
                 start=None, stream: str = "harmonic") -> list:
    """``(prefix label, final displacement)`` for walks ``0..walks-1``, in index order."""
    if walks <= 0:
        return []
    nchunks = max(1, min(walks, 4 * max(1, jobs)))
    bounds = [walks * i // nchunks for i in range(nchunks + 1)]
    tasks = [(m, steps, depth, patience, seed, stream, bounds[i], bounds[i + 1], start)
             for i in range(nchunks) if bounds[i] < bounds[i + 1]]
    if jobs <= 1 or len(tasks) <= 1:
        parts = [_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_chunk, tasks))
    return [r for part in parts for r in part]


@dataclass
class Histogram:
    counts: Counter
    total: int
    depth: int
    steps: int

    @property
    def undecided(self) -> int:
        return self.counts.get(UNDECIDED, 0)

    def mass(self, label) -> Fraction:
        return Fraction(self.counts.get(label, 0), self.total) if self.total else Fraction(0)

    @property
    def undecided_fraction(self) -> Fraction:
        return self.mass(UNDECIDED)

    def cylinders(self) -> list:
        """Decided labels by decreasing count, ties broken by label."""
        return sorted((k for k in self.counts if k != UNDECIDED), key=lambda k: (-self.counts[k], k))

    def masses(self) -> dict:
        out = {k: self.mass(k) for k in self.cylinders()}
        if self.total:
            out[UNDECIDED] = self.undecided_fraction
        return out

    def rows(self) -> list:
        return [(k, self.counts.get(k, 0), str(v), float(v)) for k, v in self.masses().items()]

    def to_dict(self) -> dict:
        return {
            "walks": self.total,
            "steps": self.steps,
            "depth": self.depth,
            "undecided_fraction": float(self.undecided_fraction),
            "cylinders": [{"prefix": k, "count": c, "mass": s} for k, c, s, _ in self.rows()],
        }


def harmonic_estimate(m: StepMeasure, walks: int, steps: int, depth: int, seed, patience: Optional[int] = None,
                      jobs: int = 1, start=None, stream: str = "harmonic") -> Histogram:
    """Histogram of converged depth-``d`` prefixes over ``walks`` independent walks."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    patience = patience if patience is not None else max(1, steps // 10)
    recs = walk_records(m, walks, steps, depth, seed, patience, jobs, start, stream)
    return Histogram(Counter(lab for lab, _ in recs), max(0, walks), depth, steps)


# stationarity ---------------------------------------------------------------------


@dataclass
class StationarityReport:
    status: str  # pass | fail | inconclusive
    confidence: float
    critical_z: float
    epsilon: float
    truncated_mass: float
    rows: list = field(default_factory=list)
    max_z: float = 0.0
    reason: str = ""
    self_test: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "confidence": self.confidence,
            "critical_z": self.critical_z,
            "epsilon": self.epsilon,
            "truncated_mass": self.truncated_mass,
            "max_z": self.max_z,
            "reason": self.reason,
            "cylinders": self.rows,
            "self_test": self.self_test,
        }


def _ac_var(x: int, n: int) -> float:
    """Agresti-Coull variance of a binomial proportion estimate."""
    p = (x + 2) / (n + 4)
    return p * (1 - p) / (n + 4)


def _compare(base: Histogram, parts: list, slack: float, alpha: float):
    """z-scores of ``base`` against the mixture ``sum w_g hist_g`` on every cylinder seen."""
    labels = set(base.cylinders())
    for _, h in parts:
        labels.update(h.cylinders())
    labels = sorted(labels)
    k = max(1, len(labels))
    zc = NormalDist().inv_cdf(1 - alpha / (2 * k))
    rows = []
    for lab in labels:
        nu = base.counts.get(lab, 0) / base.total
        var = _ac_var(base.counts.get(lab, 0), base.total)
        mix = 0.0
        for w, h in parts:
            x = h.counts.get(lab, 0)
            mix += w * x / h.total
            var += w * w * _ac_var(x, h.total)
        se = math.sqrt(var)
        z = max(0.0, abs(nu - mix) - slack) / se
        rows.append({"prefix": lab, "nu": nu, "mixture": mix, "se": se, "z": z})
    return rows, zc


def _tail_cutoff(m: StepMeasure, epsilon: float) -> int:
    """Smallest ``k`` with tail mass of lengths ``> k`` at most ``epsilon``."""
    tau, q = float(m.tail.mass), float(m.tail.q)
    k = 1
    while tau * q**k > epsilon:
        k += 1
    return k


class _TruncatedTail:
    """Tail law conditioned on ``L <= k``, as a measure-like sampler."""

    def __init__(self, m: StepMeasure, k: int):
        self.group = m.group
        self.gens = m.tail.generators
        self.q = float(m.tail.q)
        self.k = k

    def draw(self, rng):
        while True:
            out = [self.gens[rng.randrange(len(self.gens))]]
            while rng.random() < self.q:
                out.append(self.gens[rng.randrange(len(self.gens))])
            if len(out) <= self.k:
                return out


def stationarity_check(m: StepMeasure, depth: int, walks: int, steps: int, seed, patience: Optional[int] = None,
                       epsilon: float = 0.01, confidence: float = 0.99, floor: int = 100,
                       max_undecided: float = 0.05, jobs: int = 1, self_test: bool = True) -> StationarityReport:
    """Test ``nu = sum_g mu(g) g.nu`` on depth-``d`` cylinders.

    ``nu`` is estimated from walks at the identity and each ``g.nu`` from walks
    started at ``g``.  A geometric tail is truncated to lengths ``<= k`` with
    leftover mass ``<= epsilon``; its part of the mixture is estimated from walks
    started at tail draws.  The leftover mass is allowed as slack on every
    cylinder.  z-scores use Agresti-Coull variances with a Bonferroni
    correction over the cylinders seen.
    """
    alpha = 1 - confidence
    patience = patience if patience is not None else max(1, steps // 10)
    base = harmonic_estimate(m, walks, steps, depth, seed, patience, jobs, stream="stat/base")
    parts = []
    for i, (g, w) in enumerate(m.core):
        h = harmonic_estimate(m, walks, steps, depth, seed, patience, jobs, start=g, stream=f"stat/g{i}")
        parts.append((float(w), h))
    slack = 0.0
    if m.tail is not None:
        k = _tail_cutoff(m, epsilon)
        slack = float(m.tail.mass) * float(m.tail.q) ** k
        tt = _TruncatedTail(m, k)
        counts = Counter()
        for i in range(walks):
            rng = stream_rng(seed, "stat/tail", i)
            start = m.group.identity()
            for f in tt.draw(rng):
                start = m.group.mul(start, f)
            lab, _, _ = walk_outcome(m, steps, depth, patience, rng, start)
            counts[lab] += 1
        parts.append((float(m.tail.mass) - slack, Histogram(counts, walks, depth, steps)))
    rows, zc = _compare(base, parts, slack, alpha)
    max_z = max((r["z"] for r in rows), default=0.0)
    report = StationarityReport("pass", confidence, zc, epsilon, slack, rows, max_z)
    worst_und = max([float(base.undecided_fraction)] + [float(h.undecided_fraction) for _, h in parts])
    if walks < floor:
        report.status, report.reason = "inconclusive", f"{walks} walks per start is below the floor {floor}"
    elif worst_und > max_undecided:
        report.status, report.reason = "inconclusive", f"undecided fraction {worst_und:.4f} > {max_undecided}"
    elif max_z > zc:
        report.status, report.reason = "fail", f"max z {max_z:.2f} exceeds {zc:.2f}"
    if self_test:
        report.self_test = corruption_self_test(base, parts, slack, alpha)
    return report


def corruption_self_test(base: Histogram, parts: list, slack: float, alpha: float, shift: float = 10.0) -> dict:
    """Move ``shift`` standard errors of mass between the two heaviest cylinders and re-test."""
    cyl = base.cylinders()
    a = cyl[0] if cyl else "corrupt:a"
    b = cyl[1] if len(cyl) > 1 else "corrupt:b"
    rows, _ = _compare(base, parts, slack, alpha)
    se = next((r["se"] for r in rows if r["prefix"] == a), math.sqrt(_ac_var(0, base.total)))
    moved = min(base.counts.get(a, 0), math.ceil((shift * se + slack) * base.total))
    counts = Counter(base.counts)
    counts[a] -= moved
    counts[b] += moved
    bad = Histogram(+counts, base.total, base.depth, base.steps)
    rows, zc = _compare(bad, parts, slack, alpha)
    mz = max((r["z"] for r in rows), default=0.0)
    return {"moved_walks": moved, "from": a, "to": b, "max_z": mz, "critical_z": zc, "detected": mz > zc}


# drift and entropy ---------------------------------------------------------------


def entropy_drift_estimate(m: StepMeasure, n: int, samples: int, seed, stream: str = "drift") -> dict:
    """Drift ``E d(o, z_n o) / n`` with a 95% interval and the plug-in entropy of ``z_n`` over ``n``.

    The displacement is the tree distance for graph groups and the group norm
    otherwise.  The entropy figure is biased low.  It is only meant for
    watching decay.
    """
    if n < 1 or samples < 1:
        raise ValueError("n and samples must be >= 1")
    group = m.group
    dist = []
    finals = Counter()
    for i in range(samples):
        rng = stream_rng(seed, stream, i)
        c = group.cursor()
        for _ in range(n):
            for h in draw_factors(m, rng):
                c.rmul(h)
        dist.append(c.depth)
        finals[c.element()] += 1
    mean = sum(dist) / samples
    var = sum((x - mean) ** 2 for x in dist) / (samples - 1) if samples > 1 else 0.0
    half = 1.959963984540054 * math.sqrt(var / samples)
    h = -sum(c / samples * math.log(c / samples) for c in finals.values())
    return {
        "n": n,
        "samples": samples,
        "mean_distance": mean,
        "drift": mean / n,
        "drift_ci": [(mean - half) / n, (mean + half) / n],
        "drift_se": math.sqrt(var / samples) / n,
        "entropy_rate_bound": h / n,
    }


def decay_test(m: StepMeasure, samples: int, seed, n_short: int = 25, n_long: int = 100) -> dict:
    """Whether drift at ``n_long`` falls below half the drift at ``n_short``."""
    a = entropy_drift_estimate(m, n_short, samples, seed, stream=f"decay/{n_short}")
    b = entropy_drift_estimate(m, n_long, samples, seed, stream=f"decay/{n_long}")
    ratio = b["drift"] / a["drift"] if a["drift"] else float("inf")
    se = ratio * math.hypot(a["drift_se"] / a["drift"], b["drift_se"] / b["drift"]) if a["drift"] and b["drift"] else 0.0
    return {"short": a, "long": b, "ratio": ratio, "ratio_se": se, "passed": b["drift"] < a["drift"] / 2}


# first returns ---------------------------------------------------------------------


def perm_mul(p: tuple, q: tuple) -> tuple:
    """Apply ``p`` then ``q``."""
    return tuple(q[i] for i in p)


def perm_inv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


@dataclass
class PermQuotient:
    """Homomorphism to a permutation group given by images of the step factors."""

    images: dict  # element -> permutation tuple
    degree: int

    @property
    def identity(self) -> tuple:
        return tuple(range(self.degree))

    def image(self, g) -> tuple:
        try:
            return self.images[g]
        except KeyError:
            raise ValidationError(f"no permutation image for {g}") from None


def cyclic_quotient(elements, value, modulus: int) -> PermQuotient:
    """Quotient to ``Z/modulus`` acting on itself, with ``g -> value(g)``."""
    imgs = {}
    for g in elements:
        s = value(g) % modulus
        imgs[g] = tuple((i + s) % modulus for i in range(modulus))
    return PermQuotient(imgs, modulus)


def trivial_quotient(elements) -> PermQuotient:
    return PermQuotient({g: (0,) for g in elements}, 1)


def _factor_elements(m: StepMeasure) -> list:
    out = [g for g, _ in m.core]
    if m.tail is not None:
        out += [g for g in m.tail.generators if g not in out]
    return out


def check_quotient(m: StepMeasure, quot: PermQuotient, samples: int = 2000, max_len: int = 6, seed=0) -> None:
    """Relation check on sampled words: equal group elements must have equal images."""
    group = m.group
    elems = _factor_elements(m)
    for g in elems:
        p = quot.image(g)
        if sorted(p) != list(range(quot.degree)):
            raise ValidationError(f"image of {g} is not a permutation of degree {quot.degree}")
    seen = {group.identity(): quot.identity}
    for g in elems:
        if seen.setdefault(g, quot.image(g)) != quot.image(g):
            raise ValidationError(f"relation check failed: {g} has two images")
    rng = stream_rng(seed, "relators", 0)
    for _ in range(samples):
        x, p = group.identity(), quot.identity
        for _ in range(rng.randint(1, max_len)):
            g = elems[rng.randrange(len(elems))]
            x, p = group.mul(x, g), perm_mul(p, quot.image(g))
            q = seen.setdefault(x, p)
            if q != p:
                raise ValidationError(f"relation check failed: {x} maps to {q} and {p}")


@dataclass
class FirstReturnSample:
    elements: list
    times: list

    def law(self) -> dict:
        c = Counter(self.elements)
        n = len(self.elements)
        return {g: Fraction(k, n) for g, k in c.items()}


def first_return_walk(m: StepMeasure, quot: PermQuotient, n_returns: int, seed, max_steps: int = 10**6,
                      check: bool = True) -> FirstReturnSample:
    """Positions of first return to the kernel, over ``n_returns`` independent walks."""
    if check:
        check_quotient(m, quot, seed=seed)
    group = m.group
    elements, times = [], []
    ident = quot.identity
    for i in range(n_returns):
        rng = stream_rng(seed, "return", i)
        x, p = group.identity(), ident
        for k in range(1, max_steps + 1):
            for h in draw_factors(m, rng):
                x = group.mul(x, h)
                p = perm_mul(p, quot.image(h))
            if p == ident:
                elements.append(x)
                times.append(k)
                break
        else:
            raise DomainError(f"walk {i} did not return within {max_steps} steps")
    return FirstReturnSample(elements, times)


def first_return_law(m: StepMeasure, quot: PermQuotient, max_len: int) -> tuple:
    """Exact induced law from all paths that return within ``max_len`` steps.

    Returns ``(law, leftover)``, where ``leftover`` is the mass of paths not
    yet returned.  Only finite-support measures are enumerable.
    """
    if m.tail is not None:
        raise DomainError("exact enumeration needs a finite-support measure")
    group = m.group
    law = Counter()
    ident = quot.identity
    front = {(group.identity(), ident): Fraction(1)}
    for _ in range(max_len):
        nxt = Counter()
        for (x, p), w in front.items():
            for g, wg in m.core:
                y, pq = group.mul(x, g), perm_mul(p, quot.image(g))
                if pq == ident:
                    law[y] += w * wg
                else:
                    nxt[(y, pq)] += w * wg
        front = nxt
        if not front:
            break
    return dict(law), sum(front.values(), Fraction(0))
