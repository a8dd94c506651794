"""Random small instances and formulas for differential testing."""
from __future__ import annotations

import math
import random

from strel import logic as L
from strel.logic import DistancePredicate
from strel.signal import PiecewiseSignal, Trace
from strel.space import LocationService, SpatialModel, build_euclidean

CHANNELS = ("p", "q", "x", "y")
KINDS = ("bool", "bool", "float", "float")


def random_model(rng: random.Random, n: int, kind: str) -> SpatialModel:
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b and rng.random() < 0.35]
    if kind == "vec2":
        pos = [(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(n)]
        return build_euclidean(pos, pairs)
    return SpatialModel(n, [(a, float(rng.randint(1, 3)), b) for a, b in pairs])


def random_instance(rng: random.Random, max_n: int = 7, max_breaks: int = 5):
    n = rng.randint(1, max_n)
    horizon = float(rng.randint(3, 8))
    kind = rng.choice(["scalar", "vec2"])
    snaps = [0.0]
    if rng.random() < 0.4:
        snaps.append(float(rng.randint(1, int(horizon) - 1)))
    service = LocationService(snaps, [random_model(rng, n, kind) for _ in snaps])
    signals = []
    for _ in range(n):
        k = rng.randint(1, max_breaks)
        times = sorted({0.0} | {float(rng.randint(1, int(horizon) - 1)) for _ in range(k - 1)})
        vecs = [(rng.random() < 0.5, rng.random() < 0.5, float(rng.randint(-4, 4)), rng.randint(-8, 8) / 2)
                for _ in times]
        signals.append(PiecewiseSignal(times, vecs, horizon).normalized())
    return service, Trace(CHANNELS, KINDS, signals), kind


def _upper(rng):
    bound = rng.choice([0.0, 1.0, 2.0, 3.0, 4.5, math.inf])
    return DistancePredicate(rng.choice(["<=", "<"]), bound)


def _lower(rng):
    return DistancePredicate(rng.choice([">=", ">"]), rng.choice([0.0, 1.0, 2.0, 3.0]))


def _interval(rng, budget):
    a = rng.randint(0, min(2, budget))
    return float(a), float(a + rng.randint(0, 3))


def random_formula(rng: random.Random, depth: int, n: int, dists, budget: int, ops=None):
    """Formula of at most ``depth`` levels whose future offsets sum to at most ``budget``."""
    leaves = ["true", "p", "q", "x", "y", "@"]
    if depth <= 1:
        leaf = rng.choice(leaves)
        if leaf == "true":
            return L.TrueF()
        if leaf in ("p", "q"):
            return L.Atomic(leaf)
        if leaf == "@":
            return L.At(rng.randrange(n))
        return L.Cmp(leaf, rng.choice(["<", "<=", ">", ">="]), float(rng.randint(-3, 3)))
    ops = ops or ["not", "and", "or", "U", "S", "F", "G", "O", "H",
                  "reach", "escape", "somewhere", "everywhere", "surround"]
    op = rng.choice(ops)

    def sub(b=budget):
        return random_formula(rng, depth - 1, n, dists, b, ops)

    if op == "not":
        return L.Not(sub())
    if op in ("and", "or"):
        return (L.And if op == "and" else L.Or)(sub(), sub())
    if op in ("U", "F"):
        a, b = _interval(rng, budget)
        rest = budget - int(a)
        return L.Until(sub(rest), a, b, sub(rest)) if op == "U" else L.Eventually(a, b, sub(rest))
    if op == "G":
        a, b = _interval(rng, budget)
        return L.Globally(a, b, sub(budget - int(a)))
    if op in ("S", "O", "H"):
        a, b = float(rng.randint(0, 2)), None
        b = a + rng.randint(0, 3)
        if op == "S":
            return L.Since(sub(), a, b, sub())
        return (L.Once if op == "O" else L.Historically)(a, b, sub())
    dist = rng.choice(dists)
    if op == "reach":
        return L.Reach(dist, _upper(rng), sub(), sub())
    if op == "surround":
        return L.Surround(dist, _upper(rng), sub(), sub())
    if op == "escape":
        return L.Escape(dist, _lower(rng), sub())
    return (L.Somewhere if op == "somewhere" else L.Everywhere)(dist, _upper(rng), sub())


def distances_for(kind: str):
    return ["hops", "euclid"] if kind == "vec2" else ["hops", "weight"]


def corpus(seed: int, count: int, max_depth: int = 4, ops=None):
    """``count`` (service, trace, formula) triples from one seed."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        service, trace, kind = random_instance(rng)
        budget = int(trace.horizon) - 1
        phi = random_formula(rng, rng.randint(1, max_depth), trace.n, distances_for(kind), budget, ops)
        out.append((service, trace, phi))
    return out


def same_signal(a, b, tol: float = 0.0) -> bool:
    """Equal horizons and values at every breakpoint of either signal."""
    if a.horizon != b.horizon or a.n != b.n:
        return False
    for sa, sb in zip(a, b):
        for t in sorted(set(sa.times) | set(sb.times)):
            x, y = sa.value_at(t), sb.value_at(t)
            if x == y:
                continue
            if tol == 0.0 or isinstance(x, bool) or abs(x - y) > tol:
                return False
    return True
