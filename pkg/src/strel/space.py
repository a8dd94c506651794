"""Spatial models, routes, distances and location services."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .semiring import SemiringDescriptor, tropical_semiring

WEIGHT_KINDS = ("scalar", "vec2")


class SpaceError(ValueError):
    """Raised for malformed spatial models, routes or location services."""


class SpatialModel:
    """Directed weighted graph over the locations ``0..n-1``.

    At most one weight is stored per ordered pair of locations.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, Any, int]] = (), weight_kind: str = "scalar"):
        if n < 0:
            raise SpaceError("number of locations must be non-negative")
        if weight_kind not in WEIGHT_KINDS:
            raise SpaceError(f"unknown weight kind {weight_kind!r}")
        self.n = n
        self.weight_kind = weight_kind
        weights: dict[tuple[int, int], Any] = {}
        for src, w, dst in edges:
            for loc in (src, dst):
                if not (isinstance(loc, int) and 0 <= loc < n):
                    raise SpaceError(f"edge ({src}, {dst}) references unknown location {loc}")
            if (src, dst) in weights:
                raise SpaceError(
                    f"duplicate edge {src}->{dst}: a pair of locations carries at most one label"
                )
            weights[(src, dst)] = _check_weight(w, weight_kind)
        self._weights = weights
        out: list[list[tuple[int, Any]]] = [[] for _ in range(n)]
        for (src, dst), w in sorted(weights.items()):
            out[src].append((dst, w))
        self._out = tuple(tuple(row) for row in out)

    @classmethod
    def undirected(cls, n: int, edges: Iterable[tuple[int, Any, int]], weight_kind: str = "scalar"):
        """Store each undirected edge as two directed ones.

        Scalar weights are copied; vector weights are negated on the reverse edge.
        """
        both = []
        for src, w, dst in edges:
            both.append((src, w, dst))
            if weight_kind == "vec2":
                both.append((dst, (-w[0], -w[1]), src))
            else:
                both.append((dst, w, src))
        return cls(n, both, weight_kind)

    @property
    def locations(self) -> range:
        return range(self.n)

    @property
    def edges(self) -> list[tuple[int, Any, int]]:
        return [(s, w, d) for (s, d), w in sorted(self._weights.items())]

    def num_edges(self) -> int:
        return len(self._weights)

    def successors(self, loc: int) -> tuple[tuple[int, Any], ...]:
        return self._out[loc]

    def weight(self, src: int, dst: int):
        return self._weights.get((src, dst))

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._weights

    def __eq__(self, other):
        if not isinstance(other, SpatialModel):
            return NotImplemented
        return (self.n, self.weight_kind, self._weights) == (other.n, other.weight_kind, other._weights)

    def __hash__(self):
        return hash((self.n, self.weight_kind, tuple(sorted(self._weights.items()))))

    def __repr__(self):
        return f"SpatialModel(n={self.n}, edges={self.num_edges()}, weight_kind={self.weight_kind!r})"


def _check_weight(w, kind):
    if kind == "vec2":
        try:
            x, y = w
        except (TypeError, ValueError):
            raise SpaceError(f"vec2 weight must be a pair, got {w!r}") from None
        x, y = float(x), float(y)
        if math.isnan(x) or math.isnan(y):
            raise SpaceError("NaN edge weight")
        return (x, y)
    if isinstance(w, bool) or not isinstance(w, (int, float)):
        raise SpaceError(f"scalar weight must be a number, got {w!r}")
    w = float(w)
    if math.isnan(w):
        raise SpaceError("NaN edge weight")
    return w


@dataclass(frozen=True)
class DistanceFunction:
    """Monotone accumulation of edge weights into a distance.

    ``direction`` is ``"down"`` when ``accumulate(b, a)`` is never above ``b``
    in the order of ``semiring`` (every extra edge makes the distance worse),
    ``"up"`` for the opposite.
    """

    name: str
    accumulate: Callable[[Any, Any], Any]
    zero: Any
    semiring: SemiringDescriptor
    direction: str = "down"
    # additive form ``accumulate(b, a) == b + edge_cost(a)``, when it exists
    edge_cost: Callable[[Any], float] | None = None


def _hops(v, w):
    return v + 1


def _delta(v, w):
    if isinstance(w, tuple):
        return v + math.hypot(w[0], w[1])
    return v + abs(w)


def _weight_sum(v, w):
    if isinstance(w, tuple):
        raise SpaceError("the 'weight' distance needs scalar edge weights")
    if w < 0:
        raise SpaceError(f"negative edge weight {w} breaks distance monotonicity")
    return v + w


def _one(w):
    return 1.0


def _norm(w):
    return _delta(0.0, w)


def _scalar(w):
    return _weight_sum(0.0, w)


HOPS = DistanceFunction("hops", _hops, 0, tropical_semiring(), edge_cost=_one)
EUCLID = DistanceFunction("euclid", _delta, 0.0, tropical_semiring(), edge_cost=_norm)
WEIGHT = DistanceFunction("weight", _weight_sum, 0.0, tropical_semiring(), edge_cost=_scalar)

DISTANCE_FUNCTIONS = {"hops": HOPS, "euclid": EUCLID, "weight": WEIGHT}


def default_distance_functions() -> dict[str, DistanceFunction]:
    return dict(DISTANCE_FUNCTIONS)


def check_route(model: SpatialModel, route: Sequence[int]) -> None:
    if not route:
        raise SpaceError("a route needs at least one location")
    for loc in route:
        if not 0 <= loc < model.n:
            raise SpaceError(f"route visits unknown location {loc}")
    for a, b in zip(route, route[1:]):
        if not model.has_edge(a, b):
            raise SpaceError(f"route uses missing edge {a}->{b}")


def first_occurrence(route: Sequence[int], loc: int) -> float:
    """Index of the first visit of ``loc``; infinity when it is never visited."""
    try:
        return route.index(loc)
    except ValueError:
        return math.inf


def route_distance(model: SpatialModel, route: Sequence[int], df: DistanceFunction, index: int | None = None):
    """Distance accumulated along ``route`` up to ``index`` (default: its end).

    Weights are folded from the far end towards the start, so the first edge
    is applied last; the fixpoint monitors accumulate in the same order.
    """
    check_route(model, route)
    if index is None:
        index = len(route) - 1
    if not 0 <= index < len(route):
        raise SpaceError(f"index {index} outside route of length {len(route)}")
    d = df.zero
    for i in range(index, 0, -1):
        d = df.accumulate(d, model.weight(route[i - 1], route[i]))
    return d


def distances_to(model: SpatialModel, df: DistanceFunction, target: int) -> tuple[list, int]:
    """Distance from every location to ``target`` plus the relaxation count.

    Bellman-Ford style: relax every edge until nothing changes. Unreachable
    locations keep the bottom of the distance semiring.
    """
    sr = df.semiring
    dist = [sr.bottom] * model.n
    dist[target] = df.zero
    edges = [(s, w, d) for s, w, d in model.edges if s != target]
    relaxations = 0
    for _ in range(model.n + 1):
        changed = False
        for src, w, dst in edges:
            relaxations += 1
            if dist[dst] == sr.bottom:
                continue
            cand = sr.choose(dist[src], df.accumulate(dist[dst], w))
            if cand != dist[src]:
                dist[src] = cand
                changed = True
        if not changed:
            return dist, relaxations
    raise SpaceError(f"distance {df.name!r} does not converge (non-monotone accumulation?)")


def pairwise_distance(model: SpatialModel, df: DistanceFunction, source: int, target: int):
    """Choose among the distances of all routes from ``source`` to ``target``."""
    for loc in (source, target):
        if not 0 <= loc < model.n:
            raise SpaceError(f"unknown location {loc}")
    return distances_to(model, df, target)[0][source]


@dataclass(frozen=True)
class EuclideanModel:
    """Locations placed in the plane plus the pairs that are connected."""

    positions: tuple[tuple[float, float], ...]
    relation: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        pos = tuple((float(x), float(y)) for x, y in self.positions)
        for x, y in pos:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise SpaceError("positions must be finite")
        object.__setattr__(self, "positions", pos)
        rel = frozenset((int(a), int(b)) for a, b in self.relation)
        for a, b in rel:
            if not (0 <= a < len(pos) and 0 <= b < len(pos)):
                raise SpaceError(f"relation pair ({a}, {b}) references unknown location")
        object.__setattr__(self, "relation", rel)

    def to_spatial_model(self) -> SpatialModel:
        edges = []
        for a, b in sorted(self.relation):
            if a == b:
                continue
            (x1, y1), (x2, y2) = self.positions[a], self.positions[b]
            edges.append((a, (x2 - x1, y2 - y1), b))
        return SpatialModel(len(self.positions), edges, "vec2")


def build_euclidean(positions: Sequence[tuple[float, float]] | Mapping[int, tuple[float, float]],
                    relation: Iterable[tuple[int, int]]) -> SpatialModel:
    """Spatial model whose weights are the displacement vectors between positions.

    Self pairs in ``relation`` are skipped: the empty route already covers them.
    """
    if isinstance(positions, Mapping):
        n = max(positions) + 1 if positions else 0
        if sorted(positions) != list(range(n)):
            raise SpaceError("positions must cover locations 0..n-1")
        positions = [positions[i] for i in range(n)]
    return EuclideanModel(tuple(positions), frozenset(relation)).to_spatial_model()


def apply_isometry(model: EuclideanModel, angle: float, translation=(0.0, 0.0), reflect: bool = False) -> EuclideanModel:
    """Move all positions by a rigid motion of the plane (optionally mirrored)."""
    c, s = math.cos(angle), math.sin(angle)
    tx, ty = translation
    moved = []
    for x, y in model.positions:
        if reflect:
            y = -y
        moved.append((c * x - s * y + tx, s * x + c * y + ty))
    return EuclideanModel(tuple(moved), model.relation)


class LocationService:
    """Piecewise-constant assignment of spatial models to times."""

    def __init__(self, breakpoints: Sequence[float], models: Sequence[SpatialModel]):
        if len(breakpoints) != len(models) or not models:
            raise SpaceError("a location service needs one model per breakpoint and at least one model")
        for a, b in zip(breakpoints, breakpoints[1:]):
            if not a < b:
                raise SpaceError(f"location service breakpoints must increase strictly ({a} then {b})")
        n = models[0].n
        for t, m in zip(breakpoints, models):
            if m.n != n:
                raise SpaceError(f"model at t={t} has {m.n} locations, expected {n}")
        self.breakpoints = tuple(float(t) for t in breakpoints)
        self.models = tuple(models)

    @classmethod
    def static(cls, model: SpatialModel, t0: float = 0.0) -> "LocationService":
        return cls([t0], [model])

    @property
    def n(self) -> int:
        return self.models[0].n

    def model_at(self, t: float) -> SpatialModel:
        i = bisect_right(self.breakpoints, t) - 1
        if i < 0:
            raise SpaceError(f"time {t} precedes the first snapshot at {self.breakpoints[0]}")
        return self.models[i]

    def __eq__(self, other):
        if not isinstance(other, LocationService):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.models == other.models

    def __repr__(self):
        return f"LocationService(n={self.n}, snapshots={len(self.models)})"


def model_at(service: LocationService, t: float) -> SpatialModel:
    return service.model_at(t)
