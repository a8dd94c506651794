"""Fixtures and generators: the 16-node ZigBee graph, MANET traces, property library."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .signal import PiecewiseSignal, Trace
from .space import LocationService, SpatialModel, build_euclidean

# ----------------------------------------------------------------------------
# ZigBee fixture (location id = figure label - 1)

ZIGBEE_EDGES = [
    (1, 8), (2, 7), (8, 6), (8, 7), (7, 10), (7, 5), (3, 10), (6, 5), (10, 11),
    (10, 9), (11, 15), (11, 12), (9, 14), (10, 14), (10, 16), (11, 16), (13, 16), (8, 4),
]
ZIGBEE_ROLES = {
    "coord": {10},
    "router": {5, 7, 8, 9, 11, 16},
    "end_dev": {1, 2, 3, 4, 6, 12, 13, 14, 15},
}
ROLE_CHANNELS = ("coord", "router", "end_dev")


def zigbee_loc(label: int) -> int:
    """Location id of the node labelled ``label`` (1..16) in the figure."""
    if not 1 <= label <= 16:
        raise ValueError(f"no ZigBee node labelled {label}")
    return label - 1


def zigbee_model() -> SpatialModel:
    edges = [(a - 1, 1.0, b - 1) for a, b in ZIGBEE_EDGES]
    return SpatialModel.undirected(16, edges)


def zigbee_fixture(extra: dict[str, list] | None = None, horizon: float = 1.0) -> tuple[LocationService, Trace]:
    """Static 16-node network with Boolean role channels ``coord``, ``router``, ``end_dev``.

    ``extra`` adds constant channels, one value per location (in id order).
    """
    channels = list(ROLE_CHANNELS)
    kinds = ["bool"] * 3
    extra = extra or {}
    for name, vals in extra.items():
        if len(vals) != 16:
            raise ValueError(f"channel {name!r} needs 16 values")
        channels.append(name)
        kinds.append("bool" if all(isinstance(v, bool) for v in vals) else "float")
    signals = []
    for loc in range(16):
        label = loc + 1
        vec = [label in ZIGBEE_ROLES[r] for r in ROLE_CHANNELS]
        vec += [v if isinstance(v, bool) else float(v) for v in (vals[loc] for vals in extra.values())]
        signals.append(PiecewiseSignal([0.0], [tuple(vec)], horizon))
    return LocationService.static(zigbee_model()), Trace(channels, kinds, signals)


# ----------------------------------------------------------------------------
# Delaunay triangulation (Bowyer-Watson)

def _circumcircle(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return ux, uy, (ax - ux) ** 2 + (ay - uy) ** 2


def in_circumcircle(p, a, b, c, rel_tol: float = 1e-9) -> bool:
    """Strictly inside the circle through ``a, b, c`` (beyond a relative tolerance)."""
    cc = _circumcircle(a, b, c)
    if cc is None:
        return False
    ux, uy, r2 = cc
    d2 = (p[0] - ux) ** 2 + (p[1] - uy) ** 2
    return d2 < r2 * (1.0 - rel_tol)


def _convex_hull(points, order):
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for i in order:
        while len(lower) >= 2 and cross(points[lower[-2]], points[lower[-1]], points[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(order):
        while len(upper) >= 2 and cross(points[upper[-2]], points[upper[-1]], points[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def delaunay_edges(points) -> set[tuple[int, int]]:
    """Undirected edges ``(i, j)``, ``i < j``, of the Delaunay triangulation.

    Points are inserted in lexicographic order, so cocircular ties resolve
    deterministically. Fully collinear inputs give the chain of neighbours.
    """
    pts = [(float(x), float(y)) for x, y in points]
    n = len(pts)
    order = sorted(range(n), key=lambda i: pts[i])
    if n < 2:
        return set()
    hull = _convex_hull(pts, order)
    if len(hull) < 3:
        return {tuple(sorted((order[k], order[k + 1]))) for k in range(n - 1)}
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0) * 1e3
    sup = [(cx - 2 * span, cy - span), (cx + 2 * span, cy - span), (cx, cy + 2 * span)]
    allp = pts + sup
    tris = {(n, n + 1, n + 2)}
    for i in order:
        p = allp[i]
        bad = [t for t in tris if in_circumcircle(p, allp[t[0]], allp[t[1]], allp[t[2]])]
        if not bad:
            # on a circumcircle boundary: split the containing triangle instead
            bad = [t for t in tris if _contains(allp, t, p)][:1]
        count: dict[tuple[int, int], int] = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                e = tuple(sorted(e))
                count[e] = count.get(e, 0) + 1
        for t in bad:
            tris.discard(t)
        for (u, v), c in count.items():
            if c == 1:
                tris.add(tuple(sorted((u, v, i))))
    edges = set()
    for t in tris:
        if max(t) >= n:
            continue
        for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
            edges.add(tuple(sorted(e)))
    for k in range(len(hull)):
        edges.add(tuple(sorted((hull[k], hull[(k + 1) % len(hull)]))))
    return edges


def _contains(allp, t, p) -> bool:
    a, b, c = (allp[i] for i in t)

    def side(o, q):
        return (q[0] - o[0]) * (p[1] - o[1]) - (q[1] - o[1]) * (p[0] - o[0])

    s1, s2, s3 = side(a, b), side(b, c), side(c, a)
    neg = s1 < 0 or s2 < 0 or s3 < 0
    pos = s1 > 0 or s2 > 0 or s3 > 0
    return not (neg and pos)


def delaunay_oracle_edges(points) -> set[tuple[int, int]]:
    """Edges of every triangle whose circumcircle holds no other point (O(n^4))."""
    pts = [(float(x), float(y)) for x, y in points]
    edges = set()
    for i, j, k in combinations(range(len(pts)), 3):
        if _circumcircle(pts[i], pts[j], pts[k]) is None:
            continue
        if any(in_circumcircle(pts[m], pts[i], pts[j], pts[k]) for m in range(len(pts)) if m not in (i, j, k)):
            continue
        edges.update({(i, j), (j, k), (i, k)})
    return edges


def radius_edges(points, radius: float) -> set[tuple[int, int]]:
    pts = np.asarray(points, dtype=float)
    out = set()
    for i, j in combinations(range(len(pts)), 2):
        if math.hypot(*(pts[j] - pts[i])) <= radius:
            out.add((i, j))
    return out


# ----------------------------------------------------------------------------
# MANET generator

MANET_CHANNELS = ("coord", "router", "end_dev", "X_B", "X_H", "X_P", "X_S")
MANET_KINDS = ("bool", "bool", "bool", "float", "float", "float", "float")


@dataclass
class ManetConfig:
    nodes: int = 20
    steps: int = 10
    dt: float = 1.0
    arena: float = 10.0
    walk_sigma: float = 0.3
    radius: float = 2.5
    graph: str = "radius"
    router_fraction: float = 0.4
    targets: int = 1
    seed: int = 0
    battery_drain: float = 2.0
    sensor_sigma: float = 15.0
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("nodes", "steps", "dt", "arena", "walk_sigma", "radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.graph not in ("radius", "delaunay"):
            raise ValueError(f"graph kind must be 'radius' or 'delaunay', got {self.graph!r}")
        if not 0 <= self.router_fraction <= 1:
            raise ValueError("router_fraction must lie in [0, 1]")
        if self.nodes < 1:
            raise ValueError("at least one node (the coordinator) is required")
        if not 0 <= self.targets <= self.nodes:
            raise ValueError("targets must lie in [0, nodes]")


def _reflect(x, hi):
    period = 2.0 * hi
    x = np.mod(x, period)
    return np.where(x > hi, period - x, x)


def manet_positions(config: ManetConfig) -> np.ndarray:
    """Positions of shape ``(steps, nodes, 2)`` from a reflected Gaussian random walk."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    pos = np.empty((config.steps, config.nodes, 2))
    pos[0] = rng.uniform(0.0, config.arena, size=(config.nodes, 2))
    for k in range(1, config.steps):
        pos[k] = _reflect(pos[k - 1] + rng.normal(0.0, config.walk_sigma, size=(config.nodes, 2)), config.arena)
    return pos


def manet_generate(config: ManetConfig) -> tuple[LocationService, Trace]:
    """Mobile network trace: one spatial snapshot and one channel vector per step.

    Deterministic for a fixed seed. Exactly one coordinator; a
    ``router_fraction`` share of the rest are routers, the others end devices.
    Battery ``X_B`` (%) drains in [0, 100]; humidity ``X_H`` and pollution
    ``X_P`` wander in [0, 200]; ``X_S`` flags target devices with 1.
    """
    pos = manet_positions(config)
    n, k = config.nodes, config.steps
    rng = np.random.default_rng([config.seed, 1])
    perm = rng.permutation(n)
    coord = int(perm[0])
    n_routers = int(round(config.router_fraction * (n - 1)))
    routers = {int(i) for i in perm[1:1 + n_routers]}
    targets = {int(i) for i in rng.permutation(n)[:config.targets]}

    battery = np.empty((k, n))
    humid = np.empty((k, n))
    pollut = np.empty((k, n))
    battery[0] = rng.uniform(40.0, 100.0, n)
    humid[0] = rng.uniform(40.0, 160.0, n)
    pollut[0] = rng.uniform(40.0, 160.0, n)
    for s in range(1, k):
        battery[s] = np.clip(battery[s - 1] - rng.exponential(config.battery_drain, n), 0.0, 100.0)
        humid[s] = np.clip(humid[s - 1] + rng.normal(0.0, config.sensor_sigma, n), 0.0, 200.0)
        pollut[s] = np.clip(pollut[s - 1] + rng.normal(0.0, config.sensor_sigma, n), 0.0, 200.0)

    times = [s * config.dt for s in range(k)]
    models = []
    for s in range(k):
        pts = pos[s]
        if config.graph == "radius":
            pairs = radius_edges(pts, config.radius)
        else:
            pairs = delaunay_edges(pts)
        relation = [(i, j) for i, j in pairs] + [(j, i) for i, j in pairs]
        models.append(build_euclidean([tuple(p) for p in pts], relation))
    service = LocationService(times, models)

    signals = []
    for loc in range(n):
        role = (loc == coord, loc in routers, loc != coord and loc not in routers)
        vecs = [role + (float(battery[s, loc]), float(humid[s, loc]), float(pollut[s, loc]),
                        1.0 if loc in targets else 0.0) for s in range(k)]
        signals.append(PiecewiseSignal(times, vecs, k * config.dt).normalized())
    return service, Trace(MANET_CHANNELS, MANET_KINDS, signals)


# ----------------------------------------------------------------------------
# property library

def phi_cycle(loc: int) -> str:
    return f"@{loc} reach(hops)[<= 1] (!@{loc} & somewhere(hops)[< infinity] @{loc})"


def phi_acyclic(loc: int) -> str:
    return f"!({phi_cycle(loc)})"


def property_library(horizon: float = 5.0, restore: float = 2.0, escape_dist: float = 2.0,
                     safe_dist: float = 5.0, loc: int = 0) -> dict[str, str]:
    """The MANET requirements as formula text.

    ``horizon`` bounds the temporal operators of the pollution/humidity and
    safety properties, ``restore`` is the reconnection deadline,
    ``escape_dist`` the minimum length of a safe route, ``safe_dist`` the
    radius searched for a safe node, ``loc`` the node checked for cycles.
    """
    connect = "end_dev reach(hops)[<= 1] (router reach(hops)[< infinity] coord)"
    reliable_router = "((X_B > 30) & router) reach(hops)[< infinity] coord"
    safe = f"G[0, {horizon}] escape(euclid)[>= {escape_dist}] ((X_H < 90) & (X_P < 150))"
    return {
        "phi_connect": connect,
        "phi_reliable_router": reliable_router,
        "phi_reliable_connect": f"end_dev reach(hops)[<= 1] ({reliable_router})",
        "phi_connect_restore": f"G[0, {horizon}] (!({connect}) | F[0, {restore}] ({connect}))",
        "phi_cycle": phi_cycle(loc),
        "phi_acyclic": phi_acyclic(loc),
        "phi_PH": f"!(X_P > 150) | F[0, {horizon}] (X_H > 100)",
        "phi_Safe": safe,
        "phi_some": f"somewhere(euclid)[<= {safe_dist}] ({safe})",
        "phi_target": "everywhere(hops)[< infinity] somewhere(hops)[< 10] X_S >= 1",
    }
