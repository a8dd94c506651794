import math
import random
from collections import deque

import pytest

from strel.oracle import simple_paths
from strel.scenarios import zigbee_loc, zigbee_model
from strel.space import (EUCLID, HOPS, WEIGHT, EuclideanModel, LocationService, SpaceError, SpatialModel,
                         apply_isometry, build_euclidean, distances_to, first_occurrence, model_at,
                         pairwise_distance, route_distance)


def bfs(model, src, dst):
    seen = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, _ in model.successors(u):
            if v not in seen:
                seen[v] = seen[u] + 1
                queue.append(v)
    return seen.get(dst, math.inf)


def random_graph(rng, n, p=0.3, weights=False):
    edges = [(a, float(rng.randint(1, 5)) if weights else 1.0, b)
             for a in range(n) for b in range(n) if a != b and rng.random() < p]
    return SpatialModel(n, edges)


def random_route(rng, model, length):
    route = [rng.randrange(model.n)]
    for _ in range(length):
        succ = model.successors(route[-1])
        if not succ:
            break
        route.append(rng.choice(succ)[0])
    return route


def test_duplicate_edge_rejected():
    with pytest.raises(SpaceError, match="at most one label"):
        SpatialModel(2, [(0, 1.0, 1), (0, 2.0, 1)])


def test_invalid_endpoint_and_nan_rejected():
    with pytest.raises(SpaceError, match="unknown location"):
        SpatialModel(2, [(0, 1.0, 2)])
    with pytest.raises(SpaceError, match="NaN"):
        SpatialModel(2, [(0, math.nan, 1)])


def test_undirected_vec2_reverses_weight():
    m = SpatialModel.undirected(2, [(0, (3.0, 4.0), 1)], "vec2")
    assert m.weight(1, 0) == (-3.0, -4.0)


def test_hops_route_example():
    m = zigbee_model()
    route = [zigbee_loc(6), zigbee_loc(5)]
    assert route_distance(m, route, HOPS, 1) == 1
    assert route_distance(m, route, HOPS, 0) == 0


def test_hops_index_law_on_random_routes():
    rng = random.Random(7)
    for _ in range(100):
        m = random_graph(rng, 8, 0.4)
        r = random_route(rng, m, 10)
        for i in range(len(r)):
            assert route_distance(m, r, HOPS, i) == i


def test_euclid_two_edge_route():
    m = build_euclidean([(0, 0), (3, 4), (3, 9)], [(0, 1), (1, 2)])
    assert route_distance(m, [0, 1, 2], EUCLID) == 10.0
    assert pairwise_distance(m, EUCLID, 0, 2) == 10.0


def test_invalid_route_rejected():
    m = SpatialModel(3, [(0, 1.0, 1)])
    with pytest.raises(SpaceError, match="missing edge"):
        route_distance(m, [0, 2], HOPS)


def test_first_occurrence():
    assert first_occurrence([3, 1, 3], 3) == 0
    assert first_occurrence([3, 1], 5) == math.inf


def test_zigbee_pairwise_example():
    m = zigbee_model()
    assert pairwise_distance(m, HOPS, zigbee_loc(10), zigbee_loc(8)) == 2
    assert pairwise_distance(m, HOPS, zigbee_loc(10), zigbee_loc(10)) == 0


def test_unreachable_distance_is_bottom():
    m = SpatialModel(2)
    assert pairwise_distance(m, HOPS, 0, 1) == math.inf


def test_hops_matches_bfs():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(1, 12)
        m = random_graph(rng, n, rng.uniform(0.05, 0.5))
        for a in range(n):
            b = rng.randrange(n)
            assert pairwise_distance(m, HOPS, a, b) == bfs(m, a, b)


def test_pairwise_is_minimal_over_simple_paths():
    rng = random.Random(12)
    for _ in range(60):
        n = rng.randint(2, 7)
        m = random_graph(rng, n, 0.4, weights=True)
        for a in range(n):
            dist = distances_to(m, WEIGHT, a)[0]
            for src in range(n):
                best = min((route_distance(m, p, WEIGHT) for p in simple_paths(m, src) if p[-1] == a),
                           default=math.inf)
                assert dist[src] == best


def test_relaxation_bound():
    rng = random.Random(13)
    for _ in range(100):
        n = rng.randint(1, 10)
        m = random_graph(rng, n, 0.3, weights=True)
        _, relax = distances_to(m, WEIGHT, rng.randrange(n))
        assert relax <= n * m.num_edges()


def test_build_euclidean_weights():
    m = build_euclidean({0: (0, 0), 1: (3, 4)}, [(0, 1), (1, 0)])
    assert m.weight(0, 1) == (3.0, 4.0)
    assert m.weight(1, 0) == (-3.0, -4.0)
    assert math.hypot(*m.weight(0, 1)) == 5.0


def test_build_euclidean_unknown_location():
    with pytest.raises(SpaceError):
        build_euclidean([(0, 0)], [(0, 3)])


def test_collinear_chain_distance():
    xs = [0.0, 0.5, 1.75, 4.0, 4.25]
    m = build_euclidean([(x, 2 * x) for x in xs], [(i, i + 1) for i in range(4)])
    straight = math.hypot(xs[-1] - xs[0], 2 * (xs[-1] - xs[0]))
    assert pairwise_distance(m, EUCLID, 0, 4) == pytest.approx(straight, abs=1e-12)


def test_isometry_examples():
    e = EuclideanModel(((1.0, 0.0), (2.0, 3.0)), frozenset({(0, 1)}))
    assert apply_isometry(e, 0.0) == e
    rot = apply_isometry(e, math.pi / 2)
    assert rot.positions[0] == pytest.approx((0.0, 1.0), abs=1e-12)
    assert rot.relation == e.relation


def test_isometry_preserves_norms_and_distances():
    rng = random.Random(17)
    for _ in range(100):
        n = rng.randint(2, 10)
        pos = tuple((rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(n))
        rel = frozenset((a, b) for a in range(n) for b in range(n) if a != b and rng.random() < 0.4)
        e = EuclideanModel(pos, rel)
        moved = apply_isometry(e, rng.uniform(0, 2 * math.pi), (rng.uniform(-9, 9), rng.uniform(-9, 9)),
                               rng.random() < 0.5)
        m1, m2 = e.to_spatial_model(), moved.to_spatial_model()
        for (s, w, d), (_, w2, _) in zip(m1.edges, m2.edges):
            assert math.hypot(*w) == pytest.approx(math.hypot(*w2), abs=1e-9)
        for a in range(n):
            d1, d2 = distances_to(m1, EUCLID, a)[0], distances_to(m2, EUCLID, a)[0]
            for x, y in zip(d1, d2):
                assert x == y or abs(x - y) <= 1e-9


def test_location_service_lookup():
    g1, g2 = SpatialModel(2), SpatialModel(2, [(0, 1.0, 1)])
    svc = LocationService([0.0, 5.0], [g1, g2])
    assert model_at(svc, 3) is g1
    assert model_at(svc, 5) is g2
    static = LocationService.static(g1)
    assert static.model_at(123.0) is g1
    with pytest.raises(SpaceError):
        svc.model_at(-1)


def test_location_service_rejects_mismatched_universe():
    with pytest.raises(SpaceError, match="locations"):
        LocationService([0.0, 1.0], [SpatialModel(2), SpatialModel(3)])
    with pytest.raises(SpaceError, match="increase"):
        LocationService([1.0, 1.0], [SpatialModel(2), SpatialModel(2)])
