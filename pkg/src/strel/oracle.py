"""Brute-force reference monitor for differential testing.

Evaluates the monitoring function literally: spatial operators by
enumerating every simple route, temporal operators by scanning a grid that
contains every point where any signal involved can change. Only meant for
small instances.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction
from functools import reduce
from math import gcd

from . import logic as L
from .logic import InterpretationContext
from .monitor import MonitorResult
from .semiring import SignalDomain, domain_by_name
from .signal import PiecewiseSignal, SpatioTemporalSignal, Trace
from .space import DistanceFunction, LocationService, SpatialModel, route_distance

MAX_LOCATIONS = 9
MAX_BREAKPOINTS = 8
MAX_GRID = 4000


class OracleTooLarge(ValueError):
    pass


def simple_paths(model: SpatialModel, source: int) -> list[tuple[int, ...]]:
    """Every route from ``source`` that never revisits a location (the one-location route included)."""
    out = []
    stack = [(source,)]
    while stack:
        path = stack.pop()
        out.append(path)
        for nxt, _ in model.successors(path[-1]):
            if nxt not in path:
                stack.append(path + (nxt,))
    return out


def _frac_gcd(values) -> Fraction:
    fr = [Fraction(v) for v in values if v != 0]
    if not fr:
        return Fraction(1)
    den = reduce(lambda a, b: a * b // gcd(a, b), (f.denominator for f in fr))
    num = reduce(gcd, (int(f * den) for f in fr))
    return Fraction(abs(num), den)


def _time_constants(phi, trace: Trace, service: LocationService) -> list[float]:
    consts = [trace.horizon]
    for s in trace.signals:
        consts.extend(s.times)
    consts.extend(service.breakpoints)
    for node in L.walk(phi):
        if isinstance(node, (L._Temporal2, L._Temporal1)):
            consts.extend((node.a, node.b))
    return consts


class _Oracle:
    def __init__(self, service, trace, context, domain, grid):
        self.service = service
        self.trace = trace
        self.context = context
        self.domain = domain
        self.grid = grid
        self.boolean = domain.name == "boolean"
        self.memo = {}
        self.paths = {}
        self.spatial_memo = {}

    def horizon(self, phi) -> float:
        if isinstance(phi, (L.TrueF, L.Atomic, L.Cmp, L.At)):
            return self.trace.horizon
        if isinstance(phi, L.Until):
            return min(self.horizon(phi.left), self.horizon(phi.right)) - phi.a
        return min(self.horizon(k) for k in L.children(phi))

    def grid_in(self, lo, hi):
        return [g for g in self.grid if lo <= g <= hi]

    def routes(self, model, source, df: DistanceFunction):
        key = (id(model), source, df.name)
        if key not in self.paths:
            self.paths[key] = [(p, route_distance(model, p, df)) for p in simple_paths(model, source)]
        return self.paths[key]

    def distance(self, model, df, a, b):
        # choose over all simple routes from a that reach b
        return df.semiring.choose_all(d for p, d in self.routes(model, a, df) if p[-1] == b)

    def atom(self, phi, vec):
        d = self.domain
        if vec is None:
            return d.bottom
        if isinstance(phi, L.Atomic):
            custom = self.context.atoms.get(phi.name)
            if custom is not None:
                out = custom(dict(zip(self.trace.channels, vec)))
                if isinstance(out, bool):
                    return d.top if out else d.bottom
                return out > 0 if self.boolean else float(out)
            return d.top if vec[self.trace.channel_index(phi.name)] else d.bottom
        x = float(vec[self.trace.channel_index(phi.channel)])
        c = phi.threshold
        if self.boolean:
            return {"<": x < c, "<=": x <= c, ">": x > c, ">=": x >= c}[phi.op]
        return x - c if phi.op in (">", ">=") else c - x

    def m(self, phi, t) -> list:
        key = (phi, t)
        if key not in self.memo:
            self.memo[key] = self._m(phi, t)
        return self.memo[key]

    def _m(self, phi, t):
        d = self.domain
        n = self.trace.n
        if isinstance(phi, L.TrueF):
            return [d.top] * n
        if isinstance(phi, (L.Atomic, L.Cmp)):
            return [self.atom(phi, self.trace.values_at(loc, t)) for loc in range(n)]
        if isinstance(phi, L.At):
            return [d.top if loc == phi.loc else d.bottom for loc in range(n)]
        if isinstance(phi, L.Not):
            return [d.negate(v) for v in self.m(phi.arg, t)]
        if isinstance(phi, L.And):
            return [d.combine(a, b) for a, b in zip(self.m(phi.left, t), self.m(phi.right, t))]
        if isinstance(phi, L.Until):
            end = min(self.horizon(phi.left), self.horizon(phi.right))
            out = []
            for loc in range(n):
                terms = []
                for t1 in self.grid_in(t + phi.a, min(t + phi.b, end)):
                    hold = d.combine_all(self.m(phi.left, t2)[loc] for t2 in self.grid_in(t, t1))
                    terms.append(d.combine(self.m(phi.right, t1)[loc], hold))
                out.append(d.choose_all(terms))
            return out
        if isinstance(phi, L.Since):
            out = []
            for loc in range(n):
                terms = []
                for t1 in self.grid_in(max(0.0, t - phi.b), t - phi.a):
                    hold = d.combine_all(self.m(phi.left, t2)[loc] for t2 in self.grid_in(t1, t))
                    terms.append(d.combine(self.m(phi.right, t1)[loc], hold))
                out.append(d.choose_all(terms))
            return out
        if isinstance(phi, L.Reach):
            model = self.service.model_at(t)
            s1, s2 = tuple(self.m(phi.left, t)), tuple(self.m(phi.right, t))
            key = ("reach", phi.dist, phi.pred, id(model), s1, s2)
            if key not in self.spatial_memo:
                self.spatial_memo[key] = self.reach(model, phi, s1, s2)
            return self.spatial_memo[key]
        if isinstance(phi, L.Escape):
            model = self.service.model_at(t)
            s1 = tuple(self.m(phi.arg, t))
            key = ("escape", phi.dist, phi.pred, id(model), s1)
            if key not in self.spatial_memo:
                self.spatial_memo[key] = self.escape(model, phi, s1)
            return self.spatial_memo[key]
        raise TypeError(f"oracle expects core formulas, got {type(phi).__name__}")

    def reach(self, model, phi, s1, s2):
        d = self.domain
        df = self.context.distance(phi.dist)
        out = []
        for loc in range(model.n):
            terms = []
            for path, dist in self.routes(model, loc, df):
                if phi.pred(dist):
                    hold = d.combine_all(s1[j] for j in path[:max(len(path) - 1, 1)])
                    terms.append(d.combine(s2[path[-1]], hold))
            out.append(d.choose_all(terms))
        return out

    def escape(self, model, phi, s1):
        d = self.domain
        df = self.context.distance(phi.dist)
        out = []
        for loc in range(model.n):
            terms = []
            for path, _ in self.routes(model, loc, df):
                if phi.pred(self.distance(model, df, loc, path[-1])):
                    terms.append(d.combine_all(s1[j] for j in path))
            out.append(d.choose_all(terms))
        return out


def oracle_monitor(service: LocationService, trace: Trace, formula, context: InterpretationContext | None = None,
                   domain: SignalDomain | str = "boolean", grid_step: float | None = None,
                   max_locations: int = MAX_LOCATIONS) -> MonitorResult:
    """Reference verdicts for small instances (by default at most 9 locations, 8 breakpoints per signal).

    Raising ``max_locations`` is fine for sparse graphs with few simple paths.
    """
    if isinstance(domain, str):
        domain = domain_by_name(domain)
    if isinstance(formula, str):
        formula = L.parse(formula)
    context = context or InterpretationContext()
    if trace.n > max_locations:
        raise OracleTooLarge(f"{trace.n} locations (limit {max_locations})")
    if len(service.breakpoints) > MAX_BREAKPOINTS or any(len(s.times) > MAX_BREAKPOINTS for s in trace.signals):
        raise OracleTooLarge(f"more than {MAX_BREAKPOINTS} breakpoints")
    core = L.expand_derived(formula)
    start = time.perf_counter()
    if grid_step is None:
        grid_step = float(_frac_gcd(_time_constants(core, trace, service)) / 2)
    count = int(math.floor(trace.horizon / grid_step + 1e-9)) + 1
    if count > MAX_GRID:
        raise OracleTooLarge(f"time grid of {count} points")
    grid = [k * grid_step for k in range(count)]
    o = _Oracle(service, trace, context, domain, grid)
    horizon = o.horizon(core)
    if horizon < 0:
        raise OracleTooLarge("formula horizon exceeds the trace")
    pts = [g for g in grid if g <= horizon]
    rows = [o.m(core, t) for t in pts]
    signals = [PiecewiseSignal(pts, [row[loc] for row in rows], horizon, domain.bottom).normalized()
               for loc in range(trace.n)]
    return MonitorResult(SpatioTemporalSignal(signals), L.to_text(formula), domain.name,
                         time.perf_counter() - start)
