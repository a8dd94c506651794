"""Offline monitoring of spatio-temporal formulas over piecewise-constant traces."""
from __future__ import annotations

import os
import time
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import logic as L
from .logic import DistancePredicate, InterpretationContext
from .semiring import SignalDomain
from .signal import (
    PiecewiseSignal,
    SignalError,
    SpatioTemporalSignal,
    Trace,
    past_window_choose,
    past_window_combine,
    time_steps_union,
    window_choose,
    window_combine,
)
from .space import DistanceFunction, LocationService, SpatialModel


class MonitorError(ValueError):
    pass


@dataclass
class FixpointStats:
    calls: int = 0
    max_iterations: int = 0
    max_ratio: float = 0.0  # iterations / |L|, worst case seen

    def record(self, iterations: int, n: int):
        self.calls += 1
        self.max_iterations = max(self.max_iterations, iterations)
        if n:
            self.max_ratio = max(self.max_ratio, iterations / n)


@dataclass
class MonitorResult:
    signal: SpatioTemporalSignal
    formula: str
    semantics: str
    wall_time: float
    stats: FixpointStats = field(default_factory=FixpointStats)

    def at(self, loc: int, t: float):
        return self.signal[loc].value_at(t)


# ----------------------------------------------------------------------------
# temporal operators

def _aligned(s1: PiecewiseSignal, s2: PiecewiseSignal, domain: SignalDomain):
    horizon = min(s1.end, s2.end)
    s1 = s1.restrict(horizon).padded(domain.bottom)
    s2 = s2.restrict(horizon).padded(domain.bottom)
    times = time_steps_union(s1, s2)
    return times, [s1.value_at(t) for t in times], [s2.value_at(t) for t in times], horizon


def monitor_until(s1: PiecewiseSignal, s2: PiecewiseSignal, a: float, b: float, domain: SignalDomain) -> PiecewiseSignal:
    """Choose over ``t'`` in ``[t+a, t+b]`` of ``s2(t')`` combined with ``s1`` on ``[t, t']``.

    Windows running past the common horizon ``T`` are cut at ``T``; the
    result is defined on ``[0, T-a]``.
    """
    if a < 0 or a > b:
        raise MonitorError(f"bad interval [{a}, {b}]")
    times, v1, v2, horizon = _aligned(s1, s2, domain)
    out_end = horizon - a
    if out_end < 0:
        raise MonitorError(f"interval offset {a} exceeds the horizon {horizon}")
    choose, combine, bottom = domain.choose, domain.combine, domain.bottom
    shift_a = [t - a for t in times]
    shift_b = [t - b for t in times]
    cands = {0.0}
    for seq in (times, shift_a, shift_b):
        cands.update(t for t in seq if 0.0 <= t <= out_end)
    out_t = sorted(cands)
    out_v = []
    for t in out_t:
        j0 = bisect_right(times, t) - 1
        js = bisect_right(shift_a, t) - 1
        je = bisect_right(shift_b, t) - 1
        prefix = domain.top
        for i in range(j0, js + 1):
            prefix = combine(prefix, v1[i])
            if prefix == bottom:
                break
        acc = bottom
        if prefix != bottom:
            acc = combine(v2[js], prefix)
            for k in range(js + 1, je + 1):
                prefix = combine(prefix, v1[k])
                if prefix == bottom:
                    break
                acc = choose(acc, combine(v2[k], prefix))
        out_v.append(acc)
    return PiecewiseSignal(out_t, out_v, out_end, bottom).normalized()


def monitor_since(s1: PiecewiseSignal, s2: PiecewiseSignal, a: float, b: float, domain: SignalDomain) -> PiecewiseSignal:
    """Choose over ``t'`` in ``[t-b, t-a]`` of ``s2(t')`` combined with ``s1`` on ``[t', t]``.

    Times before 0 are outside the trace; a window that is entirely before 0
    yields bottom.
    """
    if a < 0 or a > b:
        raise MonitorError(f"bad interval [{a}, {b}]")
    times, v1, v2, horizon = _aligned(s1, s2, domain)
    choose, combine, bottom = domain.choose, domain.combine, domain.bottom
    plus_a = [t + a for t in times]
    plus_b = [t + b for t in times]
    cands = {0.0}
    for seq in (times, plus_a, plus_b):
        cands.update(t for t in seq if 0.0 <= t <= horizon)
    out_t = sorted(cands)
    out_v = []
    for t in out_t:
        j0 = bisect_right(times, t) - 1
        je = bisect_right(plus_a, t) - 1
        acc = bottom
        if je >= 0:
            js = max(bisect_right(plus_b, t) - 1, 0)
            suffix = domain.top
            for i in range(je, j0 + 1):
                suffix = combine(suffix, v1[i])
                if suffix == bottom:
                    break
            if suffix != bottom:
                acc = combine(v2[je], suffix)
                for k in range(je - 1, js - 1, -1):
                    suffix = combine(suffix, v1[k])
                    if suffix == bottom:
                        break
                    acc = choose(acc, combine(v2[k], suffix))
        out_v.append(acc)
    return PiecewiseSignal(out_t, out_v, horizon, bottom).normalized()


# ----------------------------------------------------------------------------
# spatial fixpoints

def _pareto(triples, domain: SignalDomain, dsr):
    """Drop triples beaten on both value and distance by another triple.

    A dominated triple can never change the final verdict: everything it
    propagates is dominated by what its dominator propagates.
    """
    vrank, drank = domain.base.rank, dsr.rank
    if vrank is not None and drank is not None:
        triples = sorted(triples, key=lambda tr: (drank(tr[2]), vrank(tr[1]), tr[0]))
        kept = []
        best = None
        for tr in triples:
            if best is None or vrank(tr[1]) < best:
                kept.append(tr)
                best = vrank(tr[1])
        return kept
    kept = []
    for i, (t, v, w) in enumerate(triples):
        beaten = False
        for j, (t2, v2, w2) in enumerate(triples):
            if i == j:
                continue
            if domain.choose(v2, v) == v2 and dsr.choose(w2, w) == w2:
                if (v2, w2) != (v, w) or t2 < t or (t2 == t and j < i):
                    beaten = True
                    break
        if not beaten:
            kept.append((t, v, w))
    return sorted(kept, key=lambda tr: (tr[0], repr(tr[1]), repr(tr[2])))


def reach_fix(model: SpatialModel, df: DistanceFunction, pred: DistancePredicate,
              s1: Sequence, s2: Sequence, domain: SignalDomain, stats: FixpointStats | None = None) -> list:
    """Reachability at one time instant.

    ``r[l]`` holds triples ``(target, value, distance)``: ``l`` reaches
    ``target`` (a ``s2`` location) through ``s1`` locations with that value
    and accumulated distance. Iterates to a fixpoint, propagating over each
    edge ``l1 -> l2`` from ``r[l2]`` into ``r[l1]``; the verdict at ``l``
    chooses among the values whose distance satisfies ``pred``, combined
    with ``s1`` at ``l``.
    """
    n = model.n
    bottom, combine = domain.bottom, domain.combine
    dsr, f = df.semiring, df.accumulate
    r = [[(loc, s2[loc], df.zero)] if s2[loc] != bottom else [] for loc in range(n)]
    iterations = 0
    while True:
        iterations += 1
        nxt = []
        for l1 in range(n):
            cand = list(r[l1])
            sv = s1[l1]
            if sv != bottom:
                for l2, w in model.successors(l1):
                    for tgt, v, dw in r[l2]:
                        nw = f(dw, w)
                        if not pred(nw):
                            continue
                        nv = combine(v, sv)
                        if nv != bottom:
                            cand.append((tgt, nv, nw))
            nxt.append(_pareto(cand, domain, dsr) if len(cand) > 1 else cand)
        if nxt == r:
            break
        r = nxt
    if stats is not None:
        stats.record(iterations, n)
    # the start location must satisfy s1 even when it is the target itself
    return [combine(s1[loc], domain.choose_all(v for _, v, w in r[loc] if pred(w))) for loc in range(n)]


def escape_fix(model: SpatialModel, df: DistanceFunction, pred: DistancePredicate,
               s1: Sequence, domain: SignalDomain, stats: FixpointStats | None = None,
               vectorized: bool | None = None) -> list:
    """Escape at one time instant.

    ``e[l]`` maps each target to ``(value, distance)``: the best value of a
    route of ``s1`` locations from ``l`` to the target and the model distance
    between them (both merged over every route found). The verdict at ``l``
    chooses among the targets whose distance satisfies ``pred``.
    """
    sr = domain.base
    if vectorized is None:
        vectorized = (sr.choose_ufunc is not None and df.semiring.choose_ufunc is not None
                      and df.edge_cost is not None)
    if vectorized:
        return _escape_dense(model, df, pred, s1, domain, stats)
    n = model.n
    choose, combine = domain.choose, domain.combine
    dchoose, f = df.semiring.choose, df.accumulate
    e = [{loc: (s1[loc], df.zero)} for loc in range(n)]
    iterations = 0
    while True:
        iterations += 1
        nxt = []
        for l1 in range(n):
            cur = dict(e[l1])
            sv = s1[l1]
            for l2, w in model.successors(l1):
                for tgt, (v, dw) in e[l2].items():
                    nv, nw = combine(v, sv), f(dw, w)
                    if tgt in cur:
                        ov, ow = cur[tgt]
                        cur[tgt] = (choose(ov, nv), dchoose(ow, nw))
                    else:
                        cur[tgt] = (nv, nw)
            nxt.append(cur)
        if nxt == e:
            break
        e = nxt
    if stats is not None:
        stats.record(iterations, n)
    return [domain.choose_all(v for v, w in e[loc].values() if pred(w)) for loc in range(n)]


def _escape_dense(model, df, pred, s1, domain, stats):
    """Same fixpoint as :func:`escape_fix` on ``n x n`` value/distance matrices.

    Absent triples are encoded as (bottom, distance bottom), which both merges
    and propagation leave untouched.
    """
    n = model.n
    sr, dsr = domain.base, df.semiring
    vals = np.array([domain.bottom] * n * n).reshape(n, n) if n else np.zeros((0, 0))
    s1v = np.asarray(list(s1))
    dist = np.full((n, n), float(dsr.bottom))
    idx = np.arange(n)
    vals[idx, idx] = s1v
    dist[idx, idx] = float(df.zero)
    edges = model.edges
    iterations = 0
    if edges:
        src = np.array([s for s, _, _ in edges])
        dst = np.array([d for _, _, d in edges])
        cost = np.array([df.edge_cost(w) for _, w, _ in edges], dtype=float)
        starts = np.flatnonzero(np.r_[True, src[1:] != src[:-1]])  # edges are sorted by source
        srcs = src[starts]
        s1_src = s1v[src][:, None]
    while True:
        iterations += 1
        if not edges:
            break
        cand_v = sr.combine_ufunc(vals[dst], s1_src)
        cand_w = dist[dst] + cost[:, None]
        new_v = vals.copy()
        new_w = dist.copy()
        new_v[srcs] = sr.choose_ufunc(new_v[srcs], sr.choose_ufunc.reduceat(cand_v, starts, axis=0))
        new_w[srcs] = dsr.choose_ufunc(new_w[srcs], dsr.choose_ufunc.reduceat(cand_w, starts, axis=0))
        if np.array_equal(new_v, vals) and np.array_equal(new_w, dist):
            break
        vals, dist = new_v, new_w
    if stats is not None:
        stats.record(iterations, n)
    mask = np.asarray(pred(dist), dtype=bool)
    chosen = np.where(mask, vals, domain.bottom)
    if n == 0:
        return []
    return [_scalar(x) for x in sr.choose_ufunc.reduce(chosen, axis=1)]


def _scalar(x):
    return x.item() if hasattr(x, "item") else x


# ----------------------------------------------------------------------------
# the recursive monitor

def _threads_from_env() -> int:
    try:
        return max(0, int(os.environ.get("STREL_THREADS", "0")))
    except ValueError:
        return 0


class _Monitor:
    def __init__(self, service: LocationService, trace: Trace, context: InterpretationContext,
                 domain: SignalDomain, threads: int):
        self.service = service
        self.trace = trace
        self.context = context
        self.domain = domain
        self.threads = threads
        self.stats = FixpointStats()
        self.cache: dict[Any, SpatioTemporalSignal] = {}
        self.boolean = domain.name == "boolean"

    def eval(self, phi) -> SpatioTemporalSignal:
        hit = self.cache.get(phi)
        if hit is None:
            hit = self._eval(phi)
            self.cache[phi] = hit
        return hit

    # -- leaves ------------------------------------------------------------
    def _const(self, value):
        h = self.trace.horizon
        return SpatioTemporalSignal([PiecewiseSignal.constant(value, h, self.domain.bottom)
                                     for _ in range(self.trace.n)])

    def _embed_bool(self, b):
        return self.domain.top if b else self.domain.bottom

    def _atom_fn(self, phi):
        d = self.domain
        if isinstance(phi, L.Atomic):
            custom = self.context.atoms.get(phi.name)
            if custom is not None:
                channels = self.trace.channels

                def fn(vec):
                    out = custom(dict(zip(channels, vec)))
                    if isinstance(out, (bool, np.bool_)):
                        return self._embed_bool(bool(out))
                    return out > 0 if self.boolean else float(out)
                return fn
            try:
                i = self.trace.channel_index(phi.name)
            except KeyError:
                raise MonitorError(f"unknown atomic proposition {phi.name!r}") from None
            return lambda vec: self._embed_bool(bool(vec[i]))
        try:
            i = self.trace.channel_index(phi.channel)
        except KeyError:
            raise MonitorError(f"unknown channel {phi.channel!r}") from None
        op, c = phi.op, phi.threshold
        if self.boolean:
            pred = DistancePredicate(op, c)  # same comparison table
            return lambda vec: pred(vec[i])
        if op in (">", ">="):
            return lambda vec: float(vec[i]) - c
        return lambda vec: c - float(vec[i])

    def _eval(self, phi) -> SpatioTemporalSignal:
        d = self.domain
        if isinstance(phi, L.TrueF):
            return self._const(d.top)
        if isinstance(phi, (L.Atomic, L.Cmp)):
            fn = self._atom_fn(phi)
            return SpatioTemporalSignal([s.map(fn, d.bottom).padded(d.bottom) for s in self.trace.signals])
        if isinstance(phi, L.At):
            if not 0 <= phi.loc < self.trace.n:
                raise MonitorError(f"location @{phi.loc} outside 0..{self.trace.n - 1}")
            h = self.trace.horizon
            return SpatioTemporalSignal([
                PiecewiseSignal.constant(self._embed_bool(loc == phi.loc), h, d.bottom)
                for loc in range(self.trace.n)])
        if isinstance(phi, L.Not):
            return self.eval(phi.arg).map(d.negate, d.bottom)
        if isinstance(phi, (L.And, L.Or)):
            op = d.combine if isinstance(phi, L.And) else d.choose
            left, right = self._common(self.eval(phi.left), self.eval(phi.right))
            return SpatioTemporalSignal([_zip_signals(op, a, b, d.bottom) for a, b in zip(left, right)])
        if isinstance(phi, (L.Until, L.Since)):
            fn = monitor_until if isinstance(phi, L.Until) else monitor_since
            left, right = self.eval(phi.left), self.eval(phi.right)
            return SpatioTemporalSignal([fn(a, b, phi.a, phi.b, d) for a, b in zip(left, right)])
        if isinstance(phi, L._Temporal1):
            fn = {L.Eventually: window_choose, L.Globally: window_combine,
                  L.Once: past_window_choose, L.Historically: past_window_combine}[type(phi)]
            sub = self.eval(phi.arg)
            if isinstance(phi, (L.Eventually, L.Globally)) and phi.a > sub.horizon:
                raise MonitorError(f"interval offset {phi.a} exceeds the horizon {sub.horizon}")
            return SpatioTemporalSignal([fn(s, phi.a, phi.b, d) for s in sub])
        if isinstance(phi, L.Reach):
            df = self.context.distance(phi.dist)
            return self._spatial([phi.left, phi.right],
                                 lambda m, v1, v2, st: reach_fix(m, df, phi.pred, v1, v2, d, st))
        if isinstance(phi, L.Somewhere):
            df = self.context.distance(phi.dist)
            return self._spatial([phi.arg], lambda m, v, st: reach_fix(m, df, phi.pred, [d.top] * m.n, v, d, st))
        if isinstance(phi, L.Everywhere):
            df = self.context.distance(phi.dist)

            def everywhere(m, v, st):
                inner = reach_fix(m, df, phi.pred, [d.top] * m.n, [d.negate(x) for x in v], d, st)
                return [d.negate(x) for x in inner]
            return self._spatial([phi.arg], everywhere)
        if isinstance(phi, L.Escape):
            df = self.context.distance(phi.dist)
            return self._spatial([phi.arg], lambda m, v, st: escape_fix(m, df, phi.pred, v, d, st))
        if isinstance(phi, L.Surround):
            df = self.context.distance(phi.dist)
            outside_pred = phi.pred.complement()

            def surround(m, v1, v2, st):
                neg = d.negate
                outside = [d.combine(neg(a), neg(b)) for a, b in zip(v1, v2)]
                leak = reach_fix(m, df, phi.pred, v1, outside, d, st)
                esc = escape_fix(m, df, outside_pred, v1, d, st)
                return [d.combine(d.combine(a, neg(x)), neg(y)) for a, x, y in zip(v1, leak, esc)]
            return self._spatial([phi.left, phi.right], surround)
        raise MonitorError(f"cannot monitor {phi!r}")

    def _common(self, *sigs: SpatioTemporalSignal):
        horizon = min(s.horizon for s in sigs)
        return [s if s.horizon == horizon else s.restrict(horizon) for s in sigs]

    def _spatial(self, subs, fn) -> SpatioTemporalSignal:
        sigs = self._common(*[self.eval(s) for s in subs])
        horizon = sigs[0].horizon
        steps = set()
        for s in sigs:
            steps.update(s.time_steps())
        steps.update(t for t in self.service.breakpoints if 0.0 <= t <= horizon)
        steps.add(0.0)
        times = sorted(t for t in steps if 0.0 <= t <= horizon)
        inputs = []
        for t in times:
            model = self.service.model_at(t)
            if model.n != self.trace.n:
                raise MonitorError(f"spatial model at t={t} has {model.n} locations, trace has {self.trace.n}")
            inputs.append((model, tuple(tuple(s.at(t)) for s in sigs)))

        memo: dict[Any, list] = {}

        def solve(item):
            model, vecs = item
            key = (id(model), vecs)
            if key not in memo:
                memo[key] = fn(model, *vecs, self.stats)
            return memo[key]

        if self.threads > 1 and len(inputs) > 1:
            # duplicate keys may be solved twice under threads; results are identical
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(solve, inputs))
        else:
            results = [solve(item) for item in inputs]
        n = self.trace.n
        return SpatioTemporalSignal([
            PiecewiseSignal(times, [res[loc] for res in results], horizon, self.domain.bottom).normalized()
            for loc in range(n)])


def _zip_signals(op, a: PiecewiseSignal, b: PiecewiseSignal, bottom) -> PiecewiseSignal:
    times = time_steps_union(a, b)
    return PiecewiseSignal(times, [op(a.value_at(t), b.value_at(t)) for t in times], a.end, bottom).normalized()


def monitor(service: LocationService, trace: Trace, formula, context: InterpretationContext | None = None,
            domain: SignalDomain | str = "boolean", threads: int | None = None) -> MonitorResult:
    """Monitor ``formula`` at every location and time of ``trace``.

    ``formula`` may be text or a syntax tree; derived operators are evaluated
    directly. Returns per-location verdict signals on ``[0, T']`` where ``T'``
    is the trace horizon shortened by the future-time offsets in the formula.
    """
    from .semiring import domain_by_name

    if isinstance(domain, str):
        domain = domain_by_name(domain)
    if isinstance(formula, str):
        formula = L.parse(formula)
    context = context or InterpretationContext()
    L.validate(formula, context, trace)
    if service.n != trace.n:
        raise MonitorError(f"location service has {service.n} locations, trace has {trace.n}")
    if trace.n == 0:
        raise MonitorError("empty trace")
    threads = _threads_from_env() if threads is None else threads
    start = time.perf_counter()
    m = _Monitor(service, trace, context, domain, threads)
    try:
        sig = m.eval(formula)
    except SignalError as exc:
        raise MonitorError(str(exc)) from exc
    return MonitorResult(sig, L.to_text(formula), domain.name, time.perf_counter() - start, m.stats)
