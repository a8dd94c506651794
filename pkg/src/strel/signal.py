"""Piecewise-constant temporal, spatial and spatio-temporal signals."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence


class SignalError(ValueError):
    pass


class PiecewiseSignal:
    """Value ``values[i]`` on ``[times[i], times[i+1])``, the last value up to ``end``.

    Before ``times[0]`` the signal reads ``bottom``.
    """

    __slots__ = ("times", "values", "end", "bottom")

    def __init__(self, times: Sequence[float], values: Sequence[Any], end: float, bottom: Any = None):
        if len(times) != len(values):
            raise SignalError("times and values differ in length")
        if not times:
            raise SignalError("a signal needs at least one segment")
        times = tuple(float(t) for t in times)
        for i, (a, b) in enumerate(zip(times, times[1:])):
            if not a < b:
                raise SignalError(f"segment times must increase strictly (index {i + 1}: {a} then {b})")
        if any(math.isnan(t) for t in times) or math.isnan(end):
            raise SignalError("NaN time")
        if times[-1] > end:
            raise SignalError(f"breakpoint {times[-1]} lies past the horizon {end}")
        self.times = times
        self.values = tuple(values)
        self.end = float(end)
        self.bottom = bottom

    @classmethod
    def constant(cls, value, end: float, bottom=None, start: float = 0.0) -> "PiecewiseSignal":
        return cls((start,), (value,), end, bottom)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, Any]], end: float, bottom=None) -> "PiecewiseSignal":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs], end, bottom)

    @property
    def start(self) -> float:
        return self.times[0]

    def pairs(self) -> list[tuple[float, Any]]:
        return list(zip(self.times, self.values))

    def value_at(self, t: float):
        i = bisect_right(self.times, t) - 1
        if i < 0:
            return self.bottom
        return self.values[i]

    def normalized(self) -> "PiecewiseSignal":
        """Minimal form: no two consecutive segments carry the same value."""
        times, values = [self.times[0]], [self.values[0]]
        for t, v in zip(self.times[1:], self.values[1:]):
            if v != values[-1]:
                times.append(t)
                values.append(v)
        return PiecewiseSignal(times, values, self.end, self.bottom)

    def is_minimal(self) -> bool:
        return all(a != b for a, b in zip(self.values, self.values[1:]))

    def restrict(self, end: float) -> "PiecewiseSignal":
        """Drop everything past ``end`` (which must not exceed the current horizon)."""
        if end > self.end:
            raise SignalError(f"cannot extend a signal from {self.end} to {end}")
        k = bisect_right(self.times, end)
        if k == 0:
            raise SignalError(f"horizon {end} precedes the signal start {self.start}")
        return PiecewiseSignal(self.times[:k], self.values[:k], end, self.bottom)

    def map(self, fn: Callable[[Any], Any], bottom=None) -> "PiecewiseSignal":
        return PiecewiseSignal(self.times, [fn(v) for v in self.values], self.end, bottom).normalized()

    def padded(self, bottom=None) -> "PiecewiseSignal":
        """Same signal with an explicit ``bottom`` segment from time 0 when it starts later."""
        bottom = self.bottom if bottom is None else bottom
        if self.times[0] <= 0.0:
            return self
        return PiecewiseSignal((0.0,) + self.times, (bottom,) + self.values, self.end, bottom)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseSignal):
            return NotImplemented
        return (self.times, self.values, self.end) == (other.times, other.values, other.end)

    def __repr__(self):
        body = ", ".join(f"({t:g}, {v!r})" for t, v in zip(self.times, self.values))
        return f"PiecewiseSignal([{body}], end={self.end:g})"


def value_at(signal: PiecewiseSignal, t: float):
    return signal.value_at(t)


def time_steps(signal: PiecewiseSignal) -> tuple[float, ...]:
    return signal.times


def time_steps_union(*signals: PiecewiseSignal | Iterable[float]) -> list[float]:
    steps: set[float] = set()
    for s in signals:
        steps.update(s.times if isinstance(s, PiecewiseSignal) else s)
    return sorted(steps)


def pointwise_unary(op: Callable[[Any], Any], s: PiecewiseSignal, bottom=None) -> PiecewiseSignal:
    return s.map(op, bottom if bottom is not None else s.bottom)


def pointwise(op: Callable[[Any, Any], Any], s1: PiecewiseSignal, s2: PiecewiseSignal, bottom=None) -> PiecewiseSignal:
    """Combine two signals on the union of their breakpoints."""
    if s1.end != s2.end:
        raise SignalError(f"horizon mismatch: {s1.end} vs {s2.end}")
    times = time_steps_union(s1, s2)
    values = [op(s1.value_at(t), s2.value_at(t)) for t in times]
    return PiecewiseSignal(times, values, s1.end, bottom if bottom is not None else s1.bottom).normalized()


class _FoldQueue:
    """FIFO queue that reports the fold of its contents under an associative op.

    Two stacks with running aggregates; amortised O(1) per operation and no
    requirement beyond associativity.
    """

    def __init__(self, op, identity):
        self.op = op
        self.identity = identity
        self._front: list[Any] = []   # aggregates, top = oldest element
        self._back: list[Any] = []
        self._back_agg = identity

    def push(self, value):
        self._back.append(value)
        self._back_agg = self.op(self._back_agg, value)

    def pop(self):
        if not self._front:
            agg = self.identity
            while self._back:
                agg = self.op(self._back.pop(), agg)
                self._front.append(agg)
            self._back_agg = self.identity
        self._front.pop()

    def fold(self):
        head = self._front[-1] if self._front else self.identity
        return self.op(head, self._back_agg)


def _sliding(values, spans, op, identity):
    """Fold ``values[lo..hi]`` for each ``(lo, hi)`` of ``spans`` (both ends non-decreasing)."""
    q = _FoldQueue(op, identity)
    lo_q, hi_q = 0, -1
    out = []
    for lo, hi in spans:
        if hi < lo:
            out.append(identity)
            continue
        while hi_q < hi:
            hi_q += 1
            q.push(values[hi_q])
        lo = max(lo, lo_q)
        while lo_q < lo:
            if lo_q <= hi_q:
                q.pop()
            lo_q += 1
        out.append(q.fold())
    return out


def window_fold(signal: PiecewiseSignal, a: float, b: float, op, identity, bottom=None) -> PiecewiseSignal:
    """``out(t) = op`` over ``t' in [t+a, min(t+b, T)]``; the result lives on ``[0, T-a]``."""
    if a < 0 or a > b:
        raise SignalError(f"bad window [{a}, {b}]")
    bottom = signal.bottom if bottom is None else bottom
    s = signal.padded(bottom)
    horizon = s.end - a
    if horizon < 0:
        raise SignalError(f"window offset {a} exceeds the horizon {s.end}")
    shifted_a = [t - a for t in s.times]
    shifted_b = [t - b for t in s.times]
    cands = {0.0}
    cands.update(t for t in shifted_a if 0.0 <= t <= horizon)
    cands.update(t for t in shifted_b if 0.0 <= t <= horizon)
    times = sorted(cands)
    spans = [(bisect_right(shifted_a, t) - 1, bisect_right(shifted_b, t) - 1) for t in times]
    values = _sliding(s.values, spans, op, identity)
    return PiecewiseSignal(times, values, horizon, bottom).normalized()


def past_window_fold(signal: PiecewiseSignal, a: float, b: float, op, identity, bottom=None) -> PiecewiseSignal:
    """``out(t) = op`` over ``t' in [max(0, t-b), t-a]``; empty windows give ``identity``."""
    if a < 0 or a > b:
        raise SignalError(f"bad window [{a}, {b}]")
    bottom = signal.bottom if bottom is None else bottom
    s = signal.padded(bottom)
    horizon = s.end
    plus_a = [t + a for t in s.times]
    plus_b = [t + b for t in s.times]
    cands = {0.0}
    cands.update(t for t in plus_a if t <= horizon)
    cands.update(t for t in plus_b if t <= horizon)
    times = sorted(cands)
    spans = [(max(bisect_right(plus_b, t) - 1, 0), bisect_right(plus_a, t) - 1) for t in times]
    values = _sliding(s.values, spans, op, identity)
    return PiecewiseSignal(times, values, horizon, bottom).normalized()


def window_choose(signal: PiecewiseSignal, a: float, b: float, domain) -> PiecewiseSignal:
    """Sliding ``choose`` over the future window ``[t+a, t+b]`` (eventually)."""
    return window_fold(signal, a, b, domain.choose, domain.bottom, domain.bottom)


def window_combine(signal: PiecewiseSignal, a: float, b: float, domain) -> PiecewiseSignal:
    """Sliding ``combine`` over the future window ``[t+a, t+b]`` (globally)."""
    return window_fold(signal, a, b, domain.combine, domain.top, domain.bottom)


def past_window_choose(signal: PiecewiseSignal, a: float, b: float, domain) -> PiecewiseSignal:
    return past_window_fold(signal, a, b, domain.choose, domain.bottom, domain.bottom)


def past_window_combine(signal: PiecewiseSignal, a: float, b: float, domain) -> PiecewiseSignal:
    return past_window_fold(signal, a, b, domain.combine, domain.top, domain.bottom)


@dataclass
class SpatioTemporalSignal:
    """One temporal signal per location, all sharing the horizon."""

    signals: list[PiecewiseSignal]

    def __post_init__(self):
        ends = {s.end for s in self.signals}
        if len(ends) > 1:
            raise SignalError(f"locations disagree on the horizon: {sorted(ends)}")

    @property
    def n(self) -> int:
        return len(self.signals)

    @property
    def horizon(self) -> float:
        return self.signals[0].end

    def __getitem__(self, loc: int) -> PiecewiseSignal:
        return self.signals[loc]

    def __iter__(self):
        return iter(self.signals)

    def at(self, t: float) -> list:
        """The spatial signal at time ``t``."""
        return [s.value_at(t) for s in self.signals]

    def time_steps(self) -> list[float]:
        return time_steps_union(*self.signals)

    def restrict(self, end: float) -> "SpatioTemporalSignal":
        return SpatioTemporalSignal([s.restrict(end) for s in self.signals])

    def map(self, fn, bottom=None) -> "SpatioTemporalSignal":
        return SpatioTemporalSignal([s.map(fn, bottom) for s in self.signals])


class Trace:
    """Per-location vector-valued piecewise-constant signals with named channels.

    ``kinds`` records ``"bool"`` or ``"float"`` for every channel.
    """

    def __init__(self, channels: Sequence[str], kinds: Sequence[str], signals: Sequence[PiecewiseSignal]):
        if len(set(channels)) != len(channels):
            raise SignalError("duplicate channel names")
        if len(kinds) != len(channels):
            raise SignalError("one kind per channel expected")
        for k in kinds:
            if k not in ("bool", "float"):
                raise SignalError(f"unknown channel kind {k!r}")
        if not signals:
            raise SignalError("a trace needs at least one location")
        ends = {s.end for s in signals}
        if len(ends) > 1:
            raise SignalError(f"locations disagree on the horizon: {sorted(ends)}")
        width = len(channels)
        for loc, s in enumerate(signals):
            for i, vec in enumerate(s.values):
                if len(vec) != width:
                    raise SignalError(f"location {loc}, segment {i}: expected {width} values, got {len(vec)}")
        self.channels = tuple(channels)
        self.kinds = tuple(kinds)
        self.signals = list(signals)
        self._index = {c: i for i, c in enumerate(self.channels)}

    @property
    def n(self) -> int:
        return len(self.signals)

    @property
    def horizon(self) -> float:
        return self.signals[0].end

    def channel_index(self, name: str) -> int:
        return self._index[name]

    def kind(self, name: str) -> str:
        return self.kinds[self._index[name]]

    def channel(self, loc: int, name: str) -> PiecewiseSignal:
        """Temporal signal of a single channel at ``loc`` (minimal form)."""
        i = self._index[name]
        return self.signals[loc].map(lambda vec: vec[i])

    def values_at(self, loc: int, t: float):
        return self.signals[loc].value_at(t)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (self.channels, self.kinds, self.signals) == (other.channels, other.kinds, other.signals)

    def __repr__(self):
        return f"Trace(n={self.n}, channels={list(self.channels)}, horizon={self.horizon:g})"
