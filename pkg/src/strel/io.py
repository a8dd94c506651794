"""JSON trace and space files, verdict export (CSV / JSON) and re-import."""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

from .signal import PiecewiseSignal, SignalError, SpatioTemporalSignal, Trace
from .space import EuclideanModel, LocationService, SpaceError, SpatialModel


class SchemaError(ValueError):
    """A file parsed but does not describe a valid trace or space."""


def _reject_constant(token):
    raise SchemaError(f"non-finite JSON constant {token} is not allowed")


def _read_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if math.isnan(x):
        raise SchemaError(f"{where}: NaN is not allowed")
    return x


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _list(x, where):
    if not isinstance(x, list):
        raise SchemaError(f"{where}: expected a list")
    return x


# ----------------------------------------------------------------------------
# traces

def trace_from_dict(data: dict) -> Trace:
    horizon = _number(_field(data, "horizon", "trace"), "trace.horizon")
    channels = _list(_field(data, "channels", "trace"), "trace.channels")
    if not all(isinstance(c, str) for c in channels):
        raise SchemaError("trace.channels: names must be strings")
    width = len(channels)
    locs = _list(_field(data, "locations", "trace"), "trace.locations")
    kinds = data.get("kinds")
    if kinds is not None and (not isinstance(kinds, list) or len(kinds) != width):
        raise SchemaError("trace.kinds: one kind per channel expected")
    by_id = {}
    for k, entry in enumerate(locs):
        loc = _field(entry, "id", f"trace.locations[{k}]")
        if isinstance(loc, bool) or not isinstance(loc, int):
            raise SchemaError(f"trace.locations[{k}]: id must be an integer")
        if loc in by_id:
            raise SchemaError(f"location {loc}: listed twice")
        by_id[loc] = _list(_field(entry, "segments", f"location {loc}"), f"location {loc}.segments")
    n = len(by_id)
    if sorted(by_id) != list(range(n)):
        raise SchemaError(f"location ids must be 0..{n - 1}, got {sorted(by_id)}")
    if n == 0:
        raise SchemaError("trace has no locations")

    seen_kinds = list(kinds) if kinds is not None else [None] * width
    rows = {}
    for loc in range(n):
        segs = by_id[loc]
        if not segs:
            raise SchemaError(f"location {loc}: no segments")
        times, vecs = [], []
        for i, seg in enumerate(segs):
            where = f"location {loc}, segment {i}"
            t = _number(_field(seg, "t", where), where + ".t")
            if times and not times[-1] < t:
                raise SchemaError(f"{where}: time {t} does not increase (previous {times[-1]})")
            if t > horizon:
                raise SchemaError(f"{where}: time {t} lies past the horizon {horizon}")
            vals = _list(_field(seg, "values", where), where + ".values")
            if len(vals) != width:
                raise SchemaError(f"{where}: expected {width} values, got {len(vals)}")
            vec = []
            for c, v in enumerate(vals):
                kind = "bool" if isinstance(v, bool) else "float"
                if kind == "float":
                    v = _number(v, f"{where}, channel {channels[c]!r}")
                if seen_kinds[c] is None:
                    seen_kinds[c] = kind
                elif seen_kinds[c] != kind:
                    raise SchemaError(f"{where}: channel {channels[c]!r} mixes {seen_kinds[c]} and {kind} values")
                vec.append(v)
            times.append(t)
            vecs.append(tuple(vec))
        rows[loc] = (times, vecs)
    starts = {rows[loc][0][0] for loc in rows}
    if len(starts) > 1:
        raise SchemaError(f"locations start at different times: {sorted(starts)}")
    try:
        signals = [PiecewiseSignal(*rows[loc], horizon) for loc in range(n)]
        return Trace(channels, [k or "float" for k in seen_kinds], signals)
    except SignalError as exc:
        raise SchemaError(str(exc)) from None


def trace_to_dict(trace: Trace) -> dict:
    return {
        "horizon": trace.horizon,
        "channels": list(trace.channels),
        "kinds": list(trace.kinds),
        "locations": [
            {"id": loc, "segments": [{"t": t, "values": list(v)} for t, v in s.pairs()]}
            for loc, s in enumerate(trace.signals)
        ],
    }


def load_trace(path) -> Trace:
    return trace_from_dict(_read_json(path))


def save_trace(trace: Trace, path) -> None:
    Path(path).write_text(json.dumps(trace_to_dict(trace), indent=1, allow_nan=False) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------------
# spaces

def _snapshot_model(snap, k, n, weight_kind) -> SpatialModel:
    where = f"snapshot {k}"
    if "positions" in snap:
        pos = _list(snap["positions"], where + ".positions")
        if n is not None and len(pos) != n:
            raise SchemaError(f"{where}: {len(pos)} positions for {n} locations")
        pts = []
        for i, p in enumerate(pos):
            if not isinstance(p, list) or len(p) != 2:
                raise SchemaError(f"{where}, position {i}: expected [x, y]")
            pts.append((_number(p[0], f"{where}, position {i}"), _number(p[1], f"{where}, position {i}")))
        rel = []
        for i, pair in enumerate(_list(snap.get("relation", []), where + ".relation")):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{where}, relation pair {i}: expected [i, j]")
            rel.append(tuple(pair))
        if len(set(rel)) != len(rel):
            raise SchemaError(f"{where}: duplicate relation pair; a pair of locations carries at most one label")
        try:
            return EuclideanModel(tuple(pts), frozenset(rel)).to_spatial_model()
        except (SpaceError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: {exc}") from None
    if n is None:
        raise SchemaError(f"{where}: 'locations' is required with explicit edges")
    edges = []
    for i, e in enumerate(_list(_field(snap, "edges", where), where + ".edges")):
        if not isinstance(e, list) or len(e) != 3:
            raise SchemaError(f"{where}, edge {i}: expected [src, w, dst]")
        src, w, dst = e
        if weight_kind == "vec2":
            if not isinstance(w, list) or len(w) != 2:
                raise SchemaError(f"{where}, edge {i}: vec2 weight must be [x, y]")
            w = (_number(w[0], f"{where}, edge {i}"), _number(w[1], f"{where}, edge {i}"))
        else:
            w = _number(w, f"{where}, edge {i}")
        edges.append((src, w, dst))
    try:
        return SpatialModel(n, edges, weight_kind)
    except SpaceError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def space_from_dict(data: dict) -> LocationService:
    n = data.get("locations")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 0):
        raise SchemaError("space.locations: expected a non-negative integer")
    weight_kind = data.get("weightKind", "scalar")
    if weight_kind not in ("scalar", "vec2"):
        raise SchemaError(f"space.weightKind: unknown kind {weight_kind!r}")
    snaps = _list(_field(data, "snapshots", "space"), "space.snapshots")
    if not snaps:
        raise SchemaError("space: at least one snapshot is required")
    times, models = [], []
    for k, snap in enumerate(snaps):
        t = _number(_field(snap, "t", f"snapshot {k}"), f"snapshot {k}.t")
        if times and not times[-1] < t:
            raise SchemaError(f"snapshot {k}: time {t} does not increase (previous {times[-1]})")
        model = _snapshot_model(snap, k, n, weight_kind)
        if n is None:
            n = model.n
        elif model.n != n:
            raise SchemaError(f"snapshot {k}: {model.n} locations, expected {n}")
        times.append(t)
        models.append(model)
    return LocationService(times, models)


def space_to_dict(service: LocationService) -> dict:
    kind = service.models[0].weight_kind
    snaps = []
    for t, m in zip(service.breakpoints, service.models):
        if m.weight_kind != kind:
            raise SchemaError("snapshots mix weight kinds")
        snaps.append({"t": t, "edges": [[s, list(w) if kind == "vec2" else w, d] for s, w, d in m.edges]})
    return {"locations": service.n, "weightKind": kind, "snapshots": snaps}


def load_space(path) -> LocationService:
    return space_from_dict(_read_json(path))


def save_space(service: LocationService, path) -> None:
    Path(path).write_text(json.dumps(space_to_dict(service), indent=1, allow_nan=False) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------------
# verdict export

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(float(v))


def parse_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    v = float(text)
    if math.isnan(v):
        raise SchemaError("NaN verdict value")
    return v


def verdict_rows(signal: SpatioTemporalSignal, locations=None, times=None):
    """``(location, t, value)`` rows ordered by location then time.

    Without ``times`` every breakpoint is listed; otherwise the given times.
    """
    locs = range(signal.n) if locations is None else sorted(set(locations))
    for loc in locs:
        s = signal[loc]
        if times is None:
            yield from ((loc, t, v) for t, v in s.pairs())
        else:
            for t in sorted(set(times)):
                if 0.0 <= t <= s.end:
                    yield loc, t, s.value_at(t)


def verdicts_to_csv(signal: SpatioTemporalSignal, locations=None, times=None) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["location", "t", "value"])
    for loc, t, v in verdict_rows(signal, locations, times):
        w.writerow([loc, repr(float(t)), format_value(v)])
    return buf.getvalue()


def verdicts_to_json(signal: SpatioTemporalSignal, formula: str = "", semantics: str = "",
                     locations=None, times=None) -> str:
    rows = {}
    for loc, t, v in verdict_rows(signal, locations, times):
        rows.setdefault(loc, []).append({"t": t, "value": format_value(v) if not isinstance(v, bool) else v})
    data = {
        "formula": formula,
        "semantics": semantics,
        "horizon": signal.horizon,
        "locations": [{"id": loc, "segments": segs} for loc, segs in rows.items()],
    }
    return json.dumps(data, indent=1) + "\n"


def csv_to_trace(text: str, horizon: float, channel: str = "value") -> Trace:
    """Re-read exported verdict rows as a one-channel trace."""
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0] != ["location", "t", "value"]:
        raise SchemaError("verdict CSV must start with the header location,t,value")
    per_loc: dict[int, list] = {}
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise SchemaError(f"line {k}: expected 3 fields")
        per_loc.setdefault(int(row[0]), []).append((float(row[1]), parse_value(row[2])))
    n = len(per_loc)
    if sorted(per_loc) != list(range(n)):
        raise SchemaError("verdict CSV must list locations 0..n-1")
    vals = [v for pairs in per_loc.values() for _, v in pairs]
    kind = "bool" if vals and all(isinstance(v, bool) for v in vals) else "float"
    signals = [PiecewiseSignal([t for t, _ in per_loc[loc]], [(v,) for _, v in per_loc[loc]], horizon)
               for loc in range(n)]
    return Trace([channel], [kind], signals)
