"""Offline monitoring of spatio-temporal reach and escape formulas."""
from .logic import InterpretationContext, ParseError, ValidationError, expand_derived, parse, to_text, validate
from .monitor import MonitorError, MonitorResult, monitor, monitor_since, monitor_until, reach_fix, escape_fix
from .oracle import oracle_monitor
from .semiring import (SemiringDescriptor, SignalDomain, boolean_domain, boolean_semiring, integer_semiring,
                       maxmin_domain, maxmin_semiring, tropical_semiring)
from .signal import PiecewiseSignal, SpatioTemporalSignal, Trace
from .space import (EUCLID, HOPS, WEIGHT, DistanceFunction, LocationService, SpatialModel, build_euclidean,
                    pairwise_distance, route_distance)

__all__ = [
    "InterpretationContext", "ParseError", "ValidationError", "expand_derived", "parse", "to_text", "validate",
    "MonitorError", "MonitorResult", "monitor", "monitor_since", "monitor_until", "reach_fix", "escape_fix",
    "oracle_monitor", "SemiringDescriptor", "SignalDomain", "boolean_domain", "boolean_semiring",
    "integer_semiring", "maxmin_domain", "maxmin_semiring", "tropical_semiring", "PiecewiseSignal",
    "SpatioTemporalSignal", "Trace", "EUCLID", "HOPS", "WEIGHT", "DistanceFunction", "LocationService",
    "SpatialModel", "build_euclidean", "pairwise_distance", "route_distance",
]
