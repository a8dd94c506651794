"""Constraint semirings and signal domains.

Every algorithm in the package is written against these descriptors, so the
same code computes Boolean verdicts and max/min robustness values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Any, Callable, Iterable

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class SemiringDescriptor:
    """Carrier operations ``choose`` (idempotent) and ``combine``.

    ``bottom`` is the identity of ``choose`` and the annihilator of
    ``combine``; ``top`` is the identity of ``combine``.
    """

    name: str
    choose: Callable[[Any, Any], Any]
    combine: Callable[[Any, Any], Any]
    bottom: Any
    top: Any
    is_idempotent: bool = True
    is_total: bool = True
    # preference key (smaller = chosen first) for total semirings; enables sorting
    rank: Callable[[Any], Any] | None = None
    # numpy ufuncs for choose/combine, when the carrier fits in an array
    choose_ufunc: Any = None
    combine_ufunc: Any = None

    def leq(self, a, b) -> bool:
        """Derived order: ``a`` below ``b`` iff choosing between them gives ``b``."""
        return self.choose(a, b) == b

    def choose_all(self, values: Iterable) -> Any:
        return choose_all(self, values)

    def combine_all(self, values: Iterable) -> Any:
        return reduce(self.combine, values, self.top)


@dataclass(frozen=True)
class SignalDomain:
    """An idempotent semiring together with an involutive negation."""

    base: SemiringDescriptor
    negate: Callable[[Any], Any]

    def __post_init__(self):
        if not self.base.is_idempotent:
            raise ValueError(f"signal domain needs an idempotent semiring, got {self.base.name}")

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def choose(self):
        return self.base.choose

    @property
    def combine(self):
        return self.base.combine

    @property
    def bottom(self):
        return self.base.bottom

    @property
    def top(self):
        return self.base.top

    def leq(self, a, b) -> bool:
        return self.base.leq(a, b)

    def choose_all(self, values: Iterable) -> Any:
        return choose_all(self.base, values)

    def combine_all(self, values: Iterable) -> Any:
        return self.base.combine_all(values)


def choose_all(descriptor, values: Iterable) -> Any:
    """Fold ``choose`` over ``values`` starting from ``bottom``.

    The empty collection yields ``bottom``: no candidate means "nothing found".
    """
    if isinstance(descriptor, SignalDomain):
        descriptor = descriptor.base
    return reduce(descriptor.choose, values, descriptor.bottom)


def _or(a, b):
    return a or b


def _and(a, b):
    return a and b


def _not(a):
    return not a


def _neg(a):
    return -a


def _add(a, b):
    return a + b


def _not_rank(a):
    return not a


_BOOLEAN = SemiringDescriptor("boolean", _or, _and, False, True, rank=_not_rank,
                              choose_ufunc=np.logical_or, combine_ufunc=np.logical_and)
_MAXMIN = SemiringDescriptor("maxmin", max, min, -INF, INF, rank=_neg,
                             choose_ufunc=np.maximum, combine_ufunc=np.minimum)
_TROPICAL = SemiringDescriptor("tropical", min, _add, INF, 0, is_idempotent=False, rank=float,
                               choose_ufunc=np.minimum, combine_ufunc=np.add)
_INTEGER = SemiringDescriptor("integer", max, min, 0, INF, rank=_neg,
                              choose_ufunc=np.maximum, combine_ufunc=np.minimum)


def boolean_semiring() -> SemiringDescriptor:
    return _BOOLEAN


def maxmin_semiring() -> SemiringDescriptor:
    return _MAXMIN


def tropical_semiring() -> SemiringDescriptor:
    """``<R>=0 u {inf}, min, +, inf, 0>``; also used for hop counts."""
    return _TROPICAL


def integer_semiring() -> SemiringDescriptor:
    """``<N u {inf}, max, min, 0, inf>``."""
    return _INTEGER


def _vec_max(a, b):
    return (max(a[0], b[0]), max(a[1], b[1]))


def _vec_min(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]))


_EUCLID_VEC = SemiringDescriptor(
    "euclid-vec", _vec_max, _vec_min, (-INF, -INF), (INF, INF), is_total=False
)


def euclid_vec_semiring() -> SemiringDescriptor:
    """Componentwise max/min on plane vectors; the weight algebra of Euclidean models."""
    return _EUCLID_VEC


_BOOLEAN_DOMAIN = SignalDomain(_BOOLEAN, _not)
_MAXMIN_DOMAIN = SignalDomain(_MAXMIN, _neg)


def boolean_domain() -> SignalDomain:
    return _BOOLEAN_DOMAIN


def maxmin_domain() -> SignalDomain:
    return _MAXMIN_DOMAIN


SEMANTICS = {
    "boolean": boolean_domain,
    "maxmin": maxmin_domain,
}

SEMIRINGS = {
    "boolean": boolean_semiring,
    "maxmin": maxmin_semiring,
    "tropical": tropical_semiring,
    "integer": integer_semiring,
    "euclid-vec": euclid_vec_semiring,
}


def domain_by_name(name: str) -> SignalDomain:
    try:
        return SEMANTICS[name]()
    except KeyError:
        raise ValueError(f"unknown semantics {name!r}; expected one of {sorted(SEMANTICS)}") from None


def semiring_by_name(name: str) -> SemiringDescriptor:
    try:
        return SEMIRINGS[name]()
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}") from None
