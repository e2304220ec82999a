"""Element algebras for the sparse kernels.

A semiring bundles scalar ``add``/``multiply`` with their identities.  The
optional ``ufunc_add``/``ufunc_mul`` fields are numpy equivalents used for
vectorised paths (canonicalisation, dense reference arithmetic); kernels
never depend on them.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np


@dataclass(frozen=True)
class Semiring:
    name: str
    add: Callable[[Any, Any], Any]
    multiply: Callable[[Any, Any], Any]
    zero: Any
    one: Any
    dtype: Any = np.float64
    ufunc_add: Any = None
    ufunc_mul: Any = None

    def is_zero(self, x) -> bool:
        return x == self.zero

    def zero_mask(self, values: np.ndarray) -> np.ndarray:
        """Boolean mask of entries exactly equal to ``zero`` (no tolerance)."""
        return np.asarray(values) == self.zero

    def cast(self, values) -> np.ndarray:
        return np.asarray(values, dtype=self.dtype)

    def __repr__(self) -> str:
        return f"Semiring({self.name})"


PLUS_TIMES = Semiring(
    "plus_times", operator.add, operator.mul, 0.0, 1.0,
    np.float64, np.add, np.multiply,
)

INT_PLUS_TIMES = Semiring(
    "int_plus_times", operator.add, operator.mul, 0, 1,
    np.int64, np.add, np.multiply,
)

BOOL_OR_AND = Semiring(
    "bool_or_and", operator.or_, operator.and_, False, True,
    np.bool_, np.logical_or, np.logical_and,
)

# Tropical: "add" is min, "multiply" is +, +inf is the additive identity.
MIN_PLUS = Semiring(
    "min_plus", min, operator.add, math.inf, 0.0,
    np.float64, np.minimum, np.add,
)

SEMIRINGS = {sr.name: sr for sr in (PLUS_TIMES, INT_PLUS_TIMES, BOOL_OR_AND, MIN_PLUS)}


def get_semiring(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}; choose from {sorted(SEMIRINGS)}") from None
