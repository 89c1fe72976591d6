"""Small numeric helpers shared across the package."""

from __future__ import annotations

import numpy as np


def ipow(x, n: int):
    """Integer power by repeated multiplication.

    Unlike ``x ** n`` routed through exp/log, this is exact in sign for
    negative bases and keeps negation bit-exact: ``ipow(-x, n)`` equals
    ``(-1)**n * ipow(x, n)`` down to the last bit. Works on scalars and
    ndarrays. ``n`` must be a nonnegative integer.
    """
    if n < 0:
        raise ValueError("ipow exponent must be >= 0")
    if n == 0:
        return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    out = x
    for _ in range(n - 1):
        out = out * x
    return out


def format_float(x: float) -> str:
    """Shortest decimal string that parses back to the same float64."""
    return repr(float(x))


def as_readonly(a) -> np.ndarray:
    """Copy input to a float64 array and lock it against writes."""
    arr = np.array(a, dtype=float, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr
