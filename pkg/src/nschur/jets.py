"""Fixed-order Taylor jets in one real variable.

A jet of order n is the list [a_0, ..., a_n] of Taylor coefficients of a
function about a fixed expansion point.  Every operation truncates at the
common order.  Jets make derivatives in the expansion variable exact up
to roundoff, so finite differences are only needed in the remaining
directions.
"""

from __future__ import annotations

import math
from typing import List, Sequence


def jet_const(value: float, order: int) -> List[float]:
    out = [0.0] * (order + 1)
    out[0] = float(value)
    return out


def jet_var(value: float, order: int) -> List[float]:
    """Jet of the coordinate itself about the expansion point."""
    out = jet_const(value, order)
    if order >= 1:
        out[1] = 1.0
    return out


def jet_add(*jets: Sequence[float]) -> List[float]:
    out = [0.0] * len(jets[0])
    for j in jets:
        for m, c in enumerate(j):
            out[m] += c
    return out


def jet_scale(jet: Sequence[float], factor: float) -> List[float]:
    return [factor * c for c in jet]


def jet_mul(a: Sequence[float], b: Sequence[float]) -> List[float]:
    order = len(a) - 1
    out = [0.0] * (order + 1)
    for m, ca in enumerate(a):
        if ca == 0.0:
            continue
        for n, cb in enumerate(b[: order - m + 1]):
            out[m + n] += ca * cb
    return out


def jet_exp(a: Sequence[float]) -> List[float]:
    order = len(a) - 1
    out = [0.0] * (order + 1)
    out[0] = math.exp(a[0])
    for n in range(1, order + 1):
        s = 0.0
        for k in range(1, n + 1):
            s += k * a[k] * out[n - k]
        out[n] = s / n
    return out


def jet_log(a: Sequence[float]) -> List[float]:
    """Jet of log |f|; the leading coefficient must not vanish."""
    a0 = a[0]
    if a0 == 0.0:
        raise ZeroDivisionError("log jet needs a nonzero leading coefficient")
    order = len(a) - 1
    out = [0.0] * (order + 1)
    out[0] = math.log(abs(a0))
    for n in range(1, order + 1):
        s = n * a[n]
        for k in range(1, n):
            s -= k * out[k] * a[n - k]
        out[n] = s / (n * a0)
    return out


def jet_derivative_values(jet: Sequence[float], count: int) -> List[float]:
    """[f, f', ..., f^(count-1)] at the expansion point."""
    if count > len(jet):
        raise ValueError("jet order too low for the requested derivatives")
    out = []
    factorial = 1.0
    for k in range(count):
        if k:
            factorial *= k
        out.append(jet[k] * factorial)
    return out
