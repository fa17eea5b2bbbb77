"""Exact determinants over rationals, polynomials, and rational functions."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .algebra import P_ONE, Polynomial, RationalFunction


def cofactor_det(rows: Sequence[Sequence]) -> object:
    """Recursive cofactor expansion.  Test oracle; use only for small sizes."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    for r in rows:
        if len(r) != n:
            raise ValueError("matrix is not square")
    if n == 1:
        return rows[0][0]

    def minor_det(rs):
        if len(rs) == 1:
            return rs[0][0]
        total = None
        for c in range(len(rs)):
            a = rs[0][c]
            if _entry_is_zero(a):
                continue
            sub = [[row[cc] for cc in range(len(rs)) if cc != c] for row in rs[1:]]
            term = a * minor_det(sub)
            if c % 2:
                term = -term
            total = term if total is None else total + term
        if total is None:
            return rs[0][0] - rs[0][0]
        return total

    return minor_det([list(r) for r in rows])


def _entry_is_zero(x) -> bool:
    if isinstance(x, Polynomial):
        return x.is_zero()
    if isinstance(x, RationalFunction):
        return x.is_zero()
    return x == 0


def rational_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Gaussian elimination over exact rationals."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in rows]
    for row in m:
        if len(row) != n:
            raise ValueError("matrix is not square")
    det = Fraction(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if m[r][col]:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        pv = m[col][col]
        det *= pv
        inv = 1 / pv
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                mr, mc = m[r], m[col]
                for c in range(col, n):
                    mr[c] -= f * mc[c]
    return det


def fraction_free_det(rows: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Bareiss fraction-free elimination; every division is exact."""
    n = len(rows)
    if n == 0:
        return P_ONE
    m: List[List[Polynomial]] = []
    for row in rows:
        if len(row) != n:
            raise ValueError("matrix is not square")
        m.append([_as_poly(x) for x in row])
    sign = 1
    prev = P_ONE
    for col in range(n - 1):
        pivot = None
        for r in range(col, n):
            if not m[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            return Polynomial.zero()
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        pv = m[col][col]
        for r in range(col + 1, n):
            mr, mc = m[r], m[col]
            lead = mr[col]
            for c in range(col + 1, n):
                num = mr[c] * pv - lead * mc[c]
                mr[c] = num.exact_div(prev)
            mr[col] = Polynomial.zero()
        prev = pv
    result = m[n - 1][n - 1]
    return -result if sign < 0 else result


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.const(x)
    raise TypeError(f"expected polynomial entry, got {type(x).__name__}")


def rf_det(rows: Sequence[Sequence[RationalFunction]]) -> RationalFunction:
    """Determinant of a rational-function matrix.

    Each column is cleared by the product of its distinct denominators, the
    resulting polynomial matrix goes through Bareiss elimination, and the
    cleared factors divide back out at the end.  No polynomial gcd is used.
    """
    n = len(rows)
    if n == 0:
        return RationalFunction.one()
    m = [[_as_rf_entry(x) for x in row] for row in rows]
    for row in m:
        if len(row) != n:
            raise ValueError("matrix is not square")
    if all(e.is_polynomial() for row in m for e in row):
        poly = fraction_free_det(
            [[e.as_polynomial() for e in row] for row in m])
        return RationalFunction(poly)
    cleared: List[List[Polynomial]] = [[None] * n for _ in range(n)]
    total_den = P_ONE
    for c in range(n):
        distinct = {}
        for r in range(n):
            den = m[r][c].den
            distinct.setdefault(den.canonical_key(), den)
        dens = list(distinct.values())
        col_den = P_ONE
        for d in dens:
            col_den = col_den * d
        total_den = total_den * col_den
        for r in range(n):
            e = m[r][c]
            scale = P_ONE
            for d in dens:
                if d.canonical_key() != e.den.canonical_key():
                    scale = scale * d
            cleared[r][c] = e.num * scale
    poly = fraction_free_det(cleared)
    return RationalFunction(poly, total_den)


def _as_rf_entry(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    if isinstance(x, (int, Fraction)):
        return RationalFunction.const(x)
    raise TypeError(f"expected rational-function entry, got {type(x).__name__}")
