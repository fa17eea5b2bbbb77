"""Truncated pseudo-differential operator calculus.

An operator is a finite sum of coefficient * D^a terms with integer exponents
a bounded below by a truncation depth; coefficients are exact rational
functions of the time variables (t1 plays the role of the space variable).
Composition uses the generalized Leibniz rule

    D^a o f = sum_i C(a, i) f^(i) D^(a-i),   C(a,0) = 1,
    C(a, i) = C(a, i-1) (a - i + 1) / i,

which terminates for a >= 0 and is cut at the depth floor for a < 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra import RationalFunction, t_var
from .errors import NonMonic

DEFAULT_DEPTH = 6

_X = t_var(1)


def _as_coeff(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction.const(x)


class PsiDO:
    """Finite truncated series sum_a c_a(t) D^a with a >= -depth."""

    __slots__ = ("terms", "depth")

    def __init__(self, terms: Dict[int, RationalFunction],
                 depth: int = DEFAULT_DEPTH):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.depth = depth
        self.terms = {}
        for a, c in terms.items():
            c = _as_coeff(c)
            if a >= -depth and not c.is_zero():
                self.terms[a] = c

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(depth: int = DEFAULT_DEPTH) -> "PsiDO":
        return PsiDO({}, depth)

    @staticmethod
    def identity(depth: int = DEFAULT_DEPTH) -> "PsiDO":
        return PsiDO({0: RationalFunction.one()}, depth)

    @staticmethod
    def d_power(a: int, depth: int = DEFAULT_DEPTH) -> "PsiDO":
        return PsiDO({a: RationalFunction.one()}, depth)

    @staticmethod
    def multiplication(c, depth: int = DEFAULT_DEPTH) -> "PsiDO":
        return PsiDO({0: _as_coeff(c)}, depth)

    # -- structure -------------------------------------------------------------

    def order(self) -> Optional[int]:
        return max(self.terms) if self.terms else None

    def coeff(self, a: int) -> RationalFunction:
        return self.terms.get(a, RationalFunction.zero())

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, PsiDO):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(self.coeff(a).equals(other.coeff(a)) for a in keys)

    def __hash__(self):
        raise TypeError("PsiDO is unhashable")

    # -- linear operations --------------------------------------------------------

    def __add__(self, other: "PsiDO") -> "PsiDO":
        depth = min(self.depth, other.depth)
        out = dict(self.terms)
        for a, c in other.terms.items():
            cur = out.get(a)
            out[a] = c if cur is None else cur + c
        return PsiDO(out, depth)

    def __neg__(self) -> "PsiDO":
        return PsiDO({a: -c for a, c in self.terms.items()}, self.depth)

    def __sub__(self, other: "PsiDO") -> "PsiDO":
        return self + (-other)

    def scale(self, c) -> "PsiDO":
        c = _as_coeff(c)
        return PsiDO({a: v * c for a, v in self.terms.items()}, self.depth)

    # -- composition -----------------------------------------------------------------

    def compose(self, other: "PsiDO") -> "PsiDO":
        depth = min(self.depth, other.depth)
        out: Dict[int, RationalFunction] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                # D^a o (cb D^b): i ranges while a + b - i >= -depth
                imax = a + b + depth
                if imax < 0:
                    continue
                binom = Fraction(1)
                deriv = cb
                i = 0
                while i <= imax:
                    if binom:
                        c = ca * deriv * binom
                        if not c.is_zero():
                            e = a + b - i
                            cur = out.get(e)
                            out[e] = c if cur is None else cur + c
                    elif a >= 0:
                        break
                    i += 1
                    binom = binom * Fraction(a - i + 1, i)
                    deriv = deriv.differentiate(_X)
                    if deriv.is_zero():
                        break
        return PsiDO(out, depth)

    def power(self, n: int) -> "PsiDO":
        if n < 0:
            raise ValueError("negative operator power")
        result = PsiDO.identity(self.depth)
        for _ in range(n):
            result = result.compose(self)
        return result

    # -- projections --------------------------------------------------------------------

    def plus_part(self) -> "PsiDO":
        return PsiDO({a: c for a, c in self.terms.items() if a >= 0}, self.depth)

    def minus_part(self) -> "PsiDO":
        return PsiDO({a: c for a, c in self.terms.items() if a < 0}, self.depth)

    # -- calculus ----------------------------------------------------------------------

    def differentiate_time(self, i: int) -> "PsiDO":
        v = t_var(i)
        return PsiDO({a: c.differentiate(v) for a, c in self.terms.items()},
                     self.depth)

    # -- io ----------------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "terms": [{"exp": a, "coeff": self.terms[a].to_json()}
                      for a in sorted(self.terms, reverse=True)],
        }

    @staticmethod
    def from_json(obj: dict) -> "PsiDO":
        terms = {}
        for t in obj["terms"]:
            terms[int(t["exp"])] = RationalFunction.from_json(t["coeff"])
        return PsiDO(terms, int(obj["depth"]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for a in sorted(self.terms, reverse=True):
            c = self.terms[a]
            cs = str(c)
            if "+" in cs or ("-" in cs[1:] and not c.is_const()):
                cs = f"({cs})"
            parts.append(f"{cs}*D^{a}" if a else cs)
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PsiDO({self})"


def compose(a: PsiDO, b: PsiDO) -> PsiDO:
    return a.compose(b)


def commutator(a: PsiDO, b: PsiDO) -> PsiDO:
    return a.compose(b) - b.compose(a)


def nth_root(op: PsiDO, order: Optional[int] = None,
             depth: Optional[int] = None) -> PsiDO:
    """Monic root R with R^order = op down to the truncation depth.

    Solved triangularly: adding e_m D^{-m} to the current candidate shifts
    the recomposed power at exponent order-1-m by (order * e_m), so each
    defect coefficient determines one new term.
    """
    if order is None:
        order = op.order() or 0
    if order < 1:
        raise ValueError("operator order must be positive")
    if op.order() != order or not op.coeff(order).equals(1):
        raise NonMonic(f"operator is not monic of order {order}")
    depth = op.depth if depth is None else depth
    root = PsiDO.d_power(1, depth)
    for m in range(0, depth + 1):
        defect = op - root.power(order)
        e = defect.coeff(order - 1 - m)
        if not e.is_zero():
            root = root + PsiDO({-m: e * Fraction(1, order)}, depth)
    return root


def lax_residual(op: PsiDO, flow: int, sign: int = 1,
                 root_depth: Optional[int] = None) -> PsiDO:
    """d(op)/dt_flow - sign * [(root^flow)_+, op].

    sign=+1 is the orientation under which the flows of monic operators
    with rational coefficients actually close (pinned by tests); the
    residual is exact whenever flow <= depth + 1.
    """
    order = op.order()
    if order is None or order < 1 or not op.coeff(order).equals(1):
        raise NonMonic("flow residual needs a monic operator")
    root = nth_root(op, order, depth=root_depth)
    p = root.power(flow).plus_part()
    bracket = commutator(p, op)
    return op.differentiate_time(flow) - bracket.scale(Fraction(sign))
