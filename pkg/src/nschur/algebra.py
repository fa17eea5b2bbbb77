"""Exact scalar substrate: variables, sparse multivariate polynomials, rational functions.

Coefficients are arbitrary-precision rationals (fractions.Fraction).  Monomials
are sorted tuples of (variable, exponent) pairs; the canonical term order is
graded lexicographic over a fixed global variable order.  Rational functions
are quotient pairs; only integer-content reduction is performed, never a
polynomial gcd, so every operation stays exact and cheap to reason about.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union

from .errors import DegenerateSubstitution, ExponentOverflow

MAX_EXPONENT = 1 << 30

_KIND_RANK = {"t": 0, "h": 1, "pi": 2, "aux": 3}


class Variable:
    """A named indeterminate with a deterministic global sort position.

    Kinds:
      t    -- time variables t1, t2, t3, ... (t1 = x, t2 = y, t3 = t)
      h    -- formal block coefficients h[i,j,k], ordered by (k, i, j)
      pi   -- coordinate weights indexed by an integer tuple
      aux  -- free-form named variables for tests and operator coefficients
    """

    __slots__ = ("kind", "indices", "_key", "_hash")

    def __init__(self, kind: str, indices: tuple):
        self.kind = kind
        self.indices = indices
        if kind == "h":
            i, j, k = indices
            self._key = (1, k, i, j)
        else:
            self._key = (_KIND_RANK[kind],) + indices
        self._hash = hash((kind, indices))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other or (
            isinstance(other, Variable)
            and self.kind == other.kind
            and self.indices == other.indices
        )

    def __lt__(self, other: "Variable") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"Variable({self.kind!r}, {self.indices!r})"

    def __str__(self) -> str:
        if self.kind == "t":
            return f"t{self.indices[0]}"
        if self.kind == "h":
            return "h[%d,%d,%d]" % self.indices
        if self.kind == "pi":
            return "pi[%s]" % ",".join(str(s) for s in self.indices)
        return str(self.indices[0])

    def to_json(self) -> list:
        return [self.kind, *self.indices]

    @staticmethod
    def from_json(obj: list) -> "Variable":
        kind = obj[0]
        if kind == "t":
            return t_var(int(obj[1]))
        if kind == "h":
            return h_var(int(obj[1]), int(obj[2]), int(obj[3]))
        if kind == "pi":
            return pi_var(tuple(int(s) for s in obj[1:]))
        if kind == "aux":
            return aux_var(str(obj[1]))
        raise ValueError(f"unknown variable kind {kind!r}")


@lru_cache(maxsize=None)
def t_var(i: int) -> Variable:
    if i < 1:
        raise ValueError("time variables are indexed from 1")
    return Variable("t", (i,))


@lru_cache(maxsize=None)
def h_var(i: int, j: int, k: int) -> Variable:
    return Variable("h", (i, j, k))


@lru_cache(maxsize=None)
def pi_var(prefix: tuple) -> Variable:
    return Variable("pi", tuple(int(s) for s in prefix))


@lru_cache(maxsize=None)
def aux_var(name: str) -> Variable:
    return Variable("aux", (name,))


X, Y, T = t_var(1), t_var(2), t_var(3)

# A monomial is a tuple of (Variable, exponent) pairs, exponents > 0,
# sorted by the variable's global key.  The empty tuple is the unit.
Monomial = tuple

_ONE_M: Monomial = ()


def _m_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        va, ea = a[ia]
        vb, eb = b[ib]
        if va is vb or va._key == vb._key:
            e = ea + eb
            if e > MAX_EXPONENT:
                raise ExponentOverflow(f"exponent {e} on {va}")
            out.append((va, e))
            ia += 1
            ib += 1
        elif va._key < vb._key:
            out.append((va, ea))
            ia += 1
        else:
            out.append((vb, eb))
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return tuple(out)


def _m_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _m_key(m: Monomial):
    """Sort key: ascending order lists monomials in descending graded-lex."""
    return (-_m_degree(m), tuple((v._key, -e) for v, e in m))


def _m_divides(d: Monomial, m: Monomial) -> bool:
    it = iter(m)
    for vd, ed in d:
        for vm, em in it:
            if vm._key == vd._key:
                if em < ed:
                    return False
                break
            if vm._key > vd._key:
                return False
        else:
            return False
    return True


def _m_div(m: Monomial, d: Monomial) -> Monomial:
    """Quotient of monomials; caller guarantees divisibility."""
    dd = dict(m)
    for v, e in d:
        r = dd[v] - e
        if r:
            dd[v] = r
        else:
            del dd[v]
    return tuple(sorted(dd.items(), key=lambda p: p[0]._key))


Scalar = Union[int, Fraction]


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"not an exact scalar: {c!r}")


class Polynomial:
    """Sparse exact polynomial: dict from monomial to nonzero Fraction."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = terms

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial({})

    @staticmethod
    def const(c) -> "Polynomial":
        c = _as_fraction(c)
        return Polynomial({_ONE_M: c} if c else {})

    @staticmethod
    def variable(v: Variable, exp: int = 1) -> "Polynomial":
        if exp == 0:
            return Polynomial.const(1)
        return Polynomial({((v, exp),): Fraction(1)})

    # -- predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE_M in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.terms[_ONE_M]

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Polynomial.const(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical_key())

    def canonical_key(self) -> tuple:
        return tuple(sorted(self.terms.items(), key=lambda t: _m_key(t[0])))

    # -- ring operations -------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        elif not isinstance(other, Polynomial):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        elif not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if not c:
                return Polynomial.zero()
            return Polynomial({m: c * v for m, v in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.terms or not other.terms:
            return Polynomial.zero()
        # iterate over the shorter operand's terms
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = _m_mul(ma, mb)
                s = out.get(m)
                if s is None:
                    out[m] = ca * cb
                else:
                    s = s + ca * cb
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ---------------------------------------------------------

    def differentiate(self, v: Variable) -> "Polynomial":
        out: dict = {}
        for m, c in self.terms.items():
            for idx, (mv, e) in enumerate(m):
                if mv._key == v._key:
                    if e == 1:
                        nm = m[:idx] + m[idx + 1:]
                    else:
                        nm = m[:idx] + ((mv, e - 1),) + m[idx + 1:]
                    nc = c * e
                    s = out.get(nm)
                    if s is None:
                        out[nm] = nc
                    else:
                        s = s + nc
                        if s:
                            out[nm] = s
                        else:
                            del out[nm]
                    break
        return Polynomial(out)

    def substitute(self, bindings: Mapping[Variable, "RationalFunction"]):
        """Simultaneous exact substitution; unbound variables persist.

        Returns a RationalFunction (bindings may be rational functions).
        """
        result = RationalFunction.zero()
        for m, c in self.terms.items():
            term = RationalFunction.const(c)
            for v, e in m:
                b = bindings.get(v)
                if b is None:
                    term = term * RationalFunction.from_polynomial(
                        Polynomial.variable(v, e))
                else:
                    term = term * _as_rf(b) ** e
            result = result + term
        return result

    def evaluate(self, bindings: Mapping[Variable, Fraction]) -> Fraction:
        """Full evaluation; every variable present must be bound."""
        total = Fraction(0)
        for m, c in self.terms.items():
            val = c
            for v, e in m:
                val = val * _as_fraction(bindings[v]) ** e
            total += val
        return total

    def evaluate_float(self, bindings: Mapping[Variable, float]) -> float:
        total = 0.0
        for m, c in self.terms.items():
            val = float(c)
            for v, e in m:
                val *= float(bindings[v]) ** e
            total += val
        return total

    # -- structure ---------------------------------------------------------

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(_m_degree(m) for m in self.terms)

    def degree_in(self, v: Variable) -> int:
        d = 0
        for m in self.terms:
            for mv, e in m:
                if mv._key == v._key and e > d:
                    d = e
        return d

    def leading(self) -> tuple:
        """(monomial, coefficient) maximal in the canonical graded-lex order."""
        m = min(self.terms, key=_m_key)
        return m, self.terms[m]

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: _m_key(t[0]))

    def exact_div(self, d: "Polynomial") -> "Polynomial":
        """Exact quotient self / d; raises ValueError when not divisible."""
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if d.is_const():
            inv = 1 / d.const_value()
            return self * inv
        q: dict = {}
        r = self
        dm, dc = d.leading()
        while r.terms:
            rm, rc = r.leading()
            if not _m_divides(dm, rm):
                raise ValueError("inexact polynomial division")
            qm = _m_div(rm, dm)
            qc = rc / dc
            q[qm] = qc
            r = r - Polynomial({qm: qc}) * d
        return Polynomial(q)

    def try_div(self, d: "Polynomial") -> Optional["Polynomial"]:
        """Exact quotient self / d, or None when not divisible."""
        try:
            return self.exact_div(d)
        except ValueError:
            return None

    def scale(self, c: Fraction) -> "Polynomial":
        if not c:
            return Polynomial.zero()
        return Polynomial({m: v * c for m, v in self.terms.items()})

    # -- io -----------------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for m, c in self.sorted_terms():
            terms.append([[[v.to_json(), e] for v, e in m], str(c)])
        return {"terms": terms}

    @staticmethod
    def from_json(obj: dict) -> "Polynomial":
        out: dict = {}
        for mono, coeff in obj["terms"]:
            pairs = sorted(
                ((Variable.from_json(v), int(e)) for v, e in mono),
                key=lambda p: p[0]._key,
            )
            c = Fraction(coeff)
            if c:
                out[tuple(pairs)] = c
        return Polynomial(out)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            if c == 1 and m:
                pass
            elif c == -1 and m:
                factors.append("-")
            else:
                factors.append(str(c))
            body = "*".join(
                f"{v}^{e}" if e > 1 else str(v) for v, e in m)
            if body:
                if factors and factors[-1] not in ("", "-"):
                    factors.append("*")
                factors.append(body)
            txt = "".join(factors)
            parts.append(txt)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self) -> str:
        return f"Polynomial({self})"


P_ZERO = Polynomial.zero()
P_ONE = Polynomial.const(1)


def _as_rf(x) -> "RationalFunction":
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction.from_polynomial(x)
    return RationalFunction.const(_as_fraction(x))


def _int_content_normalize(num: Polynomial, den: Polynomial):
    """Scale so both have integer coefficients with joint content 1 and the
    denominator's leading coefficient is positive."""
    coeffs = list(num.terms.values()) + list(den.terms.values())
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    g = 0
    for c in coeffs:
        g = math.gcd(g, abs(c.numerator) * (lcm // c.denominator))
    factor = Fraction(lcm, g) if g else Fraction(1)
    _, lead = den.leading()
    if lead < 0:
        factor = -factor
    if factor != 1:
        num = num.scale(factor)
        den = den.scale(factor)
    return num, den


class RationalFunction:
    """Exact quotient of polynomials with a nonzero denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial = P_ONE):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num = P_ZERO
            self.den = P_ONE
            return
        if not den.is_const():
            q = num.try_div(den)
            if q is not None:
                num, den = q, P_ONE
        num, den = _int_content_normalize(num, den)
        self.num = num
        self.den = den

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero() -> "RationalFunction":
        return RationalFunction(P_ZERO)

    @staticmethod
    def one() -> "RationalFunction":
        return RationalFunction(P_ONE)

    @staticmethod
    def const(c) -> "RationalFunction":
        return RationalFunction(Polynomial.const(c))

    @staticmethod
    def from_polynomial(p: Polynomial) -> "RationalFunction":
        return RationalFunction(p)

    @staticmethod
    def variable(v: Variable) -> "RationalFunction":
        return RationalFunction(Polynomial.variable(v))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def as_polynomial(self) -> Polynomial:
        if not self.den.is_const():
            raise ValueError("not a polynomial")
        return self.num * (1 / self.den.const_value())

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Fraction(0)
        return self.num.const_value() / self.den.const_value()

    def equals(self, other) -> bool:
        """Exact equality by cross-multiplication."""
        other = _as_rf(other)
        return (self.num * other.den) == (other.num * self.den)

    def __eq__(self, other) -> bool:
        if isinstance(other, (RationalFunction, Polynomial, int, Fraction)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        raise TypeError("RationalFunction is unhashable")

    # -- field operations -----------------------------------------------------

    def __add__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den.terms == other.den.terms:
            return RationalFunction(self.num + other.num, self.den)
        # nested-power denominators: keep the larger one when divisible
        q = other.den.try_div(self.den)
        if q is not None:
            return RationalFunction(self.num * q + other.num, other.den)
        q = self.den.try_div(other.den)
        if q is not None:
            return RationalFunction(self.num + other.num * q, self.den)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-_as_rf(other))

    def __rsub__(self, other) -> "RationalFunction":
        return (-self) + _as_rf(other)

    def __mul__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if self.is_zero() or other.is_zero():
            return RationalFunction.zero()
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return _as_rf(other) / self

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n)

    # -- calculus ---------------------------------------------------------------

    def differentiate(self, v: Variable) -> "RationalFunction":
        if self.den.is_const():
            return RationalFunction(self.num.differentiate(v), self.den)
        n, d = self.num, self.den
        return RationalFunction(
            n.differentiate(v) * d - n * d.differentiate(v), d * d)

    def substitute(self, bindings) -> "RationalFunction":
        den = self.den.substitute(bindings)
        if den.is_zero():
            raise DegenerateSubstitution("denominator vanished under substitution")
        return self.num.substitute(bindings) / den

    def evaluate(self, bindings: Mapping[Variable, Fraction]) -> Fraction:
        d = self.den.evaluate(bindings)
        if d == 0:
            raise ZeroDivisionError("denominator vanished at the sample point")
        return self.num.evaluate(bindings) / d

    def evaluate_float(self, bindings: Mapping[Variable, float]) -> float:
        return self.num.evaluate_float(bindings) / self.den.evaluate_float(bindings)

    # -- io ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(obj: dict) -> "RationalFunction":
        return RationalFunction(
            Polynomial.from_json(obj["num"]), Polynomial.from_json(obj["den"]))

    def __str__(self) -> str:
        if self.den == P_ONE:
            return str(self.num)
        num = str(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        den = str(self.den)
        if len(self.den.terms) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


RF_ZERO = RationalFunction.zero()
RF_ONE = RationalFunction.one()


def rf_equal(a, b) -> bool:
    """Module-level exact equality for polynomials / rational functions."""
    return _as_rf(a).equals(_as_rf(b))
