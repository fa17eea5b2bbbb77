"""Floating-point verification of the Airy-built wave functions.

Everything here is double precision: Airy evaluation by Maclaurin series
summed in compensated double-double arithmetic, the seven closed-form
wave functions of the two-by-four worked example both as point values
and as Taylor jets in the first variable, Richardson finite differences
for the remaining directions, and the series pipeline that recovers the
block coefficients from the inverse Wronskian matrix and matches block
determinants to wave functions.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence as Seq, Tuple

from .core import ms_entry, stabilization_m
from .errors import (
    DomainExceeded,
    PoleNearSample,
    SingularH0,
    TruncationInsufficient,
)
from .jets import (
    jet_add,
    jet_const,
    jet_derivative_values,
    jet_exp,
    jet_log,
    jet_mul,
    jet_scale,
    jet_var,
)
from .sequences import VirtualSequence, enumerate_skn

# -- double-double helpers ----------------------------------------------------------
# Compensated pairs (hi, lo) representing hi + lo with |lo| half an ulp of
# hi.  Dekker splitting keeps the products exact without relying on a
# fused multiply-add.

_SPLITTER = 134217729.0


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def _fast_two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _two_prod(a: float, b: float) -> Tuple[float, float]:
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(a: Tuple[float, float], b: Tuple[float, float]) -> Tuple[float, float]:
    s, e = _two_sum(a[0], b[0])
    return _fast_two_sum(s, e + a[1] + b[1])


def _dd_neg(a: Tuple[float, float]) -> Tuple[float, float]:
    return -a[0], -a[1]


def _dd_mul(a: Tuple[float, float], b: Tuple[float, float]) -> Tuple[float, float]:
    p, e = _two_prod(a[0], b[0])
    return _fast_two_sum(p, e + a[0] * b[1] + a[1] * b[0])


def _dd_mul_float(a: Tuple[float, float], x: float) -> Tuple[float, float]:
    p, e = _two_prod(a[0], x)
    return _fast_two_sum(p, e + a[1] * x)


def _dd_horner(coeffs: Seq[Tuple[float, float]], x: float) -> Tuple[float, float]:
    acc = (0.0, 0.0)
    for c in reversed(coeffs):
        acc = _dd_add(_dd_mul_float(acc, x), c)
    return acc


def _dd_from_fraction(q: Fraction) -> Tuple[float, float]:
    hi = float(q)
    return hi, float(q - Fraction(hi))


def _dd_from_decimal(d: Decimal) -> Tuple[float, float]:
    hi = float(d)
    return hi, float(d - Decimal(hi))


# Frozen to more digits than a double holds; the product identity
# G13 * G23 = 2 pi / sqrt(3) is asserted by the test suite.
GAMMA_ONE_THIRD = 2.678938534707747633655692940974677644
GAMMA_TWO_THIRDS = 1.354117939426400416945288028154513786

SQRT3 = math.sqrt(3.0)


def _airy_constants_dd() -> Tuple[Tuple[float, float], ...]:
    with localcontext() as ctx:
        ctx.prec = 60
        g13 = Decimal("2.678938534707747633655692940974677644")
        g23 = Decimal("1.354117939426400416945288028154513786")
        ln3 = Decimal(3).ln()
        c1 = (-2 * ln3 / 3).exp() / g23
        c2 = (-ln3 / 3).exp() / g13
        return (_dd_from_decimal(c1), _dd_from_decimal(c2),
                _dd_from_decimal(Decimal(3).sqrt()))


_C1_DD, _C2_DD, _SQRT3_DD = _airy_constants_dd()

# series initial values: Ai = c1 f - c2 g, Bi = sqrt(3) (c1 f + c2 g)
C1 = _C1_DD[0] + _C1_DD[1]
C2 = _C2_DD[0] + _C2_DD[1]

AI_ZERO = C1
BI_ZERO = SQRT3 * C1
DAI_ZERO = -C2
DBI_ZERO = SQRT3 * C2

DEFAULT_TERM_CAP = 160
DEFAULT_MAX_THETA = 8.0


def airy_taylor(w0: float, w1: float, center: float, count: int) -> List[float]:
    """Taylor coefficients of a solution of w'' = z w about the center.

    d_0 = w0, d_1 = w1, and (m+1)(m+2) d_{m+2} = center d_m + d_{m-1}.
    """
    d = [w0, w1]
    for m in range(count - 1):
        prev = d[m - 1] if m >= 1 else 0.0
        d.append((center * d[m] + prev) / ((m + 1) * (m + 2)))
    return d[: count + 1]


_SERIES_DD_CACHE: Dict[int, Tuple[tuple, ...]] = {}


def _series_dd(cap: int) -> Tuple[tuple, ...]:
    """Double-double Maclaurin coefficients of the two seed solutions.

    Exact rationals from the recursion, split once per term cap; the
    tuples cover the seeds, their first and their second derivatives.
    """
    cached = _SERIES_DD_CACHE.get(cap)
    if cached is not None:
        return cached
    fs = [Fraction(1), Fraction(0)]
    gs = [Fraction(0), Fraction(1)]
    for m in range(cap - 1):
        den = (m + 1) * (m + 2)
        fs.append((fs[m - 1] if m >= 1 else Fraction(0)) / den)
        gs.append((gs[m - 1] if m >= 1 else Fraction(0)) / den)
    fs = fs[: cap + 1]
    gs = gs[: cap + 1]

    def pack(seq: Seq[Fraction]) -> tuple:
        return tuple(_dd_from_fraction(q) for q in seq)

    def d1(seq: Seq[Fraction]) -> List[Fraction]:
        return [(m + 1) * c for m, c in enumerate(seq[1:])]

    def d2(seq: Seq[Fraction]) -> List[Fraction]:
        return [(m + 1) * (m + 2) * c for m, c in enumerate(seq[2:])]

    out = (pack(fs), pack(gs), pack(d1(fs)), pack(d1(gs)),
           pack(d2(fs)), pack(d2(gs)))
    _SERIES_DD_CACHE[cap] = out
    return out


class AiryEvaluator:
    """Maclaurin-series Airy values on a bounded real domain.

    The two seed series are summed in double-double arithmetic because
    the positive axis cancels them against each other by six to seven
    digits; the compensated sums hand back values good to the last bit
    of a double.
    """

    def __init__(self, max_theta: float = DEFAULT_MAX_THETA,
                 term_cap: int = DEFAULT_TERM_CAP):
        self.max_theta = float(max_theta)
        self.term_cap = int(term_cap)
        (self._f_dd, self._g_dd, self._df_dd, self._dg_dd,
         self._d2f_dd, self._d2g_dd) = _series_dd(self.term_cap)
        self._cache: Dict[float, Tuple[float, float, float, float]] = {}

    def _check_domain(self, theta: float) -> None:
        if abs(theta) > self.max_theta:
            raise DomainExceeded(
                f"|theta| = {abs(theta):g} exceeds the series domain "
                f"{self.max_theta:g}")

    def values(self, theta: float) -> Tuple[float, float, float, float]:
        """(Ai, Bi, Ai', Bi') at theta."""
        theta = float(theta)
        cached = self._cache.get(theta)
        if cached is not None:
            return cached
        self._check_domain(theta)
        f = _dd_horner(self._f_dd, theta)
        g = _dd_horner(self._g_dd, theta)
        df = _dd_horner(self._df_dd, theta)
        dg = _dd_horner(self._dg_dd, theta)
        c1f = _dd_mul(_C1_DD, f)
        c2g = _dd_mul(_C2_DD, g)
        c1df = _dd_mul(_C1_DD, df)
        c2dg = _dd_mul(_C2_DD, dg)
        ai = _dd_add(c1f, _dd_neg(c2g))
        bi = _dd_mul(_SQRT3_DD, _dd_add(c1f, c2g))
        dai = _dd_add(c1df, _dd_neg(c2dg))
        dbi = _dd_mul(_SQRT3_DD, _dd_add(c1df, c2dg))
        out = tuple(v[0] + v[1] for v in (ai, bi, dai, dbi))
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[theta] = out
        return out

    def wronskian(self, theta: float) -> float:
        ai, bi, dai, dbi = self.values(theta)
        return ai * dbi - dai * bi

    def ode_residual(self, theta: float) -> Tuple[float, float]:
        """w'' - theta w for Ai and Bi by term-wise series differentiation."""
        theta = float(theta)
        self._check_domain(theta)

        def res(series: tuple, d2series: tuple) -> Tuple[float, float]:
            w = _dd_horner(series, theta)
            ww = _dd_horner(d2series, theta)
            return _dd_add(ww, _dd_neg(_dd_mul_float(w, theta)))

        rf = res(self._f_dd, self._d2f_dd)
        rg = res(self._g_dd, self._d2g_dd)
        c1rf = _dd_mul(_C1_DD, rf)
        c2rg = _dd_mul(_C2_DD, rg)
        res_ai = _dd_add(c1rf, _dd_neg(c2rg))
        res_bi = _dd_mul(_SQRT3_DD, _dd_add(c1rf, c2rg))
        return res_ai[0] + res_ai[1], res_bi[0] + res_bi[1]


def _cbrt(v: float) -> float:
    return math.copysign(abs(v) ** (1.0 / 3.0), v)


def airy_x_jets(airy: AiryEvaluator, x: float, t: float, order: int
                ) -> Tuple[List[float], List[float], List[float], List[float]]:
    """Jets in the first variable of Ai, Bi, Ai', Bi' at the self-similar argument.

    The argument is linear in the variable, so the jets are rescaled
    Taylor coefficients about the evaluated argument.
    """
    if 1.0 + 3.0 * t <= 0:
        raise DomainExceeded("the cube root needs 1 + 3t > 0")
    p = _cbrt(1.0 + 3.0 * t)
    mu = 2.0 ** (1.0 / 3.0) / p
    theta0 = mu * x
    ai, bi, dai, dbi = airy.values(theta0)
    at = airy_taylor(ai, dai, theta0, order + 1)
    bt = airy_taylor(bi, dbi, theta0, order + 1)
    powers = [mu ** m for m in range(order + 1)]
    ai_jet = [at[m] * powers[m] for m in range(order + 1)]
    bi_jet = [bt[m] * powers[m] for m in range(order + 1)]
    dai_jet = [(m + 1) * at[m + 1] * powers[m] for m in range(order + 1)]
    dbi_jet = [(m + 1) * bt[m + 1] * powers[m] for m in range(order + 1)]
    return ai_jet, bi_jet, dai_jet, dbi_jet


def _quad_jet(u: List[float], v: List[float],
              c_uu: float, c_uv: float, c_vv: float) -> List[float]:
    """c_uu u^2 + c_uv u v + c_vv v^2 on jets."""
    parts = []
    if c_uu:
        parts.append(jet_scale(jet_mul(u, u), c_uu))
    if c_uv:
        parts.append(jet_scale(jet_mul(u, v), c_uv))
    if c_vv:
        parts.append(jet_scale(jet_mul(v, v), c_vv))
    return jet_add(*parts)


DEFAULT_JET_ORDER = 6


class ExampleTau:
    """The seven closed-form wave functions of the two-by-four example."""

    def __init__(self, airy: Optional[AiryEvaluator] = None):
        self.airy = airy or AiryEvaluator()
        gg = GAMMA_ONE_THIRD * GAMMA_TWO_THIRDS
        self._c25 = gg / 4.0 ** (4.0 / 3.0)
        self._c3 = GAMMA_TWO_THIRDS ** 2 / 8.0
        self._c4 = GAMMA_ONE_THIRD ** 2 / (8.0 * 3.0 ** (5.0 / 6.0))
        self._c6 = GAMMA_TWO_THIRDS ** 2 / 16.0

    def theta(self, x: float, t: float) -> float:
        return 2.0 ** (1.0 / 3.0) * x / _cbrt(1.0 + 3.0 * t)

    def tau0(self, x: float, t: float) -> float:
        return math.exp(-x ** 3 / (6.0 * (1.0 + 3.0 * t)))

    def tau(self, i: int, x: float, y: float, t: float) -> float:
        if not 1 <= i <= 6:
            raise ValueError("wave index must be 1..6")
        if i == 1:
            return 1.0
        p = _cbrt(1.0 + 3.0 * t)
        ai, bi, dai, dbi = self.airy.values(self.theta(x, t))
        c2 = 2.0 ** (1.0 / 3.0)
        if i in (2, 5):
            bracket = (-c2 * x * (3.0 * ai * ai - bi * bi)
                       + p * (3.0 * dai * dai - dbi * dbi))
            base = p * self._c25 * bracket
            return y + base if i == 2 else -y + base
        if i == 3:
            bracket = (-6.0 * x * ai * ai - 4.0 * SQRT3 * x * ai * bi
                       - 2.0 * x * bi * bi
                       + 4.0 ** (1.0 / 3.0) * p
                       * (3.0 * dai * dai + 2.0 * SQRT3 * dai * dbi
                          + dbi * dbi))
            return _cbrt(3.0 + 9.0 * t) * self._c3 * bracket
        if i == 4:
            bracket = (-3.0 * c2 * SQRT3 * x * ai * ai
                       + 6.0 * c2 * x * ai * bi
                       - c2 * SQRT3 * x * bi * bi
                       + p * (3.0 * SQRT3 * dai * dai - 6.0 * dai * dbi
                              + SQRT3 * dbi * dbi))
            return -0.5 + p * self._c4 * bracket
        bracket = (6.0 * x * ai * ai + 4.0 * SQRT3 * x * ai * bi
                   + 2.0 * x * bi * bi
                   - 2.0 ** (2.0 / 3.0) * p
                   * (3.0 * dai * dai + 2.0 * SQRT3 * dai * dbi
                      + dbi * dbi))
        return (-x * (1.0 + 3.0 * t) / 2.0 + y * y
                + _cbrt(3.0 + 9.0 * t) * self._c6 * bracket)

    def tau0_jet(self, x: float, t: float,
                 order: int = DEFAULT_JET_ORDER) -> List[float]:
        X = jet_var(x, order)
        cubic = jet_scale(jet_mul(jet_mul(X, X), X),
                          -1.0 / (6.0 * (1.0 + 3.0 * t)))
        return jet_exp(cubic)

    def tau_jet(self, i: int, x: float, y: float, t: float,
                order: int = DEFAULT_JET_ORDER) -> List[float]:
        """Jet of tau_i in the first variable about x."""
        if not 1 <= i <= 6:
            raise ValueError("wave index must be 1..6")
        if i == 1:
            return jet_const(1.0, order)
        p = _cbrt(1.0 + 3.0 * t)
        aj, bj, daj, dbj = airy_x_jets(self.airy, x, t, order)
        X = jet_var(x, order)
        c2 = 2.0 ** (1.0 / 3.0)
        if i in (2, 5):
            bracket = jet_add(
                jet_scale(jet_mul(X, _quad_jet(aj, bj, 3.0, 0.0, -1.0)), -c2),
                jet_scale(_quad_jet(daj, dbj, 3.0, 0.0, -1.0), p))
            base = jet_scale(bracket, p * self._c25)
            return jet_add(jet_const(y if i == 2 else -y, order), base)
        if i == 3:
            bracket = jet_add(
                jet_scale(jet_mul(X, _quad_jet(aj, bj, 6.0, 4.0 * SQRT3, 2.0)),
                          -1.0),
                jet_scale(_quad_jet(daj, dbj, 3.0, 2.0 * SQRT3, 1.0),
                          4.0 ** (1.0 / 3.0) * p))
            return jet_scale(bracket, _cbrt(3.0 + 9.0 * t) * self._c3)
        if i == 4:
            bracket = jet_add(
                jet_scale(jet_mul(X, _quad_jet(aj, bj, -3.0 * SQRT3, 6.0,
                                               -SQRT3)), c2),
                jet_scale(_quad_jet(daj, dbj, 3.0 * SQRT3, -6.0, SQRT3), p))
            return jet_add(jet_const(-0.5, order),
                           jet_scale(bracket, p * self._c4))
        bracket = jet_add(
            jet_scale(jet_mul(X, _quad_jet(aj, bj, 6.0, 4.0 * SQRT3, 2.0)),
                      1.0),
            jet_scale(_quad_jet(daj, dbj, 3.0, 2.0 * SQRT3, 1.0),
                      -2.0 ** (2.0 / 3.0) * p))
        return jet_add(jet_scale(X, -(1.0 + 3.0 * t) / 2.0),
                       jet_const(y * y, order),
                       jet_scale(bracket, _cbrt(3.0 + 9.0 * t) * self._c6))

    def tau_product(self, weights: Seq[float],
                    x: float, y: float, t: float) -> float:
        """tau0 times the weighted sum of the six wave functions."""
        if len(weights) != 6:
            raise ValueError("expected six weights")
        total = 0.0
        for i, w in enumerate(weights, start=1):
            if w:
                total += w * self.tau(i, x, y, t)
        return self.tau0(x, t) * total

    def tau_product_jet(self, weights: Seq[float], x: float, y: float,
                        t: float, order: int = DEFAULT_JET_ORDER
                        ) -> List[float]:
        """Jet of the scaled combination in the first variable about x."""
        if len(weights) != 6:
            raise ValueError("expected six weights")
        total = jet_const(0.0, order)
        for i, w in enumerate(weights, start=1):
            if w:
                total = jet_add(total,
                                jet_scale(self.tau_jet(i, x, y, t, order), w))
        return jet_mul(self.tau0_jet(x, t, order), total)


# -- Richardson finite differences ------------------------------------------------


def _richardson(values: Seq[float]) -> float:
    """Collapse samples at steps h, h/2, h/4, ... assuming even error terms."""
    vals = list(values)
    level = 1
    while len(vals) > 1:
        fac = 4.0 ** level
        vals = [(fac * b - a) / (fac - 1.0) for a, b in zip(vals, vals[1:])]
        level += 1
    return vals[0]


def first_derivative(f: Callable[[float], float], x: float,
                     h: float = 0.1, levels: int = 3) -> float:
    return _richardson([
        (f(x + h / 2 ** l) - f(x - h / 2 ** l)) / (2.0 * h / 2 ** l)
        for l in range(levels)])


def second_derivative(f: Callable[[float], float], x: float,
                      h: float = 0.1, levels: int = 3) -> float:
    fx = f(x)
    return _richardson([
        (f(x + h / 2 ** l) - 2.0 * fx + f(x - h / 2 ** l))
        / (h / 2 ** l) ** 2
        for l in range(levels)])


def fourth_derivative(f: Callable[[float], float], x: float,
                      h: float = 0.12, levels: int = 2) -> float:
    fx = f(x)
    samples = []
    for l in range(levels):
        hh = h / 2 ** l
        samples.append(
            (f(x - 2 * hh) - 4.0 * f(x - hh) + 6.0 * fx
             - 4.0 * f(x + hh) + f(x + 2 * hh)) / hh ** 4)
    return _richardson(samples)


def mixed_derivative(f: Callable[[float, float], float], a: float, b: float,
                     ha: float = 0.1, hb: float = 0.1,
                     levels: int = 2) -> float:
    samples = []
    for l in range(levels):
        sa = ha / 2 ** l
        sb = hb / 2 ** l
        samples.append(
            (f(a + sa, b + sb) - f(a + sa, b - sb)
             - f(a - sa, b + sb) + f(a - sa, b - sb)) / (4.0 * sa * sb))
    return _richardson(samples)


# -- induced fields -----------------------------------------------------------------


DEFAULT_POLE_FLOOR = 1e-12


def u_field_from_tau(tau: Callable[[float, float, float], float],
                     h: float = 0.05,
                     floor: float = DEFAULT_POLE_FLOOR
                     ) -> Callable[[float, float, float], float]:
    """u = 2 (log |tau|)_xx by Richardson central differences."""

    def field(x: float, y: float, t: float) -> float:
        def logtau(xx: float) -> float:
            v = tau(xx, y, t)
            if abs(v) < floor:
                raise PoleNearSample(
                    f"|tau| = {abs(v):g} below floor {floor:g} "
                    f"near ({xx:g}, {y:g}, {t:g})")
            return math.log(abs(v))
        return 2.0 * second_derivative(logtau, x, h)

    return field


def example_u(i: int, x: float, y: float, t: float, h: float = 0.05,
              floor: float = DEFAULT_POLE_FLOOR,
              waves: Optional[ExampleTau] = None) -> float:
    """The i-th example field 2 (log(tau0 tau_i))_xx at one point."""
    waves = waves or ExampleTau()

    def tau(xx: float, yy: float, tt: float) -> float:
        return waves.tau0(xx, tt) * waves.tau(i, xx, yy, tt)

    return u_field_from_tau(tau, h=h, floor=floor)(x, y, t)


def numeric_kp_residual(field: Callable[[float, float, float], float],
                        point: Tuple[float, float, float],
                        hx: float = 0.08, hy: float = 0.08,
                        ht: float = 0.04, levels: int = 4) -> Dict[str, float]:
    """Finite-difference residual of the 2+1 flow with a stability readout.

    The field is a black box, so every derivative is a Richardson
    difference.  The time step stays small because rational fields of
    interest put a pole at three times the time shift.  The residual is
    recomputed at two thirds of each base step; the difference between
    the two readings is the reported stability indicator.
    """

    def evaluate(sx: float, sy: float, st: float) -> float:
        x, y, t = point
        u = field(x, y, t)
        ux = first_derivative(lambda s: field(s, y, t), x, sx, levels)
        uxx = second_derivative(lambda s: field(s, y, t), x, sx, levels)
        uxxxx = fourth_derivative(lambda s: field(s, y, t), x, 1.5 * sx,
                                  max(2, levels - 1))
        uyy = second_derivative(lambda s: field(x, s, t), y, sy, levels)
        utx = mixed_derivative(lambda s, r: field(s, y, r), x, t,
                               sx, st, levels)
        return (0.75 * uyy - utx + 1.5 * ux * ux + 1.5 * u * uxx
                + 0.25 * uxxxx)

    r1 = evaluate(hx, hy, ht)
    r2 = evaluate(hx * 2.0 / 3.0, hy * 2.0 / 3.0, ht * 2.0 / 3.0)
    return {"residual": r1, "stability": abs(r1 - r2)}


# -- jet-based residuals for the worked example --------------------------------------


def u_x_derivatives(tau_jet: Seq[float], count: int = 5) -> List[float]:
    """[u, u_x, ..., u^(count-1)] at the expansion point, u = 2 (log tau)_xx."""
    if len(tau_jet) < count + 2:
        raise ValueError("tau jet order too low for the requested derivatives")
    l = jet_log(tau_jet)
    return [2.0 * math.factorial(k + 2) * l[k + 2] for k in range(count)]


def kp_residual_via_jets(tau_jet_at: Callable[[float, float, float], List[float]],
                         point: Tuple[float, float, float],
                         hy: float = 0.08, ht: float = 0.04,
                         levels: int = 4,
                         floor: float = DEFAULT_POLE_FLOOR) -> float:
    """Flow residual on u = 2 (log tau)_xx with exact first-variable jets.

    tau_jet_at(x, y, t) must return a jet of order at least six; only
    the second and the third direction fall back to differences.
    """
    x, y, t = point

    def uders(yy: float, tt: float) -> List[float]:
        j = tau_jet_at(x, yy, tt)
        if abs(j[0]) < floor:
            raise PoleNearSample(
                f"|tau| = {abs(j[0]):g} below floor {floor:g} "
                f"near ({x:g}, {yy:g}, {tt:g})")
        return u_x_derivatives(j, 5)

    u, ux, uxx, _, uxxxx = uders(y, t)
    second = []
    for l in range(levels):
        s = hy / 2 ** l
        second.append((uders(y + s, t)[0] - 2.0 * u + uders(y - s, t)[0])
                      / (s * s))
    uyy = _richardson(second)
    first = []
    for l in range(levels):
        s = ht / 2 ** l
        first.append((uders(y, t + s)[1] - uders(y, t - s)[1]) / (2.0 * s))
    utx = _richardson(first)
    return 0.75 * uyy - utx + 1.5 * ux * ux + 1.5 * u * uxx + 0.25 * uxxxx


def hirota_residual_via_jets(tau_jet_at: Callable[[float, float, float], List[float]],
                             point: Tuple[float, float, float],
                             hy: float = 0.08, ht: float = 0.04,
                             levels: int = 4) -> Dict[str, float]:
    """Division-free bilinear residual, scaled by its largest term.

    Safe at zeros of tau, where the quotient field form breaks down; a
    genuine tau function keeps the relative reading at roundoff level
    while a non-tau stays at order one.
    """
    x, y, t = point

    def xd(yy: float, tt: float) -> List[float]:
        return jet_derivative_values(tau_jet_at(x, yy, tt), 5)

    tau, tx, txx, txxx, txxxx = xd(y, t)
    d1, d2 = [], []
    for l in range(levels):
        s = hy / 2 ** l
        up = xd(y + s, t)[0]
        dn = xd(y - s, t)[0]
        d1.append((up - dn) / (2.0 * s))
        d2.append((up - 2.0 * tau + dn) / (s * s))
    ty = _richardson(d1)
    tyy = _richardson(d2)
    e0, e1 = [], []
    for l in range(levels):
        s = ht / 2 ** l
        up = xd(y, t + s)
        dn = xd(y, t - s)
        e0.append((up[0] - dn[0]) / (2.0 * s))
        e1.append((up[1] - dn[1]) / (2.0 * s))
    tt_ = _richardson(e0)
    txt = _richardson(e1)
    terms = (0.75 * tau * tyy, -0.75 * ty * ty, tx * tt_, -tau * txt,
             0.75 * txx * txx, -tx * txxx, 0.25 * tau * txxxx)
    scale = max(abs(v) for v in terms)
    value = sum(terms)
    return {"residual": value, "scale": scale,
            "relative": value / scale if scale else 0.0}


# Shared sample points for the worked example, chosen away from the zero
# sets of all six scaled wave functions so the quotient field is regular
# on every difference stencil.
EXAMPLE_SAMPLE_POINTS = (
    (-1.1, 0.9, 0.0),
    (-0.9, -0.9, 0.2),
    (-1.1, -0.9, 0.1),
    (-0.9, 0.9, 0.1),
    (-1.1, 0.9, 0.2),
)


def example_kp_residual(i: int, point: Tuple[float, float, float],
                        airy: Optional[AiryEvaluator] = None,
                        waves: Optional[ExampleTau] = None,
                        **kwargs) -> float:
    """Flow residual of the i-th example field at one point."""
    waves = waves or ExampleTau(airy)
    weights = [0.0] * 6
    weights[i - 1] = 1.0

    def tau_jet_at(x: float, y: float, t: float) -> List[float]:
        return waves.tau_product_jet(weights, x, y, t)

    return kp_residual_via_jets(tau_jet_at, point, **kwargs)


def example_hirota_residual(weights: Seq[float],
                            point: Tuple[float, float, float],
                            airy: Optional[AiryEvaluator] = None,
                            waves: Optional[ExampleTau] = None,
                            **kwargs) -> Dict[str, float]:
    """Bilinear residual of a weighted combination at one point."""
    waves = waves or ExampleTau(airy)
    ws = list(weights)

    def tau_jet_at(x: float, y: float, t: float) -> List[float]:
        return waves.tau_product_jet(ws, x, y, t)

    return hirota_residual_via_jets(tau_jet_at, point, **kwargs)


# -- block coefficients from the inverse Wronskian matrix ---------------------------


def psi_h_coefficients(x: float, y: float, t: float, K: int,
                       airy: Optional[AiryEvaluator] = None
                       ) -> Dict[Tuple[int, int, int], float]:
    """h[i,j,k] for k <= K as series coefficients of the matrix entries.

    Both arguments of the Airy functions are affine in the series variable,
    so every entry is a finite product of Taylor expansions.
    """
    airy = airy or AiryEvaluator()
    if 1.0 + 3.0 * t <= 0:
        raise DomainExceeded("the sixth root needs 1 + 3t > 0")
    p = _cbrt(1.0 + 3.0 * t)
    p2 = p * p
    theta0 = 2.0 ** (1.0 / 3.0) * x / p
    theta1 = p2 / 2.0 ** (2.0 / 3.0)
    zeta1 = 4.0 ** (-1.0 / 3.0)

    ai_t, bi_t, dai_t, dbi_t = airy.values(theta0)
    at = airy_taylor(ai_t, dai_t, theta0, K + 1)
    bt = airy_taylor(bi_t, dbi_t, theta0, K + 1)

    az = airy_taylor(AI_ZERO, DAI_ZERO, 0.0, K + 1)
    bz = airy_taylor(BI_ZERO, DBI_ZERO, 0.0, K + 1)

    def scaled(coeffs: Seq[float], ratio: float) -> List[float]:
        return [c * ratio ** m for m, c in enumerate(coeffs)]

    def deriv(coeffs: Seq[float]) -> List[float]:
        return [(m + 1) * c for m, c in enumerate(coeffs[1:])]

    AiT = scaled(at, theta1)[: K + 1]
    BiT = scaled(bt, theta1)[: K + 1]
    dAiT = scaled(deriv(at), theta1)[: K + 1]
    dBiT = scaled(deriv(bt), theta1)[: K + 1]
    AiZ = scaled(az, zeta1)[: K + 1]
    BiZ = scaled(bz, zeta1)[: K + 1]
    dAiZ = scaled(deriv(az), zeta1)[: K + 1]
    dBiZ = scaled(deriv(bz), zeta1)[: K + 1]

    def conv(a: Seq[float], b: Seq[float]) -> List[float]:
        out = [0.0] * (K + 1)
        for m, ca in enumerate(a):
            if m > K:
                break
            for n, cb in enumerate(b):
                if m + n > K:
                    break
                out[m + n] += ca * cb
        return out

    def lincomb(series: Seq[Tuple[float, Seq[float]]]) -> List[float]:
        out = [0.0] * (K + 1)
        for c, s in series:
            for m in range(K + 1):
                out[m] += c * s[m]
        return out

    p6 = (1.0 + 3.0 * t) ** (1.0 / 6.0)
    e11 = lincomb([(-1.0 / (2.0 * p6), conv(dAiT, BiZ)),
                   (1.0 / (2.0 * p6), conv(AiZ, dBiT))])
    e12 = lincomb([(-p6 / (2.0 * 2.0 ** (1.0 / 3.0)), conv(AiZ, BiT)),
                   (p6 / (2.0 * 2.0 ** (1.0 / 3.0)), conv(AiT, BiZ))])
    e21 = lincomb([(1.0 / (2.0 ** (2.0 / 3.0) * p6), conv(dAiZ, dBiT)),
                   (-1.0 / (2.0 ** (2.0 / 3.0) * p6), conv(dAiT, dBiZ))])
    e22 = lincomb([(-p6 / 2.0, conv(dAiZ, BiT)),
                   (p6 / 2.0, conv(AiT, dBiZ))])

    phi0 = SQRT3 * GAMMA_ONE_THIRD * GAMMA_TWO_THIRDS
    expy = [1.0]
    for m in range(1, K + 1):
        expy.append(expy[-1] * (-y) / m)
    phi = [phi0 * c for c in expy]

    # The determinant convention indexes block rows by the output position
    # and block columns by the selected sequence value, which transposes the
    # roles the two wave indices play in the inverse matrix.  Keying the
    # series by the swapped index pair keeps the finite determinants equal
    # to the tau-function quotients they are compared against.
    out: Dict[Tuple[int, int, int], float] = {}
    for (i, j), series in (((1, 1), e11), ((2, 1), e12),
                           ((1, 2), e21), ((2, 2), e22)):
        full = conv(phi, series)
        for k in range(K + 1):
            out[(i, j, k)] = full[k]
    return out


def _float_det(rows: List[List[float]]) -> float:
    n = len(rows)
    m = [list(r) for r in rows]
    det = 1.0
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(m[r][c]))
        if m[piv][c] == 0.0:
            return 0.0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for cc in range(c, n):
                m[r][cc] -= f * m[c][cc]
    return det


def numeric_nschur(h: Dict[Tuple[int, int, int], float],
                   seq: VirtualSequence, N: int) -> float:
    """Block determinant quotient with floating-point coefficients."""
    m = stabilization_m(seq, N)
    size = m * N
    rows = []
    for l in range(size):
        row = []
        for col in range(size):
            i, j, k = ms_entry(seq, N, l, col)
            row.append(h.get((i, j, k), 0.0) if k >= 0 else 0.0)
        rows.append(row)
    h0 = [[h.get((i, j, 0), 0.0) for j in range(1, N + 1)]
          for i in range(1, N + 1)]
    d0 = _float_det(h0)
    if d0 == 0.0:
        raise SingularH0("numeric block determinant vanished")
    return _float_det(rows) / d0 ** m


DEFAULT_PIPELINE_POINTS = (
    (0.3, 0.2, 0.1),
    (0.7, -0.4, 0.05),
    (-0.5, 0.3, 0.2),
    (0.9, 0.1, -0.15),
    (0.4, -0.2, 0.12),
    (-0.8, 0.5, 0.08),
)


def psi_inverse_pipeline(points: Optional[Seq[Tuple[float, float, float]]] = None,
                         K: int = 6,
                         ratio_tol: float = 1e-5,
                         stability_tol: float = 1e-7,
                         airy: Optional[AiryEvaluator] = None) -> dict:
    """Match the six block determinants to the six wave functions.

    At each sample point the block coefficients are read off the inverse
    Wronskian matrix, each member of the two-by-four family is evaluated
    as a finite determinant, and the pipeline reports which wave function
    each member is a constant multiple of.  Raising the series order by
    one must not move any value beyond the stability tolerance.
    """
    pts = list(points) if points is not None else list(DEFAULT_PIPELINE_POINTS)
    if len(pts) < 2:
        raise ValueError("need at least two sample points")
    airy = airy or AiryEvaluator()
    waves = ExampleTau(airy)
    members = enumerate_skn(2, 4)

    def member_values(order: int) -> Dict[tuple, List[float]]:
        vals: Dict[tuple, List[float]] = {s.prefix: [] for s in members}
        for (x, y, t) in pts:
            h = psi_h_coefficients(x, y, t, order, airy)
            for s in members:
                vals[s.prefix].append(numeric_nschur(h, s, 2))
        return vals

    base = member_values(K)
    refined = member_values(K + 1)
    drift = 0.0
    for pre in base:
        for a, b in zip(base[pre], refined[pre]):
            drift = max(drift, abs(a - b))
    if drift > stability_tol:
        raise TruncationInsufficient(
            f"values moved by {drift:g} when the series order grew "
            f"from {K} to {K + 1}")

    wave_vals = {i: [waves.tau(i, *pt) for pt in pts] for i in range(1, 7)}

    matches = []
    used = set()
    for s in members:
        fvals = base[s.prefix]
        best = None
        for i in range(1, 7):
            tv = wave_vals[i]
            if any(abs(v) < 1e-9 for v in tv):
                continue
            ratios = [fv / v for fv, v in zip(fvals, tv)]
            mean = sum(ratios) / len(ratios)
            if mean == 0.0:
                continue
            dev = max(abs(r - mean) for r in ratios) / abs(mean)
            if best is None or dev < best[1]:
                best = (i, dev, mean)
        if best is None or best[1] > ratio_tol:
            matches.append({"prefix": s.prefix, "wave": None,
                            "constant": None,
                            "deviation": None if best is None else best[1]})
            continue
        used.add(best[0])
        matches.append({"prefix": s.prefix, "wave": best[0],
                        "constant": best[2], "deviation": best[1]})

    bijection = (len(used) == 6
                 and all(m["wave"] is not None for m in matches))
    return {
        "points": pts,
        "order": K,
        "drift": drift,
        "matches": matches,
        "bijection": bijection,
    }
