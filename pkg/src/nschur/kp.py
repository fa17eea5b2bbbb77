"""Exact residuals for the 2+1 dispersive flow in both standard forms.

The bilinear form acts on a wave function tau(t1, t2, t3); the nonlinear
form acts on u = 2 (log tau)_xx.  Block-size-one determinant functions
solve both, and a six-term linear combination over the smallest
two-by-four family solves them exactly when its weights satisfy the
single quadratic exchange relation of that family.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .algebra import (
    Polynomial,
    RationalFunction,
    T,
    X,
    Y,
    pi_var,
    rf_equal,
)
from .core import exponential_model, nschur
from .grassmann import exchange_relations
from .sequences import VirtualSequence, enumerate_skn, subset_label

Field = Union[Polynomial, RationalFunction]


def hirota_residual(tau: Field) -> Field:
    """Expanded bilinear residual; identically zero exactly on solutions.

    Equals (D1^4 - 4 D1 D3 + 3 D2^2) tau.tau / 8 written out in ordinary
    derivatives.
    """
    tx = tau.differentiate(X)
    txx = tx.differentiate(X)
    txxx = txx.differentiate(X)
    txxxx = txxx.differentiate(X)
    ty = tau.differentiate(Y)
    tyy = ty.differentiate(Y)
    tt = tau.differentiate(T)
    txt = tx.differentiate(T)
    q34 = Fraction(3, 4)
    return (tau * tyy * q34 - ty * ty * q34 + tx * tt - tau * txt
            + txx * txx * q34 - tx * txxx + tau * txxxx * Fraction(1, 4))


def kp_residual(u: Field) -> Field:
    """(3/4) u_yy - d/dx (u_t - (6 u u_x + u_xxx) / 4), fully expanded."""
    ux = u.differentiate(X)
    uxx = ux.differentiate(X)
    uxxxx = uxx.differentiate(X).differentiate(X)
    uyy = u.differentiate(Y).differentiate(Y)
    utx = u.differentiate(T).differentiate(X)
    return (uyy * Fraction(3, 4) - utx + ux * ux * Fraction(3, 2)
            + u * uxx * Fraction(3, 2) + uxxxx * Fraction(1, 4))


def tau_to_u(tau: Field) -> RationalFunction:
    """u = 2 (log tau)_xx as an exact rational function."""
    if isinstance(tau, Polynomial):
        tau = RationalFunction(tau)
    tx = tau.differentiate(X)
    txx = tx.differentiate(X)
    return (txx * tau - tx * tx) * 2 / (tau * tau)


# -- the smallest coordinate family ------------------------------------------------


def family_tau(k: int = 2, n: int = 4,
               weights: Optional[Dict[Tuple[int, ...], object]] = None
               ) -> Polynomial:
    """Weighted sum of block-size-one determinant functions over (k, n).

    Without weights each member S gets its own formal coordinate variable;
    with weights, keys are sequence prefixes and values are exact scalars.
    """
    model = exponential_model()
    total = Polynomial.zero()
    for seq in enumerate_skn(k, n):
        f = nschur(seq, model).as_polynomial()
        if weights is None:
            w = Polynomial.variable(pi_var(seq.prefix))
        else:
            if seq.prefix not in weights:
                continue
            w = weights[seq.prefix]
            if not isinstance(w, Polynomial):
                w = Polynomial.const(w)
        total = total + w * f
    return total


def _split_monomial(m) -> Tuple[tuple, tuple]:
    tpart = tuple((v, e) for v, e in m if v.kind == "t")
    ppart = tuple((v, e) for v, e in m if v.kind != "t")
    return tpart, ppart


def _normalize(p: Polynomial) -> Polynomial:
    _, lead = p.leading()
    return p.scale(1 / lead)


def quadric_extraction(k: int = 2, n: int = 4) -> dict:
    """Factor the bilinear residual of the formal (k, n) combination.

    Groups the residual by monomials in the time variables; every nonzero
    group must be one and the same quadratic form in the coordinate
    variables, and that form is compared with the exchange relations of
    the family under the canonical subset labeling.
    """
    tau = family_tau(k, n)
    res = hirota_residual(tau)
    groups: Dict[tuple, dict] = {}
    for m, c in res.terms.items():
        tpart, ppart = _split_monomial(m)
        groups.setdefault(tpart, {})[ppart] = c
    forms = [Polynomial(g) for g in groups.values()]
    forms = [f for f in forms if not f.is_zero()]
    if not forms:
        return {"tau": tau, "residual": res, "group_count": 0,
                "proportional": True, "quadric": Polynomial.zero(),
                "matched_relations": [], "labeling": {}}
    base = _normalize(forms[0])
    proportional = all(_normalize(f).terms == base.terms for f in forms[1:])

    labeling = {seq.prefix: subset_label(seq, k, n)
                for seq in enumerate_skn(k, n)}
    by_label = {lbl: pre for pre, lbl in labeling.items()}
    matched = []
    for rel in exchange_relations(k, n):
        expected = Polynomial.zero()
        for c, a, b in rel:
            mono = (Polynomial.variable(pi_var(by_label[a]))
                    * Polynomial.variable(pi_var(by_label[b])))
            expected = expected + mono * c
        if _normalize(expected).terms == base.terms:
            matched.append(rel)
    return {
        "tau": tau,
        "residual": res,
        "group_count": len(forms),
        "proportional": proportional,
        "quadric": base,
        "matched_relations": matched,
        "labeling": labeling,
    }


def tau_u_consistency(tau: Field) -> dict:
    """Both residuals for one wave function, plus the induced field."""
    u = tau_to_u(tau)
    hr = hirota_residual(tau)
    kr = kp_residual(u)
    return {
        "u": u,
        "hirota_residual": hr,
        "kp_residual": kr,
        "hirota_zero": hr.is_zero(),
        "kp_zero": kr.is_zero(),
    }
