"""Block coefficient models and the determinant functions they induce.

A model supplies N x N blocks H_0, H_1, H_2, ... (entry h[i,j,k] sits at
row i, column j of block k).  The blocks fill an infinite matrix whose
entry at row l, column c is h[1 + (l mod N), 1 + (c mod N), k] with block
offset k = floor(l/N) - floor(c/N), zero for k < 0; each sequence S
relabels the columns, replacing c by s_c in that rule.  The function value
is the upper-left mN x mN minor over (det H_0)^m, where the block count m
must satisfy s_i = i for every i >= mN.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence as Seq, Tuple

from .algebra import (
    P_ONE,
    Polynomial,
    RationalFunction,
    h_var,
    t_var,
)
from .determinant import cofactor_det, fraction_free_det, rf_det
from .errors import SingularH0
from .sequences import VirtualSequence, from_partition

FORMAL = "formal"
ASSIGNED = "assigned"
EXPONENTIAL = "exponential"


class HModel:
    """Coefficient blocks in one of three modes.

    formal      -- h[i,j,k] are independent polynomial variables
    assigned    -- finitely many blocks with exact rational-function values
    exponential -- N = 1 with h_k read off exp(sign * sum_i t_i z^i)
    """

    def __init__(self, N: int, mode: str, values: Optional[Dict] = None,
                 K: Optional[int] = None, sign: int = 1):
        if N < 1:
            raise ValueError("block size N must be positive")
        if mode not in (FORMAL, ASSIGNED, EXPONENTIAL):
            raise ValueError(f"unknown model mode {mode!r}")
        self.N = N
        self.mode = mode
        self.sign = sign
        if mode == ASSIGNED:
            if values is None:
                raise ValueError("assigned mode requires values")
            self.values = {}
            kmax = 0
            for (i, j, k), v in values.items():
                if not (1 <= i <= N and 1 <= j <= N and k >= 0):
                    raise ValueError(f"bad block index ({i},{j},{k})")
                rf = v if isinstance(v, RationalFunction) else (
                    RationalFunction(v) if isinstance(v, Polynomial)
                    else RationalFunction.const(v))
                if not rf.is_zero():
                    self.values[(i, j, k)] = rf
                    kmax = max(kmax, k)
            self.K = kmax if K is None else K
        elif mode == EXPONENTIAL:
            if N != 1:
                raise ValueError("exponential mode is defined for N = 1")
            if sign not in (1, -1):
                raise ValueError("sign flag must be +1 or -1")
            self.values = None
            self.K = K
            self._h_cache: List[Polynomial] = [P_ONE]
        else:
            self.values = None
            self.K = K
        self._det_h0: Optional[RationalFunction] = None

    # -- entries -----------------------------------------------------------

    def entry(self, i: int, j: int, k: int) -> RationalFunction:
        if k < 0:
            return RationalFunction.zero()
        if self.K is not None and k > self.K:
            return RationalFunction.zero()
        if self.mode == FORMAL:
            return RationalFunction.variable(h_var(i, j, k))
        if self.mode == ASSIGNED:
            return self.values.get((i, j, k), RationalFunction.zero())
        return RationalFunction(self.h_poly(k))

    def h_poly(self, k: int) -> Polynomial:
        """Exponential-mode series coefficient h_k (a polynomial in t_i)."""
        if self.mode != EXPONENTIAL:
            raise ValueError("h_poly is only defined in exponential mode")
        cache = self._h_cache
        while len(cache) <= k:
            n = len(cache)
            acc = Polynomial.zero()
            for i in range(1, n + 1):
                acc = acc + Polynomial.variable(t_var(i)) * cache[n - i] * Fraction(i * self.sign)
            cache.append(acc * Fraction(1, n))
        return cache[k]

    def h0_matrix(self) -> List[List[RationalFunction]]:
        return [[self.entry(i, j, 0) for j in range(1, self.N + 1)]
                for i in range(1, self.N + 1)]

    def det_h0(self) -> RationalFunction:
        if self._det_h0 is None:
            self._det_h0 = rf_det(self.h0_matrix())
        return self._det_h0

    # -- io ------------------------------------------------------------------

    def to_json(self) -> dict:
        if self.mode == ASSIGNED:
            entries = []
            for (i, j, k) in sorted(self.values):
                entries.append({"i": i, "j": j, "k": k,
                                "value": self.values[(i, j, k)].to_json()})
            return {"N": self.N, "mode": self.mode, "entries": entries}
        out = {"N": self.N, "mode": self.mode}
        if self.K is not None:
            out["K"] = self.K
        if self.mode == EXPONENTIAL:
            out["sign"] = self.sign
        return out

    @staticmethod
    def from_json(obj: dict) -> "HModel":
        mode = obj["mode"]
        N = int(obj["N"])
        if mode == ASSIGNED:
            values = {}
            for e in obj["entries"]:
                v = e["value"]
                if isinstance(v, str):
                    rf = RationalFunction.const(Fraction(v))
                else:
                    rf = RationalFunction.from_json(v)
                values[(int(e["i"]), int(e["j"]), int(e["k"]))] = rf
            return HModel(N, ASSIGNED, values=values, K=obj.get("K"))
        return HModel(N, mode, K=obj.get("K"), sign=int(obj.get("sign", 1)))


def formal_model(N: int, K: Optional[int] = None) -> HModel:
    return HModel(N, FORMAL, K=K)


def exponential_model(sign: int = 1, K: Optional[int] = None) -> HModel:
    return HModel(1, EXPONENTIAL, K=K, sign=sign)


def assigned_model(N: int, values: Dict) -> HModel:
    return HModel(N, ASSIGNED, values=values)


# -- the column-relabelled block matrix --------------------------------------


def ms_entry(seq: VirtualSequence, N: int, l: int, col: int) -> Tuple[int, int, int]:
    """Block indices (i, j, k) of the matrix entry at row l, column col.

    The block row index follows l and the block column index follows the
    sequence value s_col; the block offset k grows by one for each full
    block the row leads the relabelled column by.
    """
    sc = seq.s(col)
    return (1 + l % N, 1 + sc % N, l // N - sc // N)


def stabilization_m(seq: VirtualSequence, N: int) -> int:
    """Smallest valid block count: s_i = i for every i >= mN.

    The prefix of length L leaves s_i = i for i >= L, so m = ceil(L / N),
    and at least one block is always used.
    """
    L = len(seq.prefix)
    return max(1, -(-L // N))


def ms_matrix(seq: VirtualSequence, model: HModel,
              m: Optional[int] = None) -> List[List[RationalFunction]]:
    N = model.N
    if m is None:
        m = stabilization_m(seq, N)
    size = m * N
    return [[model.entry(*ms_entry(seq, N, l, c)) for c in range(size)]
            for l in range(size)]


def nschur(seq: VirtualSequence, model: HModel,
           m_override: Optional[int] = None) -> RationalFunction:
    """det of the truncated column-relabelled matrix over (det H_0)^m."""
    m = stabilization_m(seq, model.N)
    if m_override is not None:
        if m_override < m:
            raise ValueError(f"m_override {m_override} below minimum {m}")
        m = m_override
    d0 = model.det_h0()
    if d0.is_zero():
        raise SingularH0("det H_0 = 0")
    num = rf_det(ms_matrix(seq, model, m))
    return num / d0 ** m


# -- the N = 1 exponential specialization -------------------------------------


def schur_polynomial(parts: Seq[int], sign: int = 1) -> Polynomial:
    """Partition-indexed polynomial via the N = 1 exponential model."""
    seq = from_partition(parts)
    model = exponential_model(sign=sign)
    return nschur(seq, model).as_polynomial()


def jacobi_trudi(parts: Seq[int], sign: int = 1) -> Polynomial:
    """Independent oracle: det(h_{parts_i - i + j}) by cofactor expansion."""
    parts = tuple(int(p) for p in parts if int(p) != 0)
    model = exponential_model(sign=sign)
    ell = len(parts)
    if ell == 0:
        return P_ONE
    rows = []
    for i in range(1, ell + 1):
        row = []
        for j in range(1, ell + 1):
            idx = parts[i - 1] - i + j
            row.append(model.h_poly(idx) if idx >= 0 else Polynomial.zero())
        rows.append(row)
    return cofactor_det(rows)


# -- grading -------------------------------------------------------------------


def h_weight(N: int, i: int, j: int, k: int) -> int:
    return k * N + i - j


def homogeneous_h_weight(poly: Polynomial, N: int) -> Optional[int]:
    """The common grading weight of all monomials, or None if mixed.

    Every variable must be an h symbol; t/pi/aux variables have no h-grading.
    """
    w: Optional[int] = None
    for mono in poly.terms:
        mw = 0
        for v, e in mono:
            if v.kind != "h":
                raise ValueError(f"variable {v} carries no h-grading")
            i, j, k = v.indices
            mw += e * h_weight(N, i, j, k)
        if w is None:
            w = mw
        elif w != mw:
            return None
    return w
