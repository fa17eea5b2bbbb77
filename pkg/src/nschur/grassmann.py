"""Finite frames, their coordinate minors, and the block-operator expansion.

A frame stores r nontrivial columns w_0..w_{r-1} supported on basis indices
{-d..r-1}; every later column is the basis vector of its own index.  The
coordinate indexed by a sequence S is the determinant of the rows S of the
column matrix, which collapses to a finite minor.  A block operator g acts on
the basis through its blocks H_k; the pairing of g with a frame expands over
exactly the sequences supported by the frame, with the block-determinant
functions as coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence as Seq, Tuple

from .algebra import RationalFunction, rf_equal
from .core import HModel, nschur, stabilization_m
from .determinant import rational_det, rf_det
from .errors import InvalidRange, NonStabilizing, RankDeficient, SingularH0
from .sequences import (
    VirtualSequence,
    enumerate_skn,
    subset_label,
)

Label = Tuple[int, ...]


# -- finite coordinate vectors -------------------------------------------------


class PluckerVector:
    """Exact coordinates of a point of the (k, n) family, indexed by labels."""

    def __init__(self, k: int, n: int, coords: Dict[Label, Fraction]):
        if not (1 <= k < n):
            raise InvalidRange(f"need 1 <= k < n, got k={k} n={n}")
        self.k = k
        self.n = n
        self.coords = {}
        for label, c in coords.items():
            label = tuple(label)
            if len(label) != k or list(label) != sorted(set(label)):
                raise ValueError(f"bad label {label}")
            if not all(1 <= i <= n for i in label):
                raise ValueError(f"label {label} out of range 1..{n}")
            self.coords[label] = Fraction(c)

    def coord(self, label: Label) -> Fraction:
        return self.coords.get(tuple(label), Fraction(0))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords.values())


def minors(matrix: Seq[Seq], k: Optional[int] = None) -> PluckerVector:
    """All maximal minors of a k x n matrix, keyed by column subsets."""
    rows = [[Fraction(x) for x in row] for row in matrix]
    if k is None:
        k = len(rows)
    if len(rows) != k:
        raise ValueError("matrix must have exactly k rows")
    n = len(rows[0]) if rows else 0
    for row in rows:
        if len(row) != n:
            raise ValueError("ragged matrix")
    if not (1 <= k < n):
        raise InvalidRange(f"need 1 <= k < n, got k={k} n={n}")
    coords = {}
    any_nonzero = False
    for cols in combinations(range(1, n + 1), k):
        sub = [[rows[i][c - 1] for c in cols] for i in range(k)]
        val = rational_det(sub)
        coords[cols] = val
        any_nonzero = any_nonzero or val != 0
    if not any_nonzero:
        raise RankDeficient("matrix has rank below k; all minors vanish")
    return PluckerVector(k, n, coords)


# -- quadratic exchange relations ---------------------------------------------

# A relation is a tuple of (coefficient, labelA, labelB) terms meaning
# sum coeff * p[labelA] * p[labelB] = 0, with labels sorted and the pair
# {A, B} stored in a canonical order.


def _sort_with_sign(idx: Tuple[int, ...]) -> Tuple[int, Optional[Label]]:
    lst = list(idx)
    if len(set(lst)) != len(lst):
        return 0, None
    sign = 1
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return sign, tuple(lst)


def exchange_relations(k: int, n: int) -> List[Tuple]:
    """Deduplicated quadratic relations among the (k, n) coordinates.

    One candidate arises from each (k-1)-subset I and (k+1)-subset J of
    {1..n}: the signed sum over moving one element of J into I.  Candidates
    that are identically zero or scalar multiples of earlier ones are dropped.
    """
    if not (1 <= k < n):
        raise InvalidRange(f"need 1 <= k < n, got k={k} n={n}")
    universe = range(1, n + 1)
    seen = {}
    out: List[Tuple] = []
    for I in combinations(universe, k - 1):
        for J in combinations(universe, k + 1):
            terms: Dict[Tuple[Label, Label], Fraction] = {}
            for l, jl in enumerate(J):
                sa, A = _sort_with_sign(I + (jl,))
                if sa == 0:
                    continue
                rest = J[:l] + J[l + 1:]
                key = (A, rest) if A <= rest else (rest, A)
                c = Fraction((-1) ** l * sa)
                terms[key] = terms.get(key, Fraction(0)) + c
            terms = {p: c for p, c in terms.items() if c}
            if not terms:
                continue
            first = min(terms)
            lead = terms[first]
            normd = tuple(sorted((p, c / lead) for p, c in terms.items()))
            if normd in seen:
                continue
            seen[normd] = True
            out.append(tuple((c, p[0], p[1]) for p, c in normd))
    return out


def relation_value(relation: Tuple, vec: PluckerVector) -> Fraction:
    total = Fraction(0)
    for c, a, b in relation:
        total += c * vec.coord(a) * vec.coord(b)
    return total


def plucker_check(vec: PluckerVector) -> bool:
    """True when every exchange relation vanishes on the coordinates."""
    if vec.is_zero():
        raise RankDeficient("all coordinates vanish")
    return all(relation_value(rel, vec) == 0
               for rel in exchange_relations(vec.k, vec.n))


# -- frames ---------------------------------------------------------------------


class FiniteFrame:
    """r nontrivial columns over basis indices {-d..r-1}, identity beyond."""

    def __init__(self, N: int, r: int, d: int, columns: Seq[Dict[int, Fraction]]):
        if N < 1:
            raise ValueError("N must be positive")
        if r < 0 or d < 0:
            raise ValueError("r and d must be nonnegative")
        if len(columns) != r:
            raise ValueError(f"expected {r} columns, got {len(columns)}")
        self.N = N
        self.r = r
        self.d = d
        self.columns: List[Dict[int, Fraction]] = []
        for col in columns:
            clean = {}
            for idx, c in col.items():
                idx = int(idx)
                c = Fraction(c)
                if not (-d <= idx <= r - 1):
                    raise ValueError(
                        f"column entry at index {idx} outside [-{d}, {r - 1}]")
                if c:
                    clean[idx] = c
            self.columns.append(clean)
        if r and self._rank() < r:
            raise RankDeficient("frame columns are linearly dependent")

    def _rank(self) -> int:
        rows = sorted({i for col in self.columns for i in col})
        mat = [[col.get(i, Fraction(0)) for col in self.columns] for i in rows]
        rank = 0
        ncols = len(self.columns)
        for c in range(ncols):
            piv = None
            for rr in range(rank, len(mat)):
                if mat[rr][c]:
                    piv = rr
                    break
            if piv is None:
                continue
            mat[rank], mat[piv] = mat[piv], mat[rank]
            pv = mat[rank][c]
            for rr in range(rank + 1, len(mat)):
                f = mat[rr][c] / pv
                if f:
                    for cc in range(c, ncols):
                        mat[rr][cc] -= f * mat[rank][cc]
            rank += 1
        return rank

    def column_entry(self, b: int, idx: int) -> Fraction:
        """Coefficient of basis index idx in column b (identity for b >= r)."""
        if b >= self.r:
            return Fraction(1) if idx == b else Fraction(0)
        return self.columns[b].get(idx, Fraction(0))

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "r": self.r,
            "d": self.d,
            "columns": [
                [[idx, str(col[idx])] for idx in sorted(col)]
                for col in self.columns
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "FiniteFrame":
        cols = []
        for col in obj["columns"]:
            cols.append({int(i): Fraction(v) for i, v in col})
        return FiniteFrame(int(obj["N"]), int(obj["r"]), int(obj["d"]), cols)


def sequence_frame(seq: VirtualSequence, N: int = 1) -> FiniteFrame:
    """The frame whose b-th column is the basis vector at index s_b."""
    L = len(seq.prefix)
    r = L
    d = max(0, -min(seq.prefix)) if L else 0
    cols = [{seq.s(b): Fraction(1)} for b in range(r)]
    return FiniteFrame(N, r, d, cols)


def plucker_coord(frame: FiniteFrame, seq: VirtualSequence) -> Fraction:
    """Determinant of rows S of the frame's column matrix (finite minor)."""
    T = max(frame.r, len(seq.prefix))
    if T == 0:
        return Fraction(1)
    rows = [[frame.column_entry(b, seq.s(a)) for b in range(T)]
            for a in range(T)]
    return rational_det(rows)


def frame_support(frame: FiniteFrame) -> List[VirtualSequence]:
    """Every sequence whose frame coordinate can be nonzero."""
    if frame.r == 0 or frame.d == 0:
        return [VirtualSequence.vacuum()]
    return enumerate_skn(frame.r, frame.r + frame.d)


def frame_plucker_vector(frame: FiniteFrame) -> PluckerVector:
    """Coordinates of the frame over its own (k, n) = (r, r+d) family."""
    if frame.r == 0 or frame.d == 0:
        raise InvalidRange("frame has trivial support family")
    k, n = frame.r, frame.r + frame.d
    coords = {}
    for seq in enumerate_skn(k, n):
        coords[subset_label(seq, k, n)] = plucker_coord(frame, seq)
    return PluckerVector(k, n, coords)


# -- block operators -------------------------------------------------------------


class GOperator:
    """Multiplication by the block series H_0 + H_1 z + ... + H_K z^K.

    The coefficient of e_tgt in g e_idx at block offset k is
    h[1 + tgt mod N, 1 + idx mod N, k]: the block row index follows the
    target and the block column index follows the source.  This matches
    the orientation of the block determinants, so the vacuum pairing of
    g with a frame expands over those determinants exactly.
    """

    def __init__(self, model: HModel):
        if model.K is None:
            raise ValueError("operator requires a finite block count K")
        self.model = model
        self.N = model.N
        self.K = model.K
        self._g_blocks: Optional[List[List[List[RationalFunction]]]] = None

    def apply(self, idx: int) -> List[Tuple[int, RationalFunction]]:
        """Image of the basis vector e_idx as (index, coefficient) pairs."""
        N = self.N
        c = idx % N
        out = []
        for k in range(self.K + 1):
            for j in range(1, N + 1):
                coeff = self.model.entry(j, 1 + c, k)
                if not coeff.is_zero():
                    out.append((idx + k * N + (j - 1 - c), coeff))
        out.sort(key=lambda p: p[0])
        return out

    def inverse_blocks(self, kmax: int) -> List[List[List[RationalFunction]]]:
        """Blocks of the inverse of the nonnegative part, by the usual
        triangular recursion G_0 = H_0^{-1}, G_k = -G_0 sum H_j G_{k-j}."""
        if self._g_blocks is None:
            self._g_blocks = [self._h0_inverse()]
        blocks = self._g_blocks
        N = self.N
        while len(blocks) <= kmax:
            k = len(blocks)
            acc = _mat_zero(N)
            for j in range(1, min(k, self.K) + 1):
                hj = [[self.model.entry(a, b, j) for b in range(1, N + 1)]
                      for a in range(1, N + 1)]
                acc = _mat_add(acc, _mat_mul(hj, blocks[k - j]))
            blocks.append(_mat_neg(_mat_mul(blocks[0], acc)))
        return blocks

    def _h0_inverse(self) -> List[List[RationalFunction]]:
        N = self.N
        d0 = self.model.det_h0()
        if d0.is_zero():
            raise SingularH0("det H_0 = 0")
        h0 = [[self.model.entry(1 + a, 1 + b, 0) for b in range(N)]
              for a in range(N)]
        inv = _mat_zero(N)
        for a in range(N):
            for b in range(N):
                sub = [[h0[rr][cc] for cc in range(N) if cc != a]
                       for rr in range(N) if rr != b]
                cof = rf_det(sub)
                if (a + b) % 2:
                    cof = -cof
                inv[a][b] = cof / d0
        return inv


def _mat_zero(N: int):
    return [[RationalFunction.zero() for _ in range(N)] for _ in range(N)]


def _mat_add(A, B):
    return [[A[i][j] + B[i][j] for j in range(len(A))] for i in range(len(A))]


def _mat_neg(A):
    return [[-A[i][j] for j in range(len(A))] for i in range(len(A))]


def _mat_mul(A, B):
    N = len(A)
    out = _mat_zero(N)
    for i in range(N):
        for j in range(N):
            acc = RationalFunction.zero()
            for l in range(N):
                acc = acc + A[i][l] * B[l][j]
            out[i][j] = acc
    return out


def _transformed_column(g: GOperator, frame: FiniteFrame, i: int) -> Dict[int, RationalFunction]:
    """Column i of g o w o a^{-1} where a is the nonnegative part of g.

    Identity plus a finite-rank correction: the correction feeds the
    components of a^{-1} e_i lying below the frame's stabilization through
    (w - identity) and then through g.
    """
    N, r = g.N, frame.r
    c = i % N
    q = i // N
    # components of a^{-1} e_i at basis indices below r
    below: Dict[int, RationalFunction] = {}
    k = 0
    while (q + k) * N < r:
        gk = g.inverse_blocks(k)[k]
        base = (q + k) * N
        for j in range(1, N + 1):
            m = base + (j - 1)
            if m < r:
                coeff = gk[j - 1][c]
                if not coeff.is_zero():
                    below[m] = below.get(m, RationalFunction.zero()) + coeff
        k += 1
    # v = (w - identity) applied to those components
    v: Dict[int, RationalFunction] = {}
    for m, coeff in below.items():
        col = frame.columns[m]
        for idx, x in col.items():
            _acc(v, idx, coeff * x)
        _acc(v, m, -coeff)
    # column = e_i + g(v)
    out: Dict[int, RationalFunction] = {}
    for m, coeff in v.items():
        for tgt, hc in g.apply(m):
            _acc(out, tgt, coeff * hc)
    _acc(out, i, RationalFunction.one())
    return {m: x for m, x in out.items() if not x.is_zero()}


def _acc(d: Dict[int, RationalFunction], key: int, val: RationalFunction) -> None:
    cur = d.get(key)
    d[key] = val if cur is None else cur + val


def expansion_lhs(g: GOperator, frame: FiniteFrame,
                  M: Optional[int] = None) -> RationalFunction:
    """Vacuum pairing of g with the frame via one truncated determinant.

    The transformed column matrix g o w o a^{-1} agrees with the identity
    beyond a finite block; the truncation is certified by checking one full
    block of columns and grown when the certificate fails.
    """
    if frame.N != g.N:
        raise ValueError("frame and operator have different block sizes")
    N, r, d = g.N, frame.r, frame.d
    ceil_div = lambda a, b: -(-a // b)
    stab = N * ceil_div(r, N) if r else 0
    bound = max(stab, r + N * g.K + N * ceil_div(d, N), N)
    Mcur = N * ceil_div(M, N) if M is not None else N * ceil_div(bound, N)
    limit = N * ceil_div(bound, N) + 8 * N
    while True:
        ok = True
        for i in range(Mcur, Mcur + N):
            col = _transformed_column(g, frame, i)
            if set(col) != {i} or not rf_equal(col[i], 1):
                ok = False
                break
        if ok:
            break
        Mcur += N
        if Mcur > limit:
            raise NonStabilizing(
                f"no identity tail found by column {limit}")
    rows = [[RationalFunction.zero() for _ in range(Mcur)] for _ in range(Mcur)]
    for i in range(Mcur):
        for m, x in _transformed_column(g, frame, i).items():
            if 0 <= m < Mcur:
                rows[m][i] = x
    return rf_det(rows)


def expansion_rhs(g: GOperator, frame: FiniteFrame) -> RationalFunction:
    """Sum of frame coordinates times block-determinant functions."""
    total = RationalFunction.zero()
    for seq in frame_support(frame):
        coord = plucker_coord(frame, seq)
        if coord:
            total = total + nschur(seq, g.model) * coord
    return total


def theorem1_check(g: GOperator, frame: FiniteFrame) -> dict:
    """Compare the two independent routes to the vacuum pairing."""
    lhs = expansion_lhs(g, frame)
    rhs = expansion_rhs(g, frame)
    support = []
    for seq in frame_support(frame):
        coord = plucker_coord(frame, seq)
        if coord:
            support.append((seq, coord))
    return {
        "lhs": lhs,
        "rhs": rhs,
        "match": rf_equal(lhs, rhs),
        "support": support,
    }
