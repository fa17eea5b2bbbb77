"""Strictly increasing integer sequences that eventually equal their index.

A sequence S = (s_0, s_1, ...) is stored by its canonical prefix: the
shortest initial segment after which s_j = j.  Such sequences biject with
integer partitions via parts (j - s_j), and the finite family with k free
entries bounded in [k-n, k-1] bijects with k-subsets of {1..n}.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, Sequence, Tuple

from .errors import InvalidRange, NotInRange

Partition = Tuple[int, ...]


class VirtualSequence:
    """Canonical representation of an almost-identity increasing sequence."""

    __slots__ = ("prefix", "_hash")

    def __init__(self, prefix: Iterable[int] = ()):
        prefix = tuple(int(s) for s in prefix)
        for a, b in zip(prefix, prefix[1:]):
            if a >= b:
                raise ValueError(f"sequence not strictly increasing: {prefix}")
        if prefix:
            last = len(prefix) - 1
            if prefix[last] >= len(prefix):
                raise ValueError(
                    f"prefix {prefix} incompatible with identity tail")
            if prefix[last] == last:
                raise ValueError(f"prefix {prefix} is not canonical")
        self.prefix = prefix
        self._hash = hash(prefix)

    @staticmethod
    def from_values(values: Sequence[int]) -> "VirtualSequence":
        """Build from explicit leading values, trimming the identity tail."""
        vals = list(int(v) for v in values)
        while vals and vals[-1] == len(vals) - 1:
            vals.pop()
        return VirtualSequence(vals)

    @staticmethod
    def vacuum() -> "VirtualSequence":
        return VirtualSequence(())

    def s(self, j: int) -> int:
        """The j-th entry (j >= 0)."""
        if j < 0:
            raise IndexError("sequence entries are indexed from 0")
        return self.prefix[j] if j < len(self.prefix) else j

    def entries(self, count: int) -> Tuple[int, ...]:
        return tuple(self.s(j) for j in range(count))

    def is_vacuum(self) -> bool:
        return not self.prefix

    def weight(self) -> int:
        return sum(j - sj for j, sj in enumerate(self.prefix))

    def __eq__(self, other) -> bool:
        return isinstance(other, VirtualSequence) and self.prefix == other.prefix

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "VirtualSequence") -> bool:
        n = max(len(self.prefix), len(other.prefix))
        return self.entries(n) < other.entries(n)

    def __repr__(self) -> str:
        return f"VirtualSequence({self.prefix})"

    def __str__(self) -> str:
        if not self.prefix:
            return "(0,1,2,...)"
        inner = ",".join(str(s) for s in self.prefix)
        return f"({inner},{len(self.prefix)},{len(self.prefix) + 1},...)"


def weight(seq: VirtualSequence) -> int:
    return seq.weight()


def to_partition(seq: VirtualSequence) -> Partition:
    """Parts are the index deficits j - s_j over the canonical prefix."""
    return tuple(j - sj for j, sj in enumerate(seq.prefix))


def from_partition(parts: Sequence[int]) -> VirtualSequence:
    parts = tuple(int(p) for p in parts if int(p) != 0)
    for a, b in zip(parts, parts[1:]):
        if a < b:
            raise ValueError(f"parts not weakly decreasing: {parts}")
    if parts and parts[-1] < 0:
        raise ValueError(f"parts must be positive: {parts}")
    return VirtualSequence(tuple(j - p for j, p in enumerate(parts)))


def partitions_of(w: int) -> Iterator[Partition]:
    """All partitions of w, largest-part-first lexicographic order."""
    if w < 0:
        return
    if w == 0:
        yield ()
        return

    def gen(remaining: int, cap: int, acc: list):
        if remaining == 0:
            yield tuple(acc)
            return
        for part in range(min(cap, remaining), 0, -1):
            acc.append(part)
            yield from gen(remaining - part, part, acc)
            acc.pop()

    yield from gen(w, w, [])


def enumerate_by_weight(w: int) -> list:
    """All sequences of exact weight w, sorted by prefix."""
    if w < 0:
        raise InvalidRange("weight must be nonnegative")
    seqs = [from_partition(p) for p in partitions_of(w)]
    seqs.sort()
    return seqs


def enumerate_skn(k: int, n: int) -> list:
    """The C(n, k) sequences with k free entries in [k-n, k-1], lex order."""
    if not (1 <= k < n):
        raise InvalidRange(f"need 1 <= k < n, got k={k} n={n}")
    out = []
    for chosen in combinations(range(k - n, k), k):
        out.append(VirtualSequence.from_values(chosen))
    return out


def in_skn(seq: VirtualSequence, k: int, n: int) -> bool:
    if not (1 <= k < n):
        raise InvalidRange(f"need 1 <= k < n, got k={k} n={n}")
    if len(seq.prefix) > k:
        return False
    return all(k - n <= seq.s(i) <= k - 1 for i in range(k))


def subset_label(seq: VirtualSequence, k: int, n: int) -> Tuple[int, ...]:
    """Map a member of the (k, n) family to its k-subset of {1..n}."""
    if not in_skn(seq, k, n):
        raise NotInRange(f"{seq} is not in the (k={k}, n={n}) family")
    shift = n - k + 1
    return tuple(seq.s(i) + shift for i in range(k))


def from_subset_label(label: Sequence[int], k: int, n: int) -> VirtualSequence:
    label = tuple(sorted(int(c) for c in label))
    if len(label) != k or not all(1 <= c <= n for c in label):
        raise NotInRange(f"label {label} is not a {k}-subset of 1..{n}")
    if len(set(label)) != k:
        raise NotInRange(f"label {label} has repeats")
    shift = n - k + 1
    return VirtualSequence.from_values(tuple(c - shift for c in label))
