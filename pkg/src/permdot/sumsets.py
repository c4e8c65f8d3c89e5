"""Subset sums, additive energies and the block-disjoint lower bound for |Sigma(D)|.

All public functions take any iterable of distinct rationals as an increment
set. Internally values are rescaled to a common denominator so the heavy
lifting runs on integers (numpy int64 when the magnitudes allow it, Python
ints otherwise); the rescaling is exact and invisible at the interface.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .algebra import INT64_SAFE, Number, scale_to_integers, to_scalar

IncrementSet = frozenset  # frozenset[Fraction]

SUBSET_SUM_MAX_SIZE = 30
MITM_THRESHOLD = 20
BITMAP_MAX_SPAN = 1 << 27
ENERGY_MAX_SIZE = {1: 10**7, 2: 10**5, 3: 2000}
_CHUNK = 1 << 22


def as_increments(values: Iterable[Number]) -> tuple[Fraction, ...]:
    """Sorted tuple of the values; raises on repeats since D is a set."""
    vals = [to_scalar(v) for v in values]
    if len(set(vals)) != len(vals):
        raise ValueError("increment set has repeated elements")
    return tuple(sorted(vals))


# ---------------------------------------------------------------------------
# subset sums


def _doubling(ints: list[int]) -> np.ndarray:
    """Sorted distinct subset sums by repeated union with a shifted copy."""
    bound = sum(abs(x) for x in ints)
    if bound >= INT64_SAFE:
        acc = {0}
        for d in ints:
            acc |= {s + d for s in acc}
        arr = np.empty(len(acc), dtype=object)
        arr[:] = sorted(acc)
        return arr
    acc = np.zeros(1, dtype=np.int64)
    for d in ints:
        acc = np.union1d(acc, acc + d)
    return acc


def _mitm_sorted(ints: list[int]) -> np.ndarray:
    """Split in halves, enumerate each, then merge the pairwise sums chunk by chunk."""
    half = len(ints) // 2
    left, right = _doubling(ints[:half]), _doubling(ints[half:])
    if left.dtype == object or right.dtype == object:
        return np.array(sorted({x + y for x in left for y in right}), dtype=object)
    rows = max(1, _CHUNK // max(1, len(right)))
    acc = np.empty(0, dtype=np.int64)
    for start in range(0, len(left), rows):
        block = (left[start:start + rows, None] + right[None, :]).ravel()
        acc = np.union1d(acc, block)
    return acc


def _bitmap_count(ints: list[int]) -> tuple[int, np.ndarray]:
    """Reachability bitmap over [neg_total, pos_total]; returns (offset, bool mask)."""
    offset = sum(x for x in ints if x < 0)
    span = sum(abs(x) for x in ints)
    bits = np.zeros(span + 1, dtype=bool)
    bits[0] = True
    top = 0
    for w in sorted(abs(x) for x in ints):
        if w == 0:
            continue
        shifted = bits[: top + 1].copy()
        bits[w: w + top + 1] |= shifted
        top += w
    return offset, bits


def _check_size(m: int, cap: int | None) -> None:
    limit = SUBSET_SUM_MAX_SIZE if cap is None else cap
    if m > limit:
        raise ValueError(f"|D| = {m} exceeds the subset-sum guard {limit}; pass cap= to override")


def _subset_sum_ints(ints: list[int], method: str) -> np.ndarray:
    if method == "auto":
        span = sum(abs(x) for x in ints)
        if span <= BITMAP_MAX_SPAN:
            method = "bitmap"
        elif len(ints) > MITM_THRESHOLD:
            method = "mitm"
        else:
            method = "enumerate"
    if method == "bitmap":
        offset, bits = _bitmap_count(ints)
        return np.flatnonzero(bits).astype(np.int64) + offset
    if method == "mitm":
        return _mitm_sorted(ints)
    if method == "enumerate":
        return _doubling(ints)
    raise ValueError(f"unknown method {method!r}")


def subset_sums(D: Iterable[Number], cap: int | None = None, method: str = "auto") -> frozenset:
    """Sigma(D): every sum over a subset of D, the empty sum included.

    ``method`` is one of "auto", "enumerate", "mitm", "bitmap"; all return
    the same set. "auto" uses a reachability bitmap when the integer span is
    small, otherwise meet-in-the-middle above 20 elements.
    """
    vals = as_increments(D)
    _check_size(len(vals), cap)
    ints, den = scale_to_integers(vals)
    return frozenset(Fraction(int(s), den) for s in _subset_sum_ints(ints, method))


def subset_sum_count(D: Iterable[Number], cap: int | None = None, method: str = "auto") -> int:
    """|Sigma(D)| without materializing rationals."""
    vals = as_increments(D)
    _check_size(len(vals), cap)
    ints, _ = scale_to_integers(vals)
    return int(len(_subset_sum_ints(ints, method)))


def is_dissociated(D: Iterable[Number]) -> bool:
    vals = as_increments(D)
    return subset_sum_count(vals) == 2 ** len(vals)


# ---------------------------------------------------------------------------
# energies and k-fold sums


@dataclass(frozen=True)
class EnergyReport:
    k: int
    energy: int
    tuple_count_checked: int


def _aggregate(vals: np.ndarray, cnts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(vals, kind="stable")
    vals, cnts = vals[order], cnts[order]
    starts = np.flatnonzero(np.r_[True, vals[1:] != vals[:-1]])
    return vals[starts], np.add.reduceat(cnts, starts)


def ordered_sum_counts(D: Iterable[Number], k: int) -> dict[Fraction, int]:
    """Multiplicity of each value among the m^k ordered k-sums of D."""
    vals = as_increments(D)
    ints, den = scale_to_integers(vals)
    counts = _ordered_counts_int(ints, k)
    return {Fraction(int(v), den): int(c) for v, c in zip(*counts)}


def _ordered_counts_int(ints: list[int], k: int):
    if k * sum(abs(x) for x in ints) >= INT64_SAFE:
        cur = Counter({0: 1})
        for _ in range(k):
            nxt: Counter = Counter()
            for s, c in cur.items():
                for d in ints:
                    nxt[s + d] += c
            cur = nxt
        keys = sorted(cur)
        return keys, [cur[x] for x in keys]
    d = np.asarray(ints, dtype=np.int64)
    vals = np.zeros(1, dtype=np.int64)
    cnts = np.ones(1, dtype=np.int64)
    for _ in range(k):
        rows = max(1, _CHUNK // max(1, len(d)))
        parts_v, parts_c = [], []
        for start in range(0, len(vals), rows):
            v = (vals[start:start + rows, None] + d[None, :]).ravel()
            c = np.repeat(cnts[start:start + rows], len(d))
            parts_v.append(v)
            parts_c.append(c)
            if sum(len(p) for p in parts_v) > 4 * _CHUNK:
                av, ac = _aggregate(np.concatenate(parts_v), np.concatenate(parts_c))
                parts_v, parts_c = [av], [ac]
        vals, cnts = _aggregate(np.concatenate(parts_v), np.concatenate(parts_c))
    return vals, cnts


def _sum_of_squares(cnts) -> int:
    if isinstance(cnts, np.ndarray) and len(cnts):
        top = int(cnts.max())
        if top * top * len(cnts) < INT64_SAFE:
            return int(np.dot(cnts, cnts))
    return sum(int(c) * int(c) for c in list(cnts))


def additive_energy(D: Iterable[Number], k: int = 2) -> EnergyReport:
    """E_k(D): number of 2k-tuples from D with equal k-term sums (k in 1..3)."""
    if k not in ENERGY_MAX_SIZE:
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    vals = as_increments(D)
    m = len(vals)
    if m < 1:
        raise ValueError("energy of an empty set is undefined here")
    if m > ENERGY_MAX_SIZE[k]:
        raise ValueError(f"|D| = {m} exceeds the E_{k} guard {ENERGY_MAX_SIZE[k]}")
    ints, _ = scale_to_integers(vals)
    _, cnts = _ordered_counts_int(ints, k)
    return EnergyReport(k=k, energy=_sum_of_squares(cnts), tuple_count_checked=m**k)


def energy(D: Iterable[Number], k: int = 2) -> int:
    return additive_energy(D, k).energy


def _kfold_ints(ints: list[int], k: int) -> set[int]:
    if k == 2 and len(ints) > 64 and 2 * max(map(abs, ints)) < INT64_SAFE:
        arr = np.asarray(ints, dtype=np.int64)
        i, j = np.triu_indices(len(arr), 1)
        return set(np.unique(arr[i] + arr[j]).tolist())
    return {sum(c) for c in itertools.combinations(ints, k)}


def k_fold_distinct_sums(C: Iterable[Number], k: int) -> frozenset:
    """k^C: sums of k distinct elements of C."""
    vals = as_increments(C)
    if k < 1:
        raise ValueError("k must be positive")
    if len(vals) < k:
        raise ValueError(f"|C| = {len(vals)} < k = {k}")
    ints, den = scale_to_integers(vals)
    return frozenset(Fraction(s, den) for s in _kfold_ints(ints, k))


def falling_factorial(s: int, k: int) -> int:
    return math.perm(s, k)


def falling_factorial_energy_bound(C: Iterable[Number], k: int) -> Fraction:
    """(s)_k^2 / E_k(C), a lower bound for |k^C|."""
    vals = as_increments(C)
    if len(vals) < k:
        raise ValueError(f"|C| = {len(vals)} < k = {k}")
    return Fraction(falling_factorial(len(vals), k) ** 2, energy(vals, k))


# ---------------------------------------------------------------------------
# block decomposition


def positive_majority_subset(D: Iterable[Number]) -> tuple[tuple[Fraction, ...], bool]:
    """Positive elements of D, or of -D when negatives are the strict majority."""
    vals = as_increments(D)
    if not vals:
        raise ValueError("D is empty")
    if any(v == 0 for v in vals):
        raise ValueError("0 must be removed from D before the sign split")
    pos = [v for v in vals if v > 0]
    neg = [-v for v in vals if v < 0]
    if len(pos) >= len(neg):
        return tuple(pos), False
    return tuple(sorted(neg)), True


@dataclass(frozen=True)
class Block:
    t: int
    offset: Fraction  # L_t
    size: int  # |k^P_t|
    low: Fraction  # min S_t
    high: Fraction  # max S_t


@dataclass(frozen=True)
class BlockDecomposition:
    P: tuple[Fraction, ...]
    k: int
    levels: tuple[Fraction, ...]  # L_0, ..., L_T with T = floor(M/k)
    blocks: tuple[Block, ...]
    certified_bound: int
    negated: bool = False
    zero_removed: bool = False
    energy_bound: Fraction | None = field(default=None)

    @property
    def prefixes(self) -> list[tuple[Fraction, int]]:
        return [(b.offset, b.size) for b in self.blocks]


def halasz_block_decomposition(P: Iterable[Number], k: int) -> BlockDecomposition:
    """Blocks S_t = L_t + k^P_t for t < floor(M/k); their sizes add up to a bound on |Sigma(P)|."""
    p = as_increments(P)
    M = len(p)
    if k < 1:
        raise ValueError("k must be positive")
    if any(x <= 0 for x in p):
        raise ValueError("all elements of P must be positive")
    if M < k:
        raise ValueError(f"|P| = {M} < k = {k}")
    ints, den = scale_to_integers(p)
    T = M // k
    levels = [0]
    for t in range(T):
        levels.append(levels[-1] + sum(ints[M - k * t - k: M - k * t]))
    blocks = []
    prev_high = None
    for t in range(T):
        sums = _kfold_ints(ints[: M - k * t], k)
        low, high = levels[t] + min(sums), levels[t] + max(sums)
        if high != levels[t + 1]:
            raise RuntimeError(f"block {t}: max {high} != L_{t + 1} = {levels[t + 1]}")
        if prev_high is not None and not low > prev_high:
            raise RuntimeError(f"blocks {t - 1} and {t} overlap")
        prev_high = high
        blocks.append(Block(t, Fraction(levels[t], den), len(sums), Fraction(low, den), Fraction(high, den)))
    return BlockDecomposition(
        P=p,
        k=k,
        levels=tuple(Fraction(x, den) for x in levels),
        blocks=tuple(blocks),
        certified_bound=sum(b.size for b in blocks),
    )


def supportive_halasz_lower_bound(D: Iterable[Number], k: int = 2) -> tuple[int, BlockDecomposition]:
    """Certified integer lower bound on |Sigma(D)| from the block decomposition.

    Zero is dropped first (Sigma(D minus 0) equals Sigma(D)). The
    decomposition also carries ``energy_bound`` = sum_t (M-kt)_k^2 / E_k(D),
    which never exceeds the certified bound.
    """
    vals = as_increments(D)
    zero_removed = Fraction(0) in vals
    nz = tuple(v for v in vals if v != 0)
    P, negated = positive_majority_subset(nz)
    dec = halasz_block_decomposition(P, k)
    e = energy(nz, k)
    M = len(P)
    est = Fraction(sum(falling_factorial(M - k * t, k) ** 2 for t in range(M // k)), e)
    dec = BlockDecomposition(
        P=dec.P,
        k=k,
        levels=dec.levels,
        blocks=dec.blocks,
        certified_bound=dec.certified_bound,
        negated=negated,
        zero_removed=zero_removed,
        energy_bound=est,
    )
    return dec.certified_bound, dec
