"""Rectangular areas, the two-area sumset and the disjoint-index pool.

The pool is the set delta*P + M*P' where delta is the smallest gap of A, M the
diameter of B, P = {b_i - b_2 : 3 <= i <= m-1} and P' a family of differences
a_t - a_anchor over every other index of A. Every value comes with a
representation as a sum of two rectangle areas on four distinct A-indices and
four distinct B-indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import RealSet, int_array, scale_to_integers

TWO_AREA_MAX_TERMS = 4 * 10**7


@dataclass(frozen=True)
class GridPoint:
    x: Fraction
    y: Fraction
    a_index: int
    b_index: int

    @classmethod
    def at(cls, A: RealSet, B: RealSet, i: int, j: int) -> "GridPoint":
        return cls(A[i], B[j], i, j)


def rect_area(p: GridPoint, q: GridPoint) -> Fraction:
    return (q.x - p.x) * (q.y - p.y)


def _differences(vals: Sequence[Fraction]) -> list[Fraction]:
    return sorted({y - x for x in vals for y in vals})


def _rect_area_ints(A: RealSet, B: RealSet) -> tuple[np.ndarray, int]:
    da, dena = scale_to_integers(_differences(A.elements))
    db, denb = scale_to_integers(_differences(B.elements))
    bound = max(map(abs, da)) * max(map(abs, db))
    arr_a, arr_b = int_array(da, bound), int_array(db, bound)
    return np.unique(np.multiply.outer(arr_a, arr_b).ravel()), dena * denb


def rect_area_set(A: RealSet, B: RealSet) -> frozenset:
    """(A - A)(B - B), the rectangular-area set of the grid A x B."""
    prods, den = _rect_area_ints(A, B)
    return frozenset(Fraction(int(v), den) for v in prods)


def rect_area_count(A: RealSet, B: RealSet) -> int:
    return len(_rect_area_ints(A, B)[0])


def two_area_set(A: RealSet, B: RealSet, cap: int = TWO_AREA_MAX_TERMS) -> frozenset:
    """(A-A)(B-B) + (A-A)(B-B) by full enumeration. Guarded by ``cap`` on |R|^2."""
    areas = sorted(rect_area_set(A, B))
    if len(areas) ** 2 > cap:
        raise ValueError(f"|R|^2 = {len(areas) ** 2} exceeds the two-area cap {cap}")
    ints, den = scale_to_integers(areas)
    arr = int_array(ints, 2 * max(map(abs, ints)))
    sums = np.unique(np.add.outer(arr, arr).ravel())
    return frozenset(Fraction(int(v), den) for v in sums)


def min_gap_index(vals: Sequence) -> int:
    """Smallest 1-based s with vals[s+1] - vals[s] minimal."""
    gaps = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    return gaps.index(min(gaps)) + 1


def two_area_warmup(A: RealSet, B: RealSet):
    """T = delta*P + M*P' with |T| = |P||P'| >= |A||B|/2.

    Returns ``(T, (delta, M, P, P'))``. The map (x, y) -> delta*x + M*y is
    checked to be injective on P x P'.
    """
    n, m = len(A), len(B)
    if n < 2 or m < 2:
        raise ValueError("both sets need at least two elements")
    a, b = A.elements, B.elements
    delta = min(a[i + 1] - a[i] for i in range(n - 1))
    M = b[-1] - b[0]
    P = [bi - b[0] for bi in b]
    Pp = [a[2 * j - 2] - a[0] for j in range(1, math.ceil(n / 2) + 1)]
    T = {}
    for x in P:
        for y in Pp:
            v = delta * x + M * y
            if v in T:
                raise AssertionError(f"collision: {T[v]} and {(x, y)} both map to {v}")
            T[v] = (x, y)
    return frozenset(T), (delta, M, tuple(P), tuple(Pp))


@dataclass(frozen=True)
class PairedRepresentation:
    """value = (a_i - a_j)(b_p - b_q) + (a_k - a_l)(b_r - b_s)."""

    a_indices: tuple[int, int, int, int]
    b_indices: tuple[int, int, int, int]
    value: Fraction

    def evaluate(self, A: RealSet, B: RealSet) -> Fraction:
        i, j, k, l = self.a_indices
        p, q, r, s = self.b_indices
        return (A[i] - A[j]) * (B[p] - B[q]) + (A[k] - A[l]) * (B[r] - B[s])

    def is_valid(self, A: RealSet, B: RealSet) -> bool:
        return (
            len(set(self.a_indices)) == 4
            and len(set(self.b_indices)) == 4
            and self.evaluate(A, B) == self.value
        )


@dataclass(frozen=True)
class PoolPlan:
    """Index bookkeeping of the pool construction (all indices 1-based into the sorted sets)."""

    n: int
    m: int
    s: int  # a_{s+1} - a_s is the minimal gap
    anchor: int
    b_rows: tuple[int, ...]  # i with 3 <= i <= m-1, x = b_i - b_2
    a_cols: tuple[int, ...]  # t in I, y = a_t - a_anchor

    @property
    def size_bound(self) -> int:
        return (self.m - 3) * (math.ceil(self.n / 2) - 2)

    def representation(self, i: int, t: int) -> tuple[tuple[int, int, int, int], tuple[int, int, int, int]]:
        return (self.s + 1, self.s, t, self.anchor), (i, 2, self.m, 1)


def pool_plan(a: Sequence, b: Sequence) -> PoolPlan:
    """Index choices for the pool of sorted sequences ``a`` (size n) and ``b`` (size m)."""
    n, m = len(a), len(b)
    if n < 4 or m < 4:
        raise ValueError(f"pool needs |A|, |B| >= 4, got {n}, {m}")
    s = min_gap_index(a)
    anchor = 1 if 1 not in (s, s + 1) else n
    cols = [t for t in range(1, n + 1, 2) if t not in (s, s + 1, anchor)]
    return PoolPlan(n=n, m=m, s=s, anchor=anchor, b_rows=tuple(range(3, m)), a_cols=tuple(cols))


@dataclass(frozen=True)
class Pool:
    values: frozenset
    representations: dict
    source_sizes: tuple[int, int]
    delta: Fraction
    diameter: Fraction
    plan: PoolPlan

    def __len__(self) -> int:
        return len(self.values)


def pool_construct(A: RealSet, B: RealSet) -> Pool:
    """U(A, B) with a disjoint-index representation stored for every value."""
    a, b = A.elements, B.elements
    plan = pool_plan(a, b)
    delta = a[plan.s] - a[plan.s - 1]
    M = b[-1] - b[0]
    reps = {}
    for i in plan.b_rows:
        x = b[i - 1] - b[1]
        for t in plan.a_cols:
            y = a[t - 1] - a[plan.anchor - 1]
            u = delta * x + M * y
            if u in reps:
                raise AssertionError(f"pool map not injective at {u}")
            ai, bi = plan.representation(i, t)
            reps[u] = PairedRepresentation(ai, bi, u)
    if len(reps) < plan.size_bound:
        raise AssertionError(f"|U| = {len(reps)} below the bound {plan.size_bound}")
    return Pool(
        values=frozenset(reps),
        representations=reps,
        source_sizes=(len(a), len(b)),
        delta=delta,
        diameter=M,
        plan=plan,
    )


def pool_grid(a_ints: Sequence[int], b_ints: Sequence[int]):
    """Integer pool values laid out on the (b_rows x a_cols) grid, row-major.

    ``a_ints``/``b_ints`` are the current sorted sets already scaled to integers.
    Returns ``(plan, values)`` where ``values[r * len(a_cols) + c]`` is the pool
    element for ``b_rows[r]`` and ``a_cols[c]``.
    """
    plan = pool_plan(a_ints, b_ints)
    delta = a_ints[plan.s] - a_ints[plan.s - 1]
    M = b_ints[-1] - b_ints[0]
    xs = [b_ints[i - 1] - b_ints[1] for i in plan.b_rows]
    ys = [a_ints[t - 1] - a_ints[plan.anchor - 1] for t in plan.a_cols]
    bound = 2 * max(abs(delta) * max(map(abs, xs), default=0), abs(M) * max(map(abs, ys), default=0))
    xs_arr, ys_arr = int_array(xs, bound), int_array(ys, bound)
    vals = np.add.outer(delta * xs_arr, M * ys_arr).ravel()
    return plan, vals
