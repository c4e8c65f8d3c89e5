"""Brute-force references: full spectra over S_n, the matrix functional, atoms and subset sums.

These are deliberately independent of the construction code paths. Full
enumeration splits S_n by a fixed prefix of images (lexicographic), evaluates
every completion of a prefix as one vectorized batch, and merges the
per-branch distinct values at the end, so the result does not depend on how
many workers ran.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import Instance, Number, int_array, scale_to_integers, to_scalar
from .parallel import ordered_map

SPECTRUM_MAX_N = 11
MATRIX_MAX_N = 10
EXACT_ATOM_MAX_N = 9
SUBSET_ORACLE_MAX = 22
_TAIL = 8
_MC_CHUNK = 1 << 16


class GuardError(ValueError):
    """Input too large for an exhaustive routine."""


@dataclass(frozen=True)
class SpectrumResult:
    size: int
    min: Fraction
    max: Fraction
    values: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class CostMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_scalar(x) for x in row) for row in self.entries)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("cost matrix must be square and nonempty")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def rank_one(cls, inst: Instance) -> "CostMatrix":
        return cls(tuple(tuple(a * b for b in inst.b) for a in inst.a))

    @classmethod
    def additive(cls, u: Sequence[Number], v: Sequence[Number]) -> "CostMatrix":
        return cls(tuple(tuple(to_scalar(x) + to_scalar(y) for y in v) for x in u))


@dataclass(frozen=True)
class AtomEstimate:
    samples: int
    max_atom_frequency: int
    estimate: Fraction
    exact: bool
    argmax: Fraction | None = None


def _tail_table(n: int) -> tuple[int, np.ndarray]:
    p = max(0, n - _TAIL)
    tail = np.array(list(itertools.permutations(range(n - p))), dtype=np.int64).reshape(-1, n - p)
    return p, tail


def _prefix_groups(n: int, p: int) -> list[list[tuple[int, ...]]]:
    """Prefixes of length p, grouped by first image (one group when p = 0)."""
    if p == 0:
        return [[()]]
    return [[(f,) + rest for rest in itertools.permutations([x for x in range(n) if x != f], p - 1)] for f in range(n)]


def _enumerate(n: int, branch_values, with_counts: bool):
    """Run ``branch_values(prefix, rest, tail)`` over all prefixes; merge distinct values (and counts)."""
    p, tail = _tail_table(n)

    def run_group(prefixes):
        vals, cnts = [], []
        for prefix in prefixes:
            rest = np.array([x for x in range(n) if x not in prefix], dtype=np.int64)
            v = branch_values(prefix, rest, tail)
            if with_counts:
                u, c = np.unique(v, return_counts=True)
                cnts.append(c)
            else:
                u = np.unique(v)
            vals.append(u)
        return _merge(vals, cnts if with_counts else None)

    parts = ordered_map(run_group, _prefix_groups(n, p))
    return _merge([x[0] for x in parts], [x[1] for x in parts] if with_counts else None)


def _merge(vals: list[np.ndarray], cnts: list[np.ndarray] | None):
    allv = np.concatenate(vals)
    if cnts is None:
        return np.unique(allv), None
    allc = np.concatenate(cnts)
    order = np.argsort(allv, kind="stable")
    allv, allc = allv[order], allc[order]
    starts = np.flatnonzero(np.r_[True, allv[1:] != allv[:-1]])
    return allv[starts], np.add.reduceat(allc, starts)


def _dot_engine(inst: Instance):
    a_int, da = scale_to_integers(inst.a.elements)
    b_int, db = scale_to_integers(inst.b.elements)
    bound = inst.n * max(map(abs, a_int)) * max(map(abs, b_int))
    a, b = int_array(a_int, bound), int_array(b_int, bound)

    def branch_values(prefix, rest, tail):
        k = len(prefix)
        head = sum(a_int[i] * b_int[j] for i, j in enumerate(prefix))
        return head + b[rest[tail]] @ a[k:]

    return branch_values, da * db


def _result(vals: np.ndarray, den: int, keep: bool) -> SpectrumResult:
    return SpectrumResult(
        size=len(vals),
        min=Fraction(int(vals[0]), den),
        max=Fraction(int(vals[-1]), den),
        values=tuple(Fraction(int(v), den) for v in vals) if keep else None,
    )


def spectrum_bruteforce(inst: Instance, keep_values: bool = True) -> SpectrumResult:
    """Sigma(A, B) = {S(pi) : pi in S_n} by enumerating all n! permutations."""
    if inst.n > SPECTRUM_MAX_N:
        raise GuardError(f"n = {inst.n} exceeds the brute-force guard {SPECTRUM_MAX_N}")
    fn, den = _dot_engine(inst)
    vals, _ = _enumerate(inst.n, fn, with_counts=False)
    return _result(vals, den, keep_values)


def matrix_spectrum_bruteforce(M: CostMatrix, keep_values: bool = True) -> SpectrumResult:
    """Sigma(M) = {sum_i m_{i, pi(i)}} over S_n."""
    n = M.n
    if n > MATRIX_MAX_N:
        raise GuardError(f"n = {n} exceeds the matrix brute-force guard {MATRIX_MAX_N}")
    flat, den = scale_to_integers([x for row in M.entries for x in row])
    W = int_array(flat, n * max(map(abs, flat), default=0)).reshape(n, n)

    def branch_values(prefix, rest, tail):
        k = len(prefix)
        head = sum(int(W[i, j]) for i, j in enumerate(prefix))
        rows = np.arange(k, n)
        return head + W[rows[None, :], rest[tail]].sum(axis=1)

    vals, _ = _enumerate(n, branch_values, with_counts=False)
    return _result(vals, den, keep_values)


def atom_distribution(inst: Instance) -> dict[Fraction, int]:
    """Number of permutations attaining each value of S."""
    if inst.n > SPECTRUM_MAX_N:
        raise GuardError(f"n = {inst.n} exceeds the brute-force guard {SPECTRUM_MAX_N}")
    fn, den = _dot_engine(inst)
    vals, cnts = _enumerate(inst.n, fn, with_counts=True)
    return {Fraction(int(v), den): int(c) for v, c in zip(vals, cnts)}


def anticoncentration_estimate(inst: Instance, samples: int = 10**6, seed: int = 0) -> AtomEstimate:
    """sup_x P(S(pi) = x) for uniform pi: exact for n <= 9, Monte-Carlo otherwise.

    Sample chunk c draws from ``default_rng([seed, c])``, so the sample set is
    fixed by (seed, samples) whatever the worker count.
    """
    n = inst.n
    if n <= EXACT_ATOM_MAX_N:
        dist = atom_distribution(inst)
        total = math.factorial(n)
        x, top = max(dist.items(), key=lambda kv: (kv[1], -kv[0]))
        return AtomEstimate(total, top, Fraction(top, total), True, x)
    if samples < 1:
        raise ValueError("samples must be positive")
    a_int, da = scale_to_integers(inst.a.elements)
    b_int, db = scale_to_integers(inst.b.elements)
    bound = n * max(map(abs, a_int)) * max(map(abs, b_int))
    a, b = int_array(a_int, bound), int_array(b_int, bound)

    def chunk(c: int) -> np.ndarray:
        size = min(_MC_CHUNK, samples - c * _MC_CHUNK)
        rng = np.random.default_rng([seed, c])
        perms = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
        return b[perms] @ a

    parts = ordered_map(chunk, range(math.ceil(samples / _MC_CHUNK)))
    vals, cnts = np.unique(np.concatenate(parts), return_counts=True)
    g = int(np.argmax(cnts))
    top = int(cnts[g])
    return AtomEstimate(samples, top, Fraction(top, samples), False, Fraction(int(vals[g]), da * db))


def subset_sum_oracle(D: Iterable[Number]) -> int:
    """|Sigma(D)| by walking all 2^m subsets in Gray-code order on exact rationals."""
    vals = [to_scalar(x) for x in D]
    if len(set(vals)) != len(vals):
        raise ValueError("D has repeated elements")
    m = len(vals)
    if m > SUBSET_ORACLE_MAX:
        raise GuardError(f"|D| = {m} exceeds the oracle guard {SUBSET_ORACLE_MAX}")
    current = Fraction(0)
    seen = {current}
    inside = [False] * m
    for step in range(1, 1 << m):
        bit = (step & -step).bit_length() - 1
        inside[bit] = not inside[bit]
        current = current + vals[bit] if inside[bit] else current - vals[bit]
        seen.add(current)
    return len(seen)
