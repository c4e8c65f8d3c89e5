"""Builtin instance families."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import Instance, RealSet

FAMILIES = ("interval", "geometric", "sidon", "random")


@lru_cache(maxsize=None)
def _mian_chowla(n: int) -> tuple[int, ...]:
    seq = np.zeros(0, dtype=np.int64)
    sums = np.zeros(1 << 10, dtype=bool)
    c = 0
    while len(seq) < n:
        block = 64
        while True:
            cand = np.arange(c + 1, c + 1 + block, dtype=np.int64)
            need = 2 * int(cand[-1]) + 1
            if need > len(sums):
                sums = np.concatenate([sums, np.zeros(max(need, 2 * len(sums)) - len(sums), dtype=bool)])
            bad = sums[2 * cand]
            if len(seq):
                bad |= sums[cand[:, None] + seq[None, :]].any(axis=1)
            good = np.flatnonzero(~bad)
            if len(good):
                c = int(cand[good[0]])
                break
            c = int(cand[-1])
            block *= 2
        sums[seq + c] = True
        sums[2 * c] = True
        seq = np.append(seq, c)
    return tuple(int(x) for x in seq)


def mian_chowla(n: int) -> list[int]:
    """First n terms of the greedy Sidon sequence 1, 2, 4, 8, 13, 21, 31, ..."""
    return list(_mian_chowla(n))


def random_rationals(n: int, seed: int, stream: int) -> list[Fraction]:
    """n distinct p/q with 1 <= p <= n^2 and 1 <= q <= n, drawn from ``default_rng([seed, stream])``."""
    rng = np.random.default_rng([seed, stream])
    out: set[Fraction] = set()
    while len(out) < n:
        p = int(rng.integers(1, n * n + 1))
        q = int(rng.integers(1, n + 1))
        out.add(Fraction(p, q))
    return sorted(out)


def make_instance(family: str, n: int, seed: int = 0) -> Instance:
    """A = B for the deterministic families; independent A and B for ``random``."""
    if n < 1:
        raise ValueError("n must be positive")
    if family == "interval":
        return Instance.interval(n)
    if family == "geometric":
        s = RealSet(tuple(Fraction(2**i) for i in range(n)))
        return Instance(s, s)
    if family == "sidon":
        s = RealSet(tuple(Fraction(x) for x in mian_chowla(n)))
        return Instance(s, s)
    if family == "random":
        return Instance(RealSet(tuple(random_rationals(n, seed, 0))), RealSet(tuple(random_rationals(n, seed, 1))))
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
