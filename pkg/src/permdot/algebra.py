"""Exact scalars, sets, permutations and the swap-increment identities.

Scalars are :class:`fractions.Fraction` values throughout. Indices at every
public boundary are 1-based; permutations store their images as 1-based
tuples and compose as ``(p o q)(i) = p(q(i))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

Scalar = Fraction
Number = Union[int, Fraction, str]

# int64 headroom used by the vectorized integer paths
INT64_SAFE = 2**62


def to_scalar(x: Number) -> Fraction:
    """Parse ``x`` exactly. Floats are rejected; strings may be "p/q" or decimal."""
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact scalars; pass a string or Fraction")
    return Fraction(x)


def format_scalar(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_scalar(s: str) -> Fraction:
    return Fraction(s.strip())


def scale_to_integers(values: Iterable[Fraction]) -> tuple[list[int], int]:
    """Return ``(ints, den)`` with ``values[i] == ints[i] / den`` and ``den`` the lcm of denominators."""
    vals = [Fraction(v) for v in values]
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in vals], den


def int_array(ints: Sequence[int], bound: int | None = None) -> np.ndarray:
    """Pack Python ints into int64 when ``bound`` (max magnitude of any derived value) allows, else object."""
    if bound is None:
        bound = max((abs(v) for v in ints), default=0)
    if bound < INT64_SAFE:
        return np.asarray(ints, dtype=np.int64)
    arr = np.empty(len(ints), dtype=object)
    arr[:] = list(ints)
    return arr


@dataclass(frozen=True)
class RealSet:
    """Strictly increasing finite sequence of rationals."""

    elements: tuple[Fraction, ...]

    def __post_init__(self):
        els = tuple(to_scalar(x) for x in self.elements)
        if not els:
            raise ValueError("a RealSet needs at least one element")
        for x, y in zip(els, els[1:]):
            if not x < y:
                raise ValueError(f"elements must be strictly increasing, got {x} then {y}")
        object.__setattr__(self, "elements", els)

    @classmethod
    def of(cls, values: Iterable[Number]) -> "RealSet":
        """Build from an unordered collection of distinct values."""
        vals = [to_scalar(v) for v in values]
        if len(set(vals)) != len(vals):
            raise ValueError("values must be distinct")
        return cls(tuple(sorted(vals)))

    @classmethod
    def interval(cls, n: int) -> "RealSet":
        return cls(tuple(Fraction(i) for i in range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> Fraction:
        """1-based access."""
        if not 1 <= i <= len(self.elements):
            raise IndexError(f"index {i} out of range 1..{len(self.elements)}")
        return self.elements[i - 1]

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class Instance:
    a: RealSet
    b: RealSet

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValueError(f"|A| = {len(self.a)} but |B| = {len(self.b)}")

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def interval(cls, n: int) -> "Instance":
        s = RealSet.interval(n)
        return cls(s, s)


@dataclass(frozen=True)
class Permutation:
    """Bijection of {1..n}, stored as the tuple of images (pi(1), ..., pi(n))."""

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"not a permutation of 1..{len(imgs)}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: i -> self(other(i))."""
        if len(other) != len(self):
            raise ValueError("size mismatch")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def swap(self, i: int, j: int) -> "Permutation":
        """``self o (i j)``: swap the images of positions i and j."""
        n = len(self)
        if i == j:
            raise ValueError("a transposition needs two distinct positions")
        for x in (i, j):
            if not 1 <= x <= n:
                raise IndexError(f"position {x} out of range 1..{n}")
        imgs = list(self.images)
        imgs[i - 1], imgs[j - 1] = imgs[j - 1], imgs[i - 1]
        return Permutation(tuple(imgs))


def dot_product(inst: Instance, pi: Permutation) -> Fraction:
    """S(pi) = sum_i a_i * b_{pi(i)}."""
    if len(pi) != inst.n:
        raise ValueError(f"permutation has size {len(pi)}, instance has n = {inst.n}")
    b = inst.b.elements
    return sum((ai * b[p - 1] for ai, p in zip(inst.a.elements, pi.images)), Fraction(0))


def rearrangement_bounds(n: int) -> tuple[Fraction, Fraction]:
    """Min and max of S(pi) over S_n when A = B = [n]."""
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(n * (n + 1) * (n + 2), 6), Fraction(n * (n + 1) * (2 * n + 1), 6)


def swap_increment(inst: Instance, pi: Permutation, i: int, j: int) -> Fraction:
    """(a_i - a_j)(b_{pi(j)} - b_{pi(i)}): the change in S when pi is composed with (i j)."""
    n = inst.n
    if len(pi) != n:
        raise ValueError("size mismatch")
    if i == j:
        raise ValueError("i and j must differ")
    for x in (i, j):
        if not 1 <= x <= n:
            raise IndexError(f"index {x} out of range 1..{n}")
    a, b = inst.a, inst.b
    return (a[i] - a[j]) * (b[pi(j)] - b[pi(i)])


def _check_disjoint(pairs: Sequence[tuple[int, int]], n: int) -> None:
    seen: set[int] = set()
    for i, j in pairs:
        for x in (i, j):
            if not 1 <= x <= n:
                raise IndexError(f"index {x} out of range 1..{n}")
            if x in seen:
                raise ValueError(f"index {x} is used by more than one transposition")
            seen.add(x)


def apply_disjoint_transpositions(pi0: Permutation, pairs: Sequence[tuple[int, int]]) -> Permutation:
    """pi0 o prod (i_t j_t) for pairwise disjoint pairs; the order of ``pairs`` is irrelevant."""
    pairs = [tuple(p) for p in pairs]
    _check_disjoint(pairs, len(pi0))
    imgs = list(pi0.images)
    for i, j in pairs:
        imgs[i - 1], imgs[j - 1] = imgs[j - 1], imgs[i - 1]
    return Permutation(tuple(imgs))


def permuted_vector(b: RealSet, pi: Permutation) -> tuple[Fraction, ...]:
    """b_pi = (b_{pi(1)}, ..., b_{pi(n)})."""
    if len(pi) != len(b):
        raise ValueError("size mismatch")
    return tuple(b[p] for p in pi.images)


def permutohedron_cube_vertex(
    b: RealSet,
    pi0: Permutation,
    pairs: Sequence[tuple[int, int]],
    subset: Iterable[int],
) -> tuple[Fraction, ...]:
    """Vertex b_{pi_I} of the cube spanned by disjoint transpositions, via the closed form.

    ``subset`` holds 1-based positions into ``pairs``. The result is
    b_{pi0} + sum_{t in I} (b_{pi0(j_t)} - b_{pi0(i_t)}) (e_{i_t} - e_{j_t}).
    """
    pairs = [tuple(p) for p in pairs]
    _check_disjoint(pairs, len(pi0))
    chosen = set(subset)
    for t in chosen:
        if not 1 <= t <= len(pairs):
            raise IndexError(f"pair index {t} out of range 1..{len(pairs)}")
    vec = list(permuted_vector(b, pi0))
    for t in sorted(chosen):
        i, j = pairs[t - 1]
        step = b[pi0(j)] - b[pi0(i)]
        vec[i - 1] += step
        vec[j - 1] -= step
    return tuple(vec)
