"""Randomized construction of disjoint swap increments and their certificates.

Two selection modes are supported:

* ``cubic``: m = floor(n/32) paired switches (i j)(k l), each increment drawn
  uniformly from the disjoint-index two-area pool of the surviving rows and
  columns.
* ``lossy``: m = floor(c*sqrt(R)) single transpositions, increments drawn from
  the R smallest nonzero rectangular areas of the surviving grid, with
  R = floor(c0 * n^2 / ln n).

A switch stores its A-indices ``(x0, x1[, x2, x3])`` and B-indices
``(y0, y1[, y2, y3])`` so that its increment is
``sum over pairs of (a_x0 - a_x1)(b_y0 - b_y1)``; the base permutation then maps
``x0 -> y1`` and ``x1 -> y0`` for every pair.

Random draws: one ``Generator.integers`` call per step, in step order, from
``numpy.random.default_rng(seed)``. Candidates are ordered by value before the
draw, so a seed fully determines the run.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import Instance, Permutation, int_array, scale_to_integers
from .pools import pool_grid
from .sumsets import additive_energy, subset_sum_count, supportive_halasz_lower_bound

log = logging.getLogger(__name__)

MODES = ("cubic", "lossy")
FULL_CUBE_MAX_M = 15


class WitnessError(RuntimeError):
    pass


class PoolExhausted(WitnessError):
    """The nonzero area set of the surviving grid is smaller than the requested pool size."""


class RetriesExhausted(WitnessError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int
    seed: int = 0
    mode: str = "cubic"
    c0: Fraction = Fraction(1, 4)
    energy_slack: Fraction = Fraction(16)
    max_retries: int = 10
    lossy_c: Fraction = Fraction(1, 4)
    m_override: int | None = None
    verify_samples: int = 10**4

    def __post_init__(self):
        object.__setattr__(self, "c0", Fraction(self.c0))
        object.__setattr__(self, "energy_slack", Fraction(self.energy_slack))
        object.__setattr__(self, "lossy_c", Fraction(self.lossy_c))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.c0 <= 0 or self.lossy_c <= 0:
            raise ValueError("c0 and lossy_c must be positive")
        if self.energy_slack < 1:
            raise ValueError("energy_slack must be at least 1")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class PairedSwitch:
    a_indices: tuple[int, ...]
    b_indices: tuple[int, ...]
    increment: Fraction

    def __post_init__(self):
        if len(self.a_indices) != len(self.b_indices) or len(self.a_indices) not in (2, 4):
            raise ValueError("a switch has 2 or 4 A-indices and as many B-indices")

    @property
    def pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        a, b = self.a_indices, self.b_indices
        return [((a[h], a[h + 1]), (b[h], b[h + 1])) for h in range(0, len(a), 2)]

    def evaluate(self, inst: Instance) -> Fraction:
        A, B = inst.a, inst.b
        return sum(((A[x0] - A[x1]) * (B[y0] - B[y1]) for (x0, x1), (y0, y1) in self.pairs), Fraction(0))


@dataclass(frozen=True)
class Selection:
    switches: tuple[PairedSwitch, ...]
    transcript: tuple[dict, ...]

    @property
    def increments(self) -> tuple[Fraction, ...]:
        return tuple(s.increment for s in self.switches)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class WitnessCertificate:
    config: RunConfig
    instance: Instance
    seed_used: int
    attempts: int
    switches: tuple[PairedSwitch, ...]
    pi0: tuple[int, ...]
    energy2: int
    sigma_d_size: int
    halasz_bound: int
    halasz_k: int
    checks: tuple[Check, ...] = field(default=())

    @property
    def m(self) -> int:
        return len(self.switches)

    @property
    def D(self) -> tuple[Fraction, ...]:
        return tuple(s.increment for s in self.switches)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def ratios(self) -> dict[str, Fraction]:
        m, n = self.m, self.instance.n
        return {
            "sigma_over_m3": Fraction(self.sigma_d_size, m**3) if m else Fraction(0),
            "sigma_over_n3": Fraction(self.sigma_d_size, n**3),
            "energy_over_m2": Fraction(self.energy2, m**2) if m else Fraction(0),
        }


class _Scaled:
    """A and B rescaled to integers; areas are then integers over ``den``."""

    def __init__(self, inst: Instance):
        self.a, self.da = scale_to_integers(inst.a.elements)
        self.b, self.db = scale_to_integers(inst.b.elements)
        self.den = self.da * self.db
        self.n = inst.n


# ---------------------------------------------------------------------------
# selection


def cubic_m(n: int) -> int:
    return n // 32


def lossy_parameters(n: int, c0: Fraction, c: Fraction) -> tuple[int, int]:
    """(R, m) with R = floor(c0 n^2 / ln n) and m = floor(c sqrt(R))."""
    if n < 2:
        return 0, 0
    R = math.floor(float(c0) * n * n / math.log(n))
    return R, math.isqrt(math.floor(c * c * R))


def _canonical(vals: np.ndarray) -> np.ndarray:
    """Indices sorting ``vals`` increasingly (works for object arrays too)."""
    if vals.dtype == object:
        return np.array(sorted(range(len(vals)), key=lambda g: vals[g]), dtype=np.int64)
    return np.argsort(vals, kind="stable")


def _exclude(vals: np.ndarray, chosen: list[int]) -> np.ndarray:
    if vals.dtype == object:
        bad = set(chosen) | {0}
        return np.array([v not in bad for v in vals], dtype=bool)
    return (vals != 0) & ~np.isin(vals, np.asarray(chosen, dtype=np.int64))


def select_increments_cubic(inst: Instance, config: RunConfig) -> Selection:
    n = inst.n
    m = cubic_m(n) if config.m_override is None else config.m_override
    if m < 1:
        raise ValueError(f"cubic mode needs n >= 32 (m = floor(n/32) = {m})")
    if n - 4 * (m - 1) < 4:
        raise ValueError(f"m = {m} switches do not fit in n = {n}")
    sc = _Scaled(inst)
    rng = np.random.default_rng(config.seed)
    alive_a = list(range(1, n + 1))
    alive_b = list(range(1, n + 1))
    chosen: list[int] = []
    switches, transcript = [], []
    for t in range(1, m + 1):
        assert len(alive_a) == len(alive_b) == n - 4 * (t - 1)
        plan, vals = pool_grid([sc.a[i - 1] for i in alive_a], [sc.b[i - 1] for i in alive_b])
        if config.m_override is None and 16 * len(vals) < n * n:
            raise WitnessError(f"step {t}: pool of size {len(vals)} is below n^2/16")
        keep = _exclude(vals, chosen)
        cand = np.flatnonzero(keep)
        if len(cand) == 0:
            raise PoolExhausted(f"step {t}: pool empty after exclusions")
        order = cand[_canonical(vals[cand])]
        draw = int(rng.integers(len(order)))
        g = int(order[draw])
        r, c = divmod(g, len(plan.a_cols))
        a_loc, b_loc = plan.representation(plan.b_rows[r], plan.a_cols[c])
        a_idx = tuple(alive_a[x - 1] for x in a_loc)
        b_idx = tuple(alive_b[y - 1] for y in b_loc)
        value = int(vals[g])
        sw = PairedSwitch(a_idx, b_idx, Fraction(value, sc.den))
        if sw.evaluate(inst) != sw.increment:
            raise AssertionError(f"step {t}: representation does not reproduce the pool value")
        switches.append(sw)
        chosen.append(value)
        transcript.append({"t": t, "pool_size": len(vals), "candidates": len(order), "draw": draw})
        alive_a = [i for i in alive_a if i not in a_idx]
        alive_b = [i for i in alive_b if i not in b_idx]
    return Selection(tuple(switches), tuple(transcript))


def _area_pool(a_vals: list[int], b_vals: list[int]) -> np.ndarray:
    """Distinct nonzero values of (A-A)(B-B), unordered."""
    da = sorted({y - x for x in a_vals for y in a_vals})
    db = sorted({y - x for x in b_vals for y in b_vals})
    bound = max(map(abs, da)) * max(map(abs, db))
    prods = np.unique(np.multiply.outer(int_array(da, bound), int_array(db, bound)).ravel())
    return prods[prods != 0]


def _truncate_pool(vals: np.ndarray, R: int) -> np.ndarray:
    """The R elements smallest in absolute value, ties broken by value."""
    if vals.dtype == object:
        return np.array(sorted(vals, key=lambda v: (abs(v), v))[:R], dtype=object)
    order = np.lexsort((vals, np.abs(vals)))
    return vals[order[:R]]


def _lossy_witness(sc: _Scaled, alive_a: list[int], alive_b: list[int], value: int):
    """Lexicographically smallest (i, j, p, q) with (a_i - a_j)(b_q - b_p) = value."""
    first: dict[int, tuple[int, int]] = {}
    for p in alive_b:
        for q in alive_b:
            if p != q:
                first.setdefault(sc.b[q - 1] - sc.b[p - 1], (p, q))
    for i in alive_a:
        for j in alive_a:
            if i == j:
                continue
            da = sc.a[i - 1] - sc.a[j - 1]
            if value % da == 0 and value // da in first:
                p, q = first[value // da]
                return i, j, p, q
    raise AssertionError(f"no representation for area {value}")


def select_increments_lossy(inst: Instance, config: RunConfig) -> Selection:
    n = inst.n
    R, m = lossy_parameters(n, config.c0, config.lossy_c)
    if config.m_override is not None:
        m = config.m_override
    if m < 1 or R < 1:
        raise ValueError(f"lossy mode needs m >= 1 (n = {n}, R = {R}, m = {m})")
    if 4 * m > n:
        raise ValueError(f"lossy mode needs 2m <= n/2 (n = {n}, m = {m})")
    sc = _Scaled(inst)
    rng = np.random.default_rng(config.seed)
    alive_a = list(range(1, n + 1))
    alive_b = list(range(1, n + 1))
    chosen: list[int] = []
    switches, transcript = [], []
    for t in range(1, m + 1):
        areas = _area_pool([sc.a[i - 1] for i in alive_a], [sc.b[i - 1] for i in alive_b])
        if len(areas) < R:
            raise PoolExhausted(
                f"step {t}: only {len(areas)} nonzero areas, pool size R = {R}; c0 = {config.c0} is too large"
            )
        pool = _truncate_pool(areas, R)
        cand = pool[_exclude(pool, chosen)]
        cand = cand[_canonical(cand)]
        draw = int(rng.integers(len(cand)))
        value = int(cand[draw])
        i, j, p, q = _lossy_witness(sc, alive_a, alive_b, value)
        sw = PairedSwitch((i, j), (q, p), Fraction(value, sc.den))
        switches.append(sw)
        chosen.append(value)
        transcript.append({"t": t, "pool_size": R, "candidates": len(cand), "draw": draw})
        alive_a = [x for x in alive_a if x not in (i, j)]
        alive_b = [x for x in alive_b if x not in (p, q)]
    return Selection(tuple(switches), tuple(transcript))


def select_increments(inst: Instance, config: RunConfig) -> Selection:
    if config.mode == "cubic":
        return select_increments_cubic(inst, config)
    return select_increments_lossy(inst, config)


def energy_accept(D: Sequence[Fraction], m: int | None = None, slack: Fraction = Fraction(16)) -> bool:
    """True iff E_2(D) <= slack * m^2."""
    D = list(D)
    if m is None:
        m = len(D)
    if len(D) != m:
        raise ValueError(f"|D| = {len(D)} but m = {m}")
    if m == 0:
        return True
    return additive_energy(D, 2).energy <= Fraction(slack) * m * m


def build_base_permutation(n: int, switches: Sequence[PairedSwitch]) -> Permutation:
    """Prescribe x0 -> y1, x1 -> y0 for every pair, then fill the rest order-preservingly."""
    images: dict[int, int] = {}
    used_b: set[int] = set()
    for sw in switches:
        for (x0, x1), (y0, y1) in sw.pairs:
            for pos, img in ((x0, y1), (x1, y0)):
                if pos in images or img in used_b:
                    raise ValueError(f"conflicting prescription at position {pos} / image {img}")
                if not (1 <= pos <= n and 1 <= img <= n):
                    raise IndexError(f"index out of range 1..{n}")
                images[pos] = img
                used_b.add(img)
    free_pos = [i for i in range(1, n + 1) if i not in images]
    free_img = [j for j in range(1, n + 1) if j not in used_b]
    images.update(zip(free_pos, free_img))
    return Permutation(tuple(images[i] for i in range(1, n + 1)))


# ---------------------------------------------------------------------------
# verification


def _dot_rows(sc: _Scaled, perms: np.ndarray) -> np.ndarray:
    """Scaled S(pi) for each row of 0-based images."""
    bound = sc.n * max(map(abs, sc.a), default=0) * max(map(abs, sc.b), default=0)
    a = int_array(sc.a, bound)
    b = int_array(sc.b, bound)
    return (a[None, :] * b[perms]).sum(axis=1)


def _toggled(pi0: np.ndarray, switches: Sequence[PairedSwitch], mask: np.ndarray) -> np.ndarray:
    perms = np.tile(pi0, (mask.shape[0], 1))
    for t, sw in enumerate(switches):
        rows = np.flatnonzero(mask[:, t])
        if len(rows) == 0:
            continue
        for (x0, x1), _ in sw.pairs:
            tmp = perms[rows, x0 - 1].copy()
            perms[rows, x0 - 1] = perms[rows, x1 - 1]
            perms[rows, x1 - 1] = tmp
    return perms


def _structure_problems(n: int, cert: WitnessCertificate) -> list[str]:
    problems = []
    if sorted(cert.pi0) != list(range(1, n + 1)):
        problems.append("pi0 is not a permutation of 1..n")
    a_seen, b_seen = set(), set()
    for t, sw in enumerate(cert.switches, 1):
        for x in sw.a_indices:
            if not 1 <= x <= n or x in a_seen:
                problems.append(f"switch {t}: A-index {x} out of range or reused")
            a_seen.add(x)
        for y in sw.b_indices:
            if not 1 <= y <= n or y in b_seen:
                problems.append(f"switch {t}: B-index {y} out of range or reused")
            b_seen.add(y)
    D = cert.D
    if len(set(D)) != len(D):
        problems.append("increments are not distinct")
    if any(d == 0 for d in D):
        problems.append("zero increment")
    return problems


def verify_certificate(
    inst: Instance,
    cert: WitnessCertificate,
    sample_subsets: int = 10**4,
) -> tuple[Check, ...]:
    """Recheck every claim of ``cert`` against ``inst`` from scratch."""
    n, m = inst.n, cert.m
    checks: list[Check] = []
    problems = _structure_problems(n, cert)
    checks.append(Check("structure", not problems, "; ".join(problems) or f"m={m}, supports disjoint"))
    if problems:
        return tuple(checks)

    pi0 = Permutation(cert.pi0)
    bad = []
    for t, sw in enumerate(cert.switches, 1):
        got = Fraction(0)
        for (x0, x1), _ in sw.pairs:
            got += (inst.a[x0] - inst.a[x1]) * (inst.b[pi0(x1)] - inst.b[pi0(x0)])
        if got != sw.increment:
            bad.append(f"t={t}: pi0 gives {got}, certificate says {sw.increment}")
    checks.append(Check("increments", not bad, "; ".join(bad) or "every delta_t reproduced from pi0"))

    sc = _Scaled(inst)
    d_ints = [int(d * sc.den) for d in cert.D]
    pi0_arr = np.asarray(cert.pi0, dtype=np.int64) - 1
    s0 = _dot_rows(sc, pi0_arr[None, :])[0]
    rng = np.random.default_rng([cert.seed_used, 1])
    masks = [np.zeros((1, m), dtype=bool), np.ones((1, m), dtype=bool)]
    if sample_subsets > 0 and m > 0:
        masks.append(rng.random((sample_subsets, m)) < 0.5)
    fails = _exchange_failures(sc, pi0_arr, cert.switches, np.vstack(masks), s0, d_ints)
    checks.append(Check(
        "exchange_identity",
        not fails,
        fails[0] if fails else f"S(pi_I) = S(pi0) + sum_I delta on {sum(len(x) for x in masks)} subsets",
    ))

    if m <= FULL_CUBE_MAX_M:
        realized = set()
        fails = []
        rows = 1 << 12
        for start in range(0, 1 << m, rows):
            ids = np.arange(start, min(start + rows, 1 << m), dtype=np.int64)
            mask = ((ids[:, None] >> np.arange(m)) & 1).astype(bool)
            fails += _exchange_failures(sc, pi0_arr, cert.switches, mask, s0, d_ints, realized)
        ok = not fails and len(realized) == cert.sigma_d_size
        detail = fails[0] if fails else f"{1 << m} vertices realize {len(realized)} distinct values"
        checks.append(Check("cube_realization", ok, detail))
    else:
        checks.append(Check("cube_realization", True, f"m={m} > {FULL_CUBE_MAX_M}: covered by sampled exchange identity"))

    e2 = additive_energy(cert.D, 2).energy if m else 0
    checks.append(Check("energy2", e2 == cert.energy2, f"recomputed {e2}, stored {cert.energy2}"))
    limit = cert.config.energy_slack * m * m
    checks.append(Check("energy_accept", e2 <= limit, f"E2 = {e2} vs slack*m^2 = {limit}"))

    sig = subset_sum_count(cert.D, cap=max(m, 30))
    checks.append(Check("sigma_d_size", sig == cert.sigma_d_size, f"recomputed {sig}, stored {cert.sigma_d_size}"))

    hb, k = _halasz(cert.D)
    ok = hb == cert.halasz_bound and sig >= hb
    checks.append(Check("halasz_bound", ok, f"block bound {hb} (k={k}) <= |Sigma(D)| = {sig}"))
    return tuple(checks)


def _exchange_failures(sc, pi0_arr, switches, mask, s0, d_ints, realized=None) -> list[str]:
    perms = _toggled(pi0_arr, switches, mask)
    got = _dot_rows(sc, perms)
    d = int_array(d_ints, sum(map(abs, d_ints)) + abs(int(s0)))
    want = s0 + (mask.astype(d.dtype) @ d if len(d_ints) else np.zeros(len(mask), dtype=d.dtype))
    if realized is not None:
        realized.update(int(v) for v in got)
    bad = np.flatnonzero(got != want)
    if len(bad) == 0:
        return []
    r = int(bad[0])
    subset = [t + 1 for t in np.flatnonzero(mask[r])]
    return [f"I={subset}: S(pi_I) = {Fraction(int(got[r]), sc.den)} but S(pi0)+sum = {Fraction(int(want[r]), sc.den)}"]


def _halasz(D: Sequence[Fraction]) -> tuple[int, int]:
    nz = [d for d in D if d != 0]
    if not nz:
        return (1, 1)
    pos = sum(d > 0 for d in nz)
    k = 2 if max(pos, len(nz) - pos) >= 2 else 1
    return supportive_halasz_lower_bound(nz, k)[0], k


# ---------------------------------------------------------------------------
# orchestration


def run_witness(inst: Instance, config: RunConfig) -> WitnessCertificate:
    """Select, accept on energy (retrying with seed+1), assemble pi0, count, verify."""
    if config.n != inst.n:
        raise ValueError(f"config.n = {config.n} but instance has n = {inst.n}")
    for attempt in range(config.max_retries):
        seed = (config.seed + attempt) % 2**64
        sel = select_increments(inst, replace(config, seed=seed))
        D = sel.increments
        if energy_accept(D, len(D), config.energy_slack):
            break
        log.info("seed %d rejected: E2(D) above %s * m^2", seed, config.energy_slack)
    else:
        raise RetriesExhausted(f"no seed in {config.seed}..{config.seed + config.max_retries - 1} passed the energy test")
    m = len(D)
    pi0 = build_base_permutation(inst.n, sel.switches)
    sigma = subset_sum_count(D, cap=max(m, 30))
    hb, k = _halasz(D)
    cert = WitnessCertificate(
        config=config,
        instance=inst,
        seed_used=seed,
        attempts=attempt + 1,
        switches=sel.switches,
        pi0=pi0.images,
        energy2=additive_energy(D, 2).energy,
        sigma_d_size=sigma,
        halasz_bound=hb,
        halasz_k=k,
    )
    return replace(cert, checks=verify_certificate(inst, cert, config.verify_samples))


def dissociated(cert: WitnessCertificate) -> bool:
    return cert.sigma_d_size == 2**cert.m


__all__ = [
    "Check",
    "PairedSwitch",
    "PoolExhausted",
    "RetriesExhausted",
    "RunConfig",
    "Selection",
    "WitnessCertificate",
    "WitnessError",
    "build_base_permutation",
    "cubic_m",
    "energy_accept",
    "lossy_parameters",
    "run_witness",
    "select_increments",
    "select_increments_cubic",
    "select_increments_lossy",
    "verify_certificate",
]
