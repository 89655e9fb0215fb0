"""Objective evaluation: linear and monotone submodular set functions, the
multilinear extension F (exact and sampled), its partial derivatives, and the
correlation-gap relaxation solved by brute force.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .errors import CapabilityError
from .matroids import Matroid, bits, mask_of

EXACT_CAP = 20  # exact multilinear enumeration limit
FPLUS_CAP = 10  # 2^n LP columns limit


@dataclass(frozen=True)
class MultilinearValue:
    value: float
    stderr: float = 0.0


class Objective:
    """Base: a normalized monotone set function over ground set 0..n-1."""

    n: int
    is_linear = False

    def value_mask(self, mask: int) -> float:
        raise NotImplementedError

    def value(self, s: Iterable[int]) -> float:
        mask = mask_of(s)
        if mask >> self.n:
            raise ValueError("element outside the objective's ground set")
        return self.value_mask(mask)

    def value_table(self) -> List[float]:
        """All 2^n values, cached; the exact-mode workhorse for small n."""
        if self.n > EXACT_CAP:
            raise CapabilityError(f"value table limited to {EXACT_CAP} elements")
        cached = getattr(self, "_table", None)
        if cached is None:
            cached = [self.value_mask(m) for m in range(1 << self.n)]
            object.__setattr__(self, "_table", cached)
        return cached

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(d: dict) -> "Objective":
        kind = d["kind"]
        if kind == "linear":
            return LinearObjective(d["weights"])
        if kind == "coverage":
            return CoverageObjective(d["covers"], d["item_weights"])
        if kind == "weighted_matroid_rank":
            return WeightedRankObjective(Matroid.from_json(d["matroid"]), d["weights"])
        raise ValueError(f"unknown objective kind {kind!r}")


class LinearObjective(Objective):
    def __init__(self, weights: Sequence[float]):
        if any(w < 0 for w in weights):
            raise ValueError("linear weights must be nonnegative")
        self.weights = [float(w) for w in weights]
        self.n = len(self.weights)

    is_linear = True

    def value_mask(self, mask: int) -> float:
        return sum(self.weights[i] for i in bits(mask))

    def to_json(self):
        return {"kind": "linear", "weights": self.weights}


class CoverageObjective(Objective):
    """f(S) = total weight of items covered by at least one element of S."""

    def __init__(self, covers: Sequence[Iterable[int]], item_weights: Sequence[float]):
        if any(w < 0 for w in item_weights):
            raise ValueError("item weights must be nonnegative")
        self.covers = [sorted(set(c)) for c in covers]
        self.item_weights = [float(w) for w in item_weights]
        self.n = len(self.covers)
        n_items = len(item_weights)
        for c in self.covers:
            if any(not 0 <= i < n_items for i in c):
                raise ValueError("covered item index out of range")
        self._cover_masks = [mask_of(c) for c in self.covers]

    is_linear = False

    def value_mask(self, mask: int) -> float:
        covered = 0
        for i in bits(mask):
            covered |= self._cover_masks[i]
        return sum(self.item_weights[j] for j in bits(covered))

    def to_json(self):
        return {
            "kind": "coverage",
            "covers": self.covers,
            "item_weights": self.item_weights,
        }


class WeightedRankObjective(Objective):
    """f(S) = max weight of an independent subset of S (matroid greedy)."""

    def __init__(self, matroid: Matroid, weights: Sequence[float]):
        if len(weights) != matroid.ground_size:
            raise ValueError("one weight per ground element required")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        self.matroid = matroid
        self.weights = [float(w) for w in weights]
        self.n = matroid.ground_size
        self._order = sorted(range(self.n), key=lambda i: (-self.weights[i], i))

    is_linear = False

    def value_mask(self, mask: int) -> float:
        best = self.matroid.max_independent_subset(
            i for i in self._order if mask >> i & 1
        )
        return sum(self.weights[i] for i in bits(best))

    def to_json(self):
        return {
            "kind": "weighted_matroid_rank",
            "matroid": self.matroid.to_json(),
            "weights": self.weights,
        }


# ---------------------------------------------------------------------------
# Multilinear extension
# ---------------------------------------------------------------------------


def _split_point(y: Sequence[float]):
    base = 0
    frac = []
    for i, v in enumerate(y):
        if not -1e-12 <= v <= 1 + 1e-12:
            raise ValueError("multilinear argument must lie in the unit cube")
        if v >= 1.0:
            base |= 1 << i
        elif v > 0.0:
            frac.append((i, float(v)))
    return base, frac


def multilinear_exact(f: Objective, y: Sequence[float]) -> MultilinearValue:
    """F(y) by exact enumeration over the fractional coordinates of y."""
    if f.n > EXACT_CAP:
        raise CapabilityError(f"exact multilinear limited to {EXACT_CAP} elements")
    if len(y) != f.n:
        raise ValueError("dimension mismatch")
    base, frac = _split_point(y)
    total = 0.0
    k = len(frac)
    for sub in range(1 << k):
        mask = base
        prob = 1.0
        for j in range(k):
            i, v = frac[j]
            if sub >> j & 1:
                mask |= 1 << i
                prob *= v
            else:
                prob *= 1.0 - v
        total += prob * f.value_mask(mask)
    return MultilinearValue(total, 0.0)


def multilinear_value_from_table(table: Sequence[float], y: Sequence[float]) -> float:
    """F(y) using a precomputed value table; hot path for the engine."""
    base, frac = _split_point(y)
    total = 0.0
    k = len(frac)
    for sub in range(1 << k):
        mask = base
        prob = 1.0
        for j in range(k):
            i, v = frac[j]
            if sub >> j & 1:
                mask |= 1 << i
                prob *= v
            else:
                prob *= 1.0 - v
        total += prob * table[mask]
    return total


def multilinear_sample(
    f: Objective, y: Sequence[float], n_samples: int, rng: random.Random
) -> MultilinearValue:
    """Monte Carlo estimate of F(y) with independent inclusion sampling."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if len(y) != f.n:
        raise ValueError("dimension mismatch")
    total = 0.0
    total_sq = 0.0
    for _ in range(n_samples):
        mask = 0
        for i, v in enumerate(y):
            if v >= 1.0 or (v > 0.0 and rng.random() < v):
                mask |= 1 << i
        val = f.value_mask(mask)
        total += val
        total_sq += val * val
    mean = total / n_samples
    if n_samples == 1:
        return MultilinearValue(mean, 0.0)
    var = max(0.0, (total_sq - n_samples * mean * mean) / (n_samples - 1))
    return MultilinearValue(mean, math.sqrt(var / n_samples))


def partial_derivative(f: Objective, y: Sequence[float], e: int) -> float:
    """dF/dy_e at y, exact: F(y with y_e=1) - F(y with y_e=0)."""
    if not 0 <= e < f.n:
        raise ValueError("element outside ground set")
    hi = list(y)
    lo = list(y)
    hi[e], lo[e] = 1.0, 0.0
    return multilinear_exact(f, hi).value - multilinear_exact(f, lo).value


# ---------------------------------------------------------------------------
# Correlation-gap relaxation f+
# ---------------------------------------------------------------------------


def f_plus_bruteforce(f: Objective, y: Sequence[float]) -> float:
    """Best expected value over distributions with marginals dominated by y.

    Solved as an LP over weights alpha_A for every A subset of E:
    max sum alpha_A f(A) with sum alpha <= 1, alpha >= 0, and for each j
    sum over A containing j of alpha_A <= y_j.
    """
    from scipy.optimize import linprog

    if f.n > FPLUS_CAP:
        raise CapabilityError(f"f+ brute force limited to {FPLUS_CAP} elements")
    if len(y) != f.n:
        raise ValueError("dimension mismatch")
    n = f.n
    ncols = 1 << n
    table = f.value_table()
    a_ub = np.zeros((n + 1, ncols))
    for mask in range(ncols):
        for i in bits(mask):
            a_ub[i, mask] = 1.0
        a_ub[n, mask] = 1.0
    b_ub = np.array([min(max(float(v), 0.0), 1.0) for v in y] + [1.0])
    res = linprog(
        c=-np.asarray(table),
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(0, None)] * ncols,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"f+ LP failed: {res.message}")
    return float(-res.fun)


# ---------------------------------------------------------------------------
# Structure checks (test / cmd_verify support)
# ---------------------------------------------------------------------------


def objective_structure_violations(f: Objective, limit: int = 10) -> list:
    """Exhaustive check of normalization, monotonicity, and submodularity."""
    if f.n > limit:
        raise ValueError(f"structure check limited to {limit} elements")
    table = f.value_table()
    problems = []
    if abs(table[0]) > 1e-12:
        problems.append("f(empty) != 0")
    full = (1 << f.n) - 1
    for mask in range(1 << f.n):
        for i in bits(full & ~mask):
            if table[mask | (1 << i)] < table[mask] - 1e-12:
                problems.append(f"monotonicity fails adding {i} to {mask:b}")
    for s in range(1 << f.n):
        for t in range(s + 1, 1 << f.n):
            if table[s | t] + table[s & t] > table[s] + table[t] + 1e-9:
                problems.append(f"submodularity fails at masks {s:b}, {t:b}")
                if len(problems) > 20:
                    return problems
    return problems
