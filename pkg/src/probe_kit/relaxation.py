"""Relaxations of the probing problem over intersected matroid polytopes:
enumerated-constraint LP for linear objectives, discretized continuous greedy
for submodular ones, and the joint LP that maximizes the correlation-gap
relaxation exactly (used as an oracle at desk scale).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import CapabilityError
from .instances import ProbingInstance
from .matroids import bits
from .objectives import multilinear_value_from_table
from .polytope import in_polytope

LP_ENUM_CAP = 16  # constraint-enumeration limit on |E|
FEAS_TOL = 1e-7
SHRINK = 1.0 - 1e-9  # pull solver output strictly inside the polytope


@dataclass
class LinearProgram:
    """max c.x subject to A_ub x <= b_ub, x in [0,1]^n (dense rows)."""

    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass
class RelaxedSolution:
    x0: np.ndarray
    objective_value: float
    mode: str  # "lp" or "continuous_greedy"
    steps: int = 0
    trajectory_values: List[float] = field(default_factory=list)


def solve_lp(lp: LinearProgram) -> Tuple[np.ndarray, float]:
    """Maximize the LP; raises on infeasibility (cannot occur for x=0-feasible programs)."""
    res = linprog(
        c=-lp.c,
        A_ub=lp.a_ub if lp.a_ub.size else None,
        b_ub=lp.b_ub if lp.b_ub.size else None,
        bounds=[(0.0, 1.0)] * lp.n,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP solve failed: {res.message}")
    return np.clip(res.x, 0.0, 1.0), float(-res.fun)


def _polytope_rows(inst: ProbingInstance) -> Tuple[np.ndarray, np.ndarray]:
    """One rank constraint per nonempty subset per matroid.

    Outer matroids constrain x directly; inner matroids constrain p * x.
    """
    if inst.n > LP_ENUM_CAP:
        raise CapabilityError(f"constraint enumeration limited to {LP_ENUM_CAP} elements")
    n = inst.n
    rows = []
    rhs = []
    for mask in range(1, 1 << n):
        members = list(bits(mask))
        for m in inst.outer:
            row = np.zeros(n)
            row[members] = 1.0
            rows.append(row)
            rhs.append(float(m.rank_mask(mask)))
        for m in inst.inner:
            row = np.zeros(n)
            for i in members:
                row[i] = inst.p[i]
            rows.append(row)
            rhs.append(float(m.rank_mask(mask)))
    return np.array(rows), np.array(rhs)


def build_probing_lp(inst: ProbingInstance) -> LinearProgram:
    """The linear relaxation: maximize sum p_e w_e x_e over the joint polytope."""
    if not inst.objective.is_linear:
        raise ValueError("build_probing_lp requires a linear objective")
    a_ub, b_ub = _polytope_rows(inst)
    c = np.array([inst.p[e] * inst.objective.weights[e] for e in range(inst.n)])
    return LinearProgram(c=c, a_ub=a_ub, b_ub=b_ub)


def _repair_point(inst: ProbingInstance, x: np.ndarray) -> np.ndarray:
    """Clamp and shrink a solver output until it is strictly feasible."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0) * SHRINK
    x[x < 1e-12] = 0.0
    for _ in range(40):
        if relaxation_feasible(inst, x, tol=1e-12):
            return x
        x = x * (1.0 - 1e-7)
    raise RuntimeError("could not repair relaxation point into the polytope")


def relaxation_feasible(inst: ProbingInstance, x: Sequence[float], tol: float = FEAS_TOL) -> bool:
    px = [inst.p[i] * x[i] for i in range(inst.n)]
    return all(in_polytope(m, x, tol) for m in inst.outer) and all(
        in_polytope(m, px, tol) for m in inst.inner
    )


def solve_relaxation_lp(inst: ProbingInstance) -> RelaxedSolution:
    lp = build_probing_lp(inst)
    x, _ = solve_lp(lp)
    x0 = _repair_point(inst, x)
    return RelaxedSolution(
        x0=x0, objective_value=float(lp.c @ x0), mode="lp", steps=1
    )


def lp_optimum(inst: ProbingInstance) -> float:
    """Exact optimum of the linear relaxation (unrepaired; oracle comparisons)."""
    _, value = solve_lp(build_probing_lp(inst))
    return value


def continuous_greedy(inst: ProbingInstance, steps: int = 200) -> RelaxedSolution:
    """Discretized ascent of F(p * y) over the joint polytope.

    Each iteration solves the LP maximizing the current multilinear gradient
    direction and moves y a 1/steps fraction towards the optimizer; the final
    y is an average of feasible points, hence feasible.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = inst.n
    table = inst.objective.value_table()
    a_ub, b_ub = _polytope_rows(inst)
    p = np.asarray(inst.p, dtype=float)
    y = np.zeros(n)
    values = []
    for _ in range(steps):
        py = p * y
        omega = np.empty(n)
        for e in range(n):
            hi = py.copy()
            lo = py.copy()
            hi[e], lo[e] = 1.0, 0.0
            grad = multilinear_value_from_table(table, hi) - multilinear_value_from_table(
                table, lo
            )
            omega[e] = p[e] * grad
        v, _ = solve_lp(LinearProgram(c=omega, a_ub=a_ub, b_ub=b_ub))
        y = y + v / steps
        values.append(multilinear_value_from_table(table, p * y))
    x0 = _repair_point(inst, np.clip(y, 0.0, 1.0))
    final_value = multilinear_value_from_table(table, p * x0)
    return RelaxedSolution(
        x0=x0,
        objective_value=final_value,
        mode="continuous_greedy",
        steps=steps,
        trajectory_values=values,
    )


def solve_relaxation(inst: ProbingInstance, cg_steps: int = 200) -> RelaxedSolution:
    if inst.objective.is_linear:
        return solve_relaxation_lp(inst)
    return continuous_greedy(inst, steps=cg_steps)


def max_f_plus_over_polytope(inst: ProbingInstance) -> float:
    """Exact max of f+(p * x) over the relaxation polytope, as one joint LP.

    Variables are the distribution weights alpha_A (2^n columns) plus x; the
    marginal constraints tie sum_{A ni j} alpha_A <= p_j x_j.  Brute-force
    oracle for dominance and continuous-greedy bound checks.
    """
    if inst.n > 10:
        raise CapabilityError("f+ polytope maximization limited to 10 elements")
    n = inst.n
    ncols = 1 << n
    table = inst.objective.value_table()
    rows_x, rhs_x = _polytope_rows(inst)
    nvar = ncols + n  # alpha block then x block
    rows = []
    rhs = []
    # sum alpha <= 1
    row = np.zeros(nvar)
    row[:ncols] = 1.0
    rows.append(row)
    rhs.append(1.0)
    # marginals: sum_{A ni j} alpha_A - p_j x_j <= 0
    for j in range(n):
        row = np.zeros(nvar)
        for mask in range(ncols):
            if mask >> j & 1:
                row[mask] = 1.0
        row[ncols + j] = -inst.p[j]
        rows.append(row)
        rhs.append(0.0)
    # polytope rows on x
    for r, b in zip(rows_x, rhs_x):
        row = np.zeros(nvar)
        row[ncols:] = r
        rows.append(row)
        rhs.append(b)
    c = np.zeros(nvar)
    c[:ncols] = -np.asarray(table)
    res = linprog(
        c=c,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(0.0, None)] * ncols + [(0.0, 1.0)] * n,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"f+ polytope LP failed: {res.message}")
    return float(-res.fun)


def enumerate_basic_solutions(lp: LinearProgram, tol: float = 1e-9):
    """Brute-force vertex scan of a tiny LP, the independence oracle for solve_lp.

    Enumerates basic solutions from all choices of n tight constraints (rows
    or box facets) and yields the feasible ones.
    """
    import itertools as it

    n = lp.n
    rows = [(lp.a_ub[i], lp.b_ub[i]) for i in range(len(lp.b_ub))]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append((e, 1.0))
        rows.append((-e, 0.0))
    best = None
    for combo in it.combinations(range(len(rows)), n):
        a = np.array([rows[i][0] for i in combo])
        b = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, b)
        if np.any(x < -tol) or np.any(x > 1 + tol):
            continue
        if lp.a_ub.size and np.any(lp.a_ub @ x > lp.b_ub + tol):
            continue
        yield np.clip(x, 0.0, 1.0)
