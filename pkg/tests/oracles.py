"""Brute-force oracles used only by the test suite.

The vertex enumeration here is deliberately independent of the simplex under
test: it reduces every program to a stack of <= rows (bounds included),
enumerates all n-subsets of rows as candidate active sets, solves each square
system, filters for feasibility, and maximizes directly.
"""

from __future__ import annotations

import itertools

import numpy as np

from fairinfo.lp import Constraint, LinearProgram


def lp_to_leq_stack(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A, b, c) with every constraint and bound as A x <= b; maximizing c."""
    n = len(lp.names)
    rows, rhs = [], []
    for con in lp.constraints:
        coeffs = np.array([float(v) for v in con.coeffs])
        b = float(con.rhs)
        if con.relation in ("<=", "="):
            rows.append(coeffs)
            rhs.append(b)
        if con.relation in (">=", "="):
            rows.append(-coeffs)
            rhs.append(-b)
    for j, (lo, hi) in enumerate(lp.bounds):
        row = np.zeros(n)
        row[j] = 1.0
        if hi is None:
            raise ValueError("enumeration oracle requires finite boxes")
        rows.append(row.copy())
        rhs.append(float(hi))
        rows.append(-row)
        rhs.append(-float(lo))
    c = np.array([float(v) for v in lp.objective])
    if not lp.maximize:
        c = -c
    return np.array(rows), np.array(rhs), c


def best_vertex_value(lp: LinearProgram, feas_tol: float = 1e-9) -> float | None:
    """Optimal objective by enumerating candidate active sets; None if infeasible.

    Assumes the feasible region is bounded (finite boxes), so the optimum sits
    at a vertex defined by n active rows.
    """
    A, b, c = lp_to_leq_stack(lp)
    n = A.shape[1]
    combos = np.array(list(itertools.combinations(range(A.shape[0]), n)))
    sub_a = A[combos]
    sub_b = b[combos]
    dets = np.abs(np.linalg.det(sub_a))
    usable = dets > 1e-10
    if not usable.any():
        return None
    points = np.linalg.solve(sub_a[usable], sub_b[usable][..., None])[..., 0]
    feasible = (points @ A.T <= b + feas_tol).all(axis=1)
    if not feasible.any():
        return None
    values = points[feasible] @ c
    best = float(values.max())
    return best if lp.maximize else -best


def random_box_lp(seed: int, n: int = 6, m: int = 4) -> LinearProgram:
    """Feasible-at-zero, box-bounded random program with small integer data."""
    rng = np.random.default_rng(seed)
    names = tuple(f"x{i}" for i in range(n))
    objective = tuple(int(v) for v in rng.integers(-3, 4, size=n))
    bounds = tuple((0, float(rng.choice([0.5, 1.0, 2.0]))) for _ in range(n))
    constraints = []
    for _ in range(m):
        coeffs = tuple(int(v) for v in rng.integers(-3, 4, size=n))
        relation = "<=" if rng.random() < 0.8 else ">="
        rhs = float(np.round(rng.uniform(0, 4), 3)) if relation == "<=" else 0.0
        constraints.append(Constraint(coeffs, relation, rhs))
    if rng.random() < 0.3:
        coeffs = tuple(int(v) for v in rng.integers(-2, 3, size=n))
        constraints.append(Constraint(coeffs, "=", 0.0))
    return LinearProgram(names, objective, True, bounds, tuple(constraints))


def dual_of_box_lp(lp: LinearProgram) -> LinearProgram:
    """Hand-built dual of max c x s.t. A x <= b, 0 <= x <= u.

    Treating the upper bounds as ordinary rows gives
    min b y + u w  s.t.  A^T y + w >= c,  y, w >= 0.
    """
    n = len(lp.names)
    rows = []
    rhs = []
    for con in lp.constraints:
        if con.relation != "<=":
            raise ValueError("dual helper expects <= rows only")
        rows.append([float(v) for v in con.coeffs])
        rhs.append(float(con.rhs))
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo != 0 or hi is None:
            raise ValueError("dual helper expects [0, u] boxes")
        row = [0.0] * n
        row[j] = 1.0
        rows.append(row)
        rhs.append(float(hi))
    m = len(rows)
    names = tuple(f"y{i}" for i in range(m))
    objective = tuple(rhs)
    bounds = tuple((0, None) for _ in range(m))
    constraints = []
    for j in range(n):
        coeffs = tuple(rows[i][j] for i in range(m))
        constraints.append(Constraint(coeffs, ">=", float(lp.objective[j])))
    return LinearProgram(names, objective, False, bounds, tuple(constraints))
