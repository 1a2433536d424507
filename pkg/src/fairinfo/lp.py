"""A minimal exact linear-programming layer.

Problems are boxes plus a handful of dense rows, so this is a plain tableau
simplex: two phases, Bland's anti-cycling rule, no sparsity machinery.  All
arithmetic runs in the number type of the inputs; feeding Fractions gives an
exact rational solve with zero tolerances, feeding floats uses a fixed pivot
tolerance.  Infeasible and unbounded problems are reported as statuses, not
exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

Number = Union[int, float, Fraction]

RELATIONS = ("<=", "=", ">=")

FLOAT_TOL = 1e-9
MAX_PIVOTS = 100_000


class LpFormatError(ValueError):
    """Structurally invalid linear program."""


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Number, ...]
    relation: str
    rhs: Number

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise LpFormatError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))


@dataclass(frozen=True)
class LinearProgram:
    """max/min c.x subject to box bounds and dense relational rows."""

    names: tuple[str, ...]
    objective: tuple[Number, ...]
    maximize: bool
    bounds: tuple[tuple[Number, Optional[Number]], ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "objective", tuple(self.objective))
        object.__setattr__(self, "bounds", tuple(tuple(b) for b in self.bounds))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        n = len(self.names)
        if len(set(self.names)) != n:
            raise LpFormatError("variable names must be unique")
        if len(self.objective) != n or len(self.bounds) != n:
            raise LpFormatError("objective/bounds length must match variable count")
        for lo, hi in self.bounds:
            if hi is not None and lo > hi:
                raise LpFormatError(f"bound lo {lo} exceeds hi {hi}")
        for c in self.constraints:
            if len(c.coeffs) != n:
                raise LpFormatError("constraint width must match variable count")

    def is_exact(self) -> bool:
        values: list[Number] = list(self.objective)
        for lo, hi in self.bounds:
            values.append(lo)
            if hi is not None:
                values.append(hi)
        for c in self.constraints:
            values.extend(c.coeffs)
            values.append(c.rhs)
        return all(isinstance(v, (int, Fraction)) for v in values)

    def format_text(self) -> str:
        """One-constraint-per-line debug rendering (not a stable format)."""
        sense = "max" if self.maximize else "min"
        terms = " + ".join(f"{c}*{x}" for c, x in zip(self.objective, self.names) if c != 0)
        lines = [f"{sense} {terms or '0'}"]
        for con in self.constraints:
            row = " + ".join(f"{c}*{x}" for c, x in zip(con.coeffs, self.names) if c != 0)
            lines.append(f"  {row or '0'} {con.relation} {con.rhs}")
        for (lo, hi), x in zip(self.bounds, self.names):
            lines.append(f"  {lo} <= {x}" + (f" <= {hi}" if hi is not None else ""))
        return "\n".join(lines)


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    assignment: dict[str, Number] = field(default_factory=dict)
    objective_value: Optional[Number] = None

    def __getitem__(self, name: str) -> Number:
        return self.assignment[name]


def _to_exact(v: Number) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class _Tableau:
    """Dense simplex tableau over either float or Fraction arithmetic."""

    def __init__(self, rows: list[list[Number]], rhs: list[Number], tol: Number):
        self.rows = rows
        self.rhs = rhs
        self.tol = tol
        self.basis: list[int] = []

    def pivot(self, row: int, col: int) -> None:
        piv = self.rows[row][col]
        inv = 1 / piv
        self.rows[row] = [a * inv for a in self.rows[row]]
        self.rhs[row] = self.rhs[row] * inv
        for i in range(len(self.rows)):
            if i == row:
                continue
            factor = self.rows[i][col]
            if factor == 0:
                continue
            self.rows[i] = [a - factor * b for a, b in zip(self.rows[i], self.rows[row])]
            self.rhs[i] = self.rhs[i] - factor * self.rhs[row]
        self.basis[row] = col

    def reduced_costs(self, cost: list[Number]) -> tuple[list[Number], Number]:
        """Cost row after eliminating the basic columns; returns (row, offset)."""
        row = list(cost)
        offset: Number = 0
        for i, b in enumerate(self.basis):
            cb = row[b]
            if cb == 0:
                continue
            row = [a - cb * r for a, r in zip(row, self.rows[i])]
            offset = offset + cb * self.rhs[i]
        return row, offset

    def run(self, cost: list[Number]) -> tuple[str, Number]:
        """Minimize cost.x from the current basic feasible point (Bland's rule)."""
        red, offset = self.reduced_costs(cost)
        for _ in range(MAX_PIVOTS):
            entering = -1
            for j, cj in enumerate(red):
                if cj < -self.tol:
                    entering = j
                    break
            if entering < 0:
                return "optimal", offset
            leaving = -1
            best_ratio: Number = 0
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > self.tol:
                    ratio = self.rhs[i] / a
                    if (
                        leaving < 0
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leaving])
                    ):
                        leaving = i
                        best_ratio = ratio
            if leaving < 0:
                return "unbounded", offset
            self.pivot(leaving, entering)
            red, offset = self.reduced_costs(cost)
        raise RuntimeError("simplex failed to terminate")  # pragma: no cover


def solve(lp: LinearProgram, exact: Optional[bool] = None) -> LpSolution:
    """Solve the program with a two-phase tableau simplex.

    ``exact=None`` auto-detects: programs whose data are all ints/Fractions
    are solved in exact rational arithmetic.  Deterministic for fixed input.
    """
    if exact is None:
        exact = lp.is_exact()

    def conv(v: Number) -> Number:
        return _to_exact(v) if exact else float(v)

    tol: Number = Fraction(0) if exact else FLOAT_TOL
    n = len(lp.names)
    lows = [conv(lo) for lo, _ in lp.bounds]

    # shifted variables x~ = x - lo >= 0; finite upper bounds become rows
    rows: list[list[Number]] = []
    rels: list[str] = []
    rhs: list[Number] = []
    for con in lp.constraints:
        coeffs = [conv(c) for c in con.coeffs]
        shift = sum(c * l for c, l in zip(coeffs, lows))
        rows.append(coeffs)
        rels.append(con.relation)
        rhs.append(conv(con.rhs) - shift)
    for j, (lo, hi) in enumerate(lp.bounds):
        if hi is None:
            continue
        row: list[Number] = [conv(0)] * n
        row[j] = conv(1)
        rows.append(row)
        rels.append("<=")
        rhs.append(conv(hi) - conv(lo))

    # normalize rhs >= 0, add slack/surplus, then artificials where needed
    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    slack_cols: dict[int, int] = {}
    total = n
    for i in range(m):
        if rels[i] in ("<=", ">="):
            slack_cols[i] = total
            total += 1
    artificial_cols: dict[int, int] = {}
    for i in range(m):
        if rels[i] in ("=", ">="):
            artificial_cols[i] = total
            total += 1

    zero, one = conv(0), conv(1)
    full_rows: list[list[Number]] = []
    for i in range(m):
        row = list(rows[i]) + [zero] * (total - n)
        if i in slack_cols:
            row[slack_cols[i]] = one if rels[i] == "<=" else -one
        if i in artificial_cols:
            row[artificial_cols[i]] = one
        full_rows.append(row)

    tab = _Tableau(full_rows, list(rhs), tol)
    tab.basis = [
        artificial_cols[i] if i in artificial_cols else slack_cols[i] for i in range(m)
    ]

    feas_eps: Number = Fraction(0) if exact else 1e-9
    if artificial_cols:
        phase1 = [zero] * total
        for col in artificial_cols.values():
            phase1[col] = one
        status, value = tab.run(phase1)
        if status != "optimal" or value > feas_eps:
            return LpSolution("infeasible")
        # pivot lingering artificials out; rows with no real coefficient are redundant
        art_set = set(artificial_cols.values())
        for i in list(range(len(tab.basis))):
            if tab.basis[i] in art_set:
                col = next(
                    (j for j in range(total) if j not in art_set and abs(tab.rows[i][j]) > tol),
                    None,
                )
                if col is not None:
                    tab.pivot(i, col)
        keep = [i for i in range(len(tab.basis)) if tab.basis[i] not in art_set]
        tab.rows = [[v for j, v in enumerate(tab.rows[i]) if j not in art_set] for i in keep]
        tab.rhs = [tab.rhs[i] for i in keep]
        remap = [j for j in range(total) if j not in art_set]
        index_of = {old: new for new, old in enumerate(remap)}
        tab.basis = [index_of[tab.basis[i]] for i in keep]
        total = len(remap)

    sign = -1 if lp.maximize else 1
    cost = [sign * conv(c) for c in lp.objective] + [zero] * (total - n)
    status, value = tab.run(cost)
    if status == "unbounded":
        return LpSolution("unbounded")

    solution = [zero] * total
    for i, b in enumerate(tab.basis):
        solution[b] = tab.rhs[i]
    assignment = {
        name: solution[j] + lows[j] for j, name in enumerate(lp.names)
    }
    shift_cost = sum(sign * conv(c) * l for c, l in zip(lp.objective, lows))
    objective = sign * (value + shift_cost)
    return LpSolution("optimal", assignment, objective)
