"""Finite weighted populations, group labels, predictors, and score distributions.

A population is an explicit, finite set of cells.  Each cell carries a
probability mass, a group label, and its true risk ``p_star``.  Predictors
assign a score in [0, 1] to every cell; level sets and score distributions are
derived from exact equality of score values.

Masses, risks, and scores may be ``float`` or ``fractions.Fraction``.  When
every quantity involved is a ``Fraction``, all derived statistics stay exact;
this is the rational mode used by the test oracles.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, float, Fraction]

MASS_TOL = 1e-12


class Group(enum.Enum):
    """The two disjoint subpopulations."""

    A = "A"
    B = "B"

    def __str__(self) -> str:  # pragma: no cover - repr sugar
        return self.value


#: Scope marker selecting the whole population instead of a single group.
ALL = "all"

Scope = Union[Group, str]


class PopulationError(ValueError):
    """Invalid population data: a violated invariant or a malformed file."""


class EmptyScopeError(PopulationError):
    """Requested scope contains no cells."""


def as_group(value: Group | str) -> Group:
    if isinstance(value, Group):
        return value
    try:
        return Group(value)
    except ValueError:
        raise PopulationError(f"unknown group {value!r}; expected 'A' or 'B'") from None


def normalize_scope(scope: Scope) -> Scope:
    """Canonicalize a scope argument to a ``Group`` or the ``ALL`` marker."""
    if isinstance(scope, Group):
        return scope
    if isinstance(scope, str) and scope.lower() == ALL:
        return ALL
    return as_group(scope)


def scope_name(scope: Scope) -> str:
    return scope.value if isinstance(scope, Group) else ALL


@dataclass(frozen=True)
class Cell:
    """One atomic unit of population mass.

    id:      opaque unique identifier
    mass:    probability weight in (0, 1]
    group:   group label
    p_star:  true risk, the probability of a positive outcome, in [0, 1]
    """

    id: str
    mass: Number
    group: Group
    p_star: Number

    def __post_init__(self) -> None:
        object.__setattr__(self, "group", as_group(self.group))
        if not 0 < self.mass <= 1:
            raise PopulationError(f"cell {self.id!r}: mass {self.mass} outside (0, 1]")
        if not 0 <= self.p_star <= 1:
            raise PopulationError(f"cell {self.id!r}: p_star {self.p_star} outside [0, 1]")


@dataclass(frozen=True)
class Population:
    """A finite population whose cell masses sum to one.

    Immutable after construction; all derived views are pure functions of the
    cell list, so instances may be shared freely across threads.
    """

    cells: tuple[Cell, ...]
    group_index: dict[Group, tuple[Cell, ...]] = field(init=False, repr=False, compare=False)

    def __init__(self, cells: Iterable[Cell]):
        object.__setattr__(self, "cells", tuple(cells))
        if not self.cells:
            raise PopulationError("population has no cells")
        seen: set[str] = set()
        for cell in self.cells:
            if cell.id in seen:
                raise PopulationError(f"duplicate cell id {cell.id!r}")
            seen.add(cell.id)
        total = sum(c.mass for c in self.cells)
        if abs(total - 1) > MASS_TOL:
            raise PopulationError(f"mass-sum: cell masses total {float(total)!r}, expected 1")
        index: dict[Group, tuple[Cell, ...]] = {}
        for group in Group:
            members = tuple(c for c in self.cells if c.group is group)
            if members:
                index[group] = members
        object.__setattr__(self, "group_index", index)

    @property
    def groups(self) -> tuple[Group, ...]:
        """Groups present with positive mass, in enum order."""
        return tuple(self.group_index)

    def scope_cells(self, scope: Scope) -> tuple[Cell, ...]:
        scope = normalize_scope(scope)
        if scope == ALL:
            return self.cells
        cells = self.group_index.get(scope, ())
        if not cells:
            raise EmptyScopeError(f"group {scope_name(scope)} has no cells")
        return cells

    def scope_mass(self, scope: Scope) -> Number:
        return sum(c.mass for c in self.scope_cells(scope))

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    def is_exact(self) -> bool:
        """True when all masses and risks are rationals (Fraction/int)."""
        return all(
            isinstance(c.mass, (Fraction, int)) and isinstance(c.p_star, (Fraction, int))
            for c in self.cells
        )


def grid_points(alpha: Number) -> list[Number]:
    """The admissible score grid {alpha/2, 3*alpha/2, ...} within (0, 1)."""
    if not 0 < alpha < 1:
        raise PopulationError(f"grid alpha {alpha} outside (0, 1)")
    points = []
    k = 0
    while True:
        v = alpha / 2 + k * alpha
        if v >= 1:
            break
        points.append(v)
        k += 1
    return points


def snap_to_grid(value: Number, alpha: Number) -> Number:
    """Nearest point of the alpha-grid (including the exact endpoints 0 and 1).

    Ties break toward the smaller candidate so snapping is deterministic.
    """
    candidates = [0, 1] + grid_points(alpha)
    best = min(candidates, key=lambda g: (abs(value - g), g))
    return best


@dataclass(frozen=True)
class Predictor:
    """A total assignment of scores in [0, 1] to the cells of a population.

    ``grid``, when set, restricts the support to the alpha-discretization
    {alpha/2, 3*alpha/2, ...} plus the exact endpoints {0, 1}.
    """

    name: str
    scores: Mapping[str, Number]
    grid: Number | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", dict(self.scores))
        for cell_id, v in self.scores.items():
            if not 0 <= v <= 1:
                raise PopulationError(
                    f"predictor {self.name!r}: score {v} for cell {cell_id!r} outside [0, 1]"
                )
        if self.grid is not None:
            allowed = set(grid_points(self.grid)) | {0, 1}
            for cell_id, v in self.scores.items():
                if v not in allowed:
                    raise PopulationError(
                        f"predictor {self.name!r}: score {v} for cell {cell_id!r} "
                        f"is off the alpha={self.grid} grid"
                    )

    def __call__(self, cell: Cell | str) -> Number:
        key = cell.id if isinstance(cell, Cell) else cell
        return self.scores[key]

    def validate_on(self, pop: Population) -> None:
        """Require exactly one score per cell of ``pop``."""
        missing = [c.id for c in pop.cells if c.id not in self.scores]
        if missing:
            raise PopulationError(f"predictor {self.name!r}: no score for cells {missing}")

    def support(self, pop: Population, scope: Scope = ALL) -> list[Number]:
        """Distinct scores attained in ``scope``, ascending."""
        return sorted({self(c) for c in pop.scope_cells(scope)})

    def is_exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.scores.values())

    def renamed(self, name: str) -> "Predictor":
        return Predictor(name, self.scores, self.grid)


def bayes_predictor(pop: Population, name: str = "p_star") -> Predictor:
    """The maximally informative predictor: each cell scored by its own risk."""
    return Predictor(name, {c.id: c.p_star for c in pop.cells})


def constant_predictor(pop: Population, value: Number, name: str = "const") -> Predictor:
    return Predictor(name, {c.id: value for c in pop.cells})


def level_sets(pop: Population, z: Predictor, scope: Scope = ALL) -> dict[Number, tuple[Cell, ...]]:
    """Cells of ``scope`` grouped by exact score value, keyed in ascending order.

    Fraction and float score values compare (and hash) by numeric equality, so
    e.g. ``Fraction(1, 2)`` and ``0.5`` land in the same level set.
    """
    groups: dict[Number, list[Cell]] = {}
    for cell in pop.scope_cells(scope):
        groups.setdefault(z(cell), []).append(cell)
    return {v: tuple(groups[v]) for v in sorted(groups)}


@dataclass(frozen=True)
class ScoreDistribution:
    """Probability masses of the distinct scores a predictor attains in a scope."""

    entries: dict[Number, Number]
    predictor: str
    scope: str

    def mass(self, value: Number) -> Number:
        return self.entries.get(value, 0)

    def support(self) -> list[Number]:
        return sorted(self.entries)


def score_distribution(pop: Population, z: Predictor, scope: Scope = ALL) -> ScoreDistribution:
    """Distribution of z over ``scope``, normalized by the scope's mass."""
    scope = normalize_scope(scope)
    total = pop.scope_mass(scope)
    entries = {
        v: sum(c.mass for c in cells) / total for v, cells in level_sets(pop, z, scope).items()
    }
    return ScoreDistribution(entries, z.name, scope_name(scope))


def base_rate(pop: Population, scope: Scope = ALL) -> Number:
    """Mass-weighted mean true risk over ``scope``."""
    cells = pop.scope_cells(scope)
    total = sum(c.mass for c in cells)
    return sum(c.mass * c.p_star for c in cells) / total


def mean_p_star(cells: Iterable[Cell]) -> Number:
    """Mass-weighted mean risk of an explicit cell collection (must be nonempty)."""
    cells = list(cells)
    total = sum(c.mass for c in cells)
    if total == 0 or not cells:
        raise EmptyScopeError("mean over empty cell collection")
    return sum(c.mass * c.p_star for c in cells) / total


# ---------------------------------------------------------------------------
# Population file format
# ---------------------------------------------------------------------------
#
# UTF-8 JSON:
#   {"cells": [{"id": str, "mass": num|"p/q", "group": "A"|"B",
#               "p_star": num|"p/q"}, ...],
#    "predictors": {name: {cell_id: score, ...}, ...},
#    "grid_alpha": num (optional)}
#
# Rational values round-trip as "p/q" strings (or bare ints); floats are
# written with 17 significant digits so loading the serialized form is
# bit-exact.


def parse_number(raw: object, where: str) -> Number:
    if isinstance(raw, bool):
        raise PopulationError(f"{where}: expected a number, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise PopulationError(f"{where}: cannot parse fraction {raw!r}") from None
    raise PopulationError(f"{where}: expected a number or 'p/q' string, got {type(raw).__name__}")


def format_number(value: Number) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return json.dumps(f"{value.numerator}/{value.denominator}")
    return format(value, ".17g")


def load_population(source: str | bytes) -> tuple[Population, dict[str, Predictor]]:
    """Parse a population file, validating every type invariant.

    Returns the population together with all predictors declared in the file,
    each already validated to be total on the population.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise PopulationError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise PopulationError("top-level value must be a JSON object")
    raw_cells = doc.get("cells")
    if not isinstance(raw_cells, list) or not raw_cells:
        raise PopulationError("field 'cells' must be a nonempty list")
    cells = []
    for i, raw in enumerate(raw_cells):
        where = f"cells[{i}]"
        if not isinstance(raw, dict):
            raise PopulationError(f"{where}: expected an object")
        for key in ("id", "mass", "group", "p_star"):
            if key not in raw:
                raise PopulationError(f"{where}: missing field {key!r}")
        cells.append(
            Cell(
                id=str(raw["id"]),
                mass=parse_number(raw["mass"], f"{where}.mass"),
                group=as_group(raw["group"]),
                p_star=parse_number(raw["p_star"], f"{where}.p_star"),
            )
        )
    pop = Population(cells)

    grid_alpha = None
    if doc.get("grid_alpha") is not None:
        grid_alpha = parse_number(doc["grid_alpha"], "grid_alpha")

    predictors: dict[str, Predictor] = {}
    raw_predictors = doc.get("predictors", {})
    if not isinstance(raw_predictors, dict):
        raise PopulationError("field 'predictors' must be an object")
    for name, table in raw_predictors.items():
        if not isinstance(table, dict):
            raise PopulationError(f"predictors[{name!r}] must be an object")
        scores = {
            str(cid): parse_number(v, f"predictors[{name!r}][{cid!r}]")
            for cid, v in table.items()
        }
        z = Predictor(name, scores, grid=grid_alpha)
        z.validate_on(pop)
        extras = [cid for cid in scores if all(c.id != cid for c in pop.cells)]
        if extras:
            raise PopulationError(f"predictor {name!r}: scores for unknown cells {extras}")
        predictors[name] = z
    return pop, predictors


def dump_population(
    pop: Population,
    predictors: Mapping[str, Predictor] | Iterable[Predictor] = (),
    grid_alpha: Number | None = None,
) -> str:
    """Serialize to the population file format (deterministic field order)."""
    if isinstance(predictors, Mapping):
        predictor_list = list(predictors.values())
    else:
        predictor_list = list(predictors)

    lines = ['{"cells":[']
    cell_rows = []
    for c in pop.cells:
        cell_rows.append(
            '{"id":%s,"mass":%s,"group":%s,"p_star":%s}'
            % (json.dumps(c.id), format_number(c.mass), json.dumps(c.group.value), format_number(c.p_star))
        )
    lines.append(",".join(cell_rows))
    lines.append('],"predictors":{')
    pred_rows = []
    for z in predictor_list:
        entries = ",".join(
            "%s:%s" % (json.dumps(cid), format_number(z.scores[cid]))
            for cid in (c.id for c in pop.cells)
        )
        pred_rows.append("%s:{%s}" % (json.dumps(z.name), entries))
    lines.append(",".join(pred_rows))
    lines.append("}")
    if grid_alpha is not None:
        lines.append(',"grid_alpha":%s' % format_number(grid_alpha))
    lines.append("}")
    return "".join(lines)


def as_float_cell(cell: Cell) -> Cell:
    return Cell(cell.id, float(cell.mass), cell.group, float(cell.p_star))


def as_float_population(pop: Population) -> Population:
    """Binary floating-point copy of a population (for float-mode comparisons)."""
    return Population(as_float_cell(c) for c in pop.cells)


def as_float_predictor(z: Predictor) -> Predictor:
    return Predictor(z.name, {k: float(v) for k, v in z.scores.items()},
                     None if z.grid is None else float(z.grid))
