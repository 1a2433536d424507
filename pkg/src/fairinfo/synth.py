"""Deterministic counterexample instances and seeded random generators.

The three fixed instances reproduce the phenomena that motivate the library:
two calibrated predictors whose information contents and utilities rank in
opposite directions; a perfectly calibrated score set that starves one group
of all within-group information; and a predictor pair that refines overall
while strictly losing information on one group.  All three are frozen exact
rational constants.

The random generators produce populations, calibrated predictors, and
refinements that satisfy their defining invariants by construction and are
byte-reproducible from their seeds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .population import (
    Cell,
    Group,
    Number,
    Population,
    Predictor,
    Scope,
    level_sets,
    mean_p_star,
)

F = Fraction


def figure1_instance() -> tuple[Population, Predictor, Predictor]:
    """Single-group population carrying two calibrated predictors z and z_prime.

    Both are calibrated to a deterministic truth (p_star in {0, 1}) with
    overall base rate 1/2.  z has support {1/3, 3/4} with masses {3/5, 2/5};
    z_prime has support {0, 2/3} with masses {1/4, 3/4}.  z_prime carries more
    information (1/3 vs 1/6) yet yields less utility for any lender threshold
    strictly between 2/3 and 3/4, where z still clears the bar on its top
    score and z_prime clears nothing.
    """
    cells = [
        Cell("x1", F(1, 5), Group.A, F(0)),
        Cell("x2", F(1, 20), Group.A, F(0)),
        Cell("x3", F(1, 5), Group.A, F(1)),
        Cell("x4", F(3, 20), Group.A, F(0)),
        Cell("x5", F(3, 10), Group.A, F(1)),
        Cell("x6", F(1, 10), Group.A, F(0)),
    ]
    pop = Population(cells)
    z = Predictor(
        "z",
        {
            "x1": F(1, 3), "x2": F(1, 3), "x3": F(1, 3), "x4": F(1, 3),
            "x5": F(3, 4), "x6": F(3, 4),
        },
    )
    z_prime = Predictor(
        "z_prime",
        {
            "x1": F(0), "x2": F(0),
            "x3": F(2, 3), "x4": F(2, 3), "x5": F(2, 3), "x6": F(2, 3),
        },
    )
    return pop, z, z_prime


def caution_calibration_instance() -> tuple[Population, Predictor, Fraction]:
    """Two groups with identical 50:50 deterministic risk, unequal information.

    Group A (the majority) gets perfect scores in {0, 1}; group B is scored a
    flat 1/2.  The returned threshold 7/10 then selects every qualified member
    of A and nobody from B, although half of B is qualified.
    """
    cells = [
        Cell("a1", F(3, 10), Group.A, F(1)),
        Cell("a0", F(3, 10), Group.A, F(0)),
        Cell("b1", F(1, 5), Group.B, F(1)),
        Cell("b0", F(1, 5), Group.B, F(0)),
    ]
    pop = Population(cells)
    z = Predictor("z", {"a1": F(1), "a0": F(0), "b1": F(1, 2), "b0": F(1, 2)})
    return pop, z, F(7, 10)


def groupwise_loss_instance() -> tuple[Population, Predictor, Predictor]:
    """Overall refinement that destroys one group's information.

    Constants were derived by solving the refinement/calibration equalities
    over the cell masses and then frozen.  Group A splits 50:50 across risks
    {1/4, 3/4}; z resolves it exactly while z_prime collapses all of A to its
    base rate 1/2.  Group B's cells are pooled by z_prime across z's level
    sets so that every level set of z keeps its mean: z_prime refines z on the
    whole population, passes per-group calibration everywhere, yet fails the
    refinement check on A, where its information drops from 1/4 to 0.
    """
    cells = [
        Cell("an", F(1, 18), Group.A, F(1, 4)),
        Cell("ap", F(1, 18), Group.A, F(3, 4)),
        Cell("bP", F(1, 18), Group.B, F(1)),
        Cell("bQ", F(7, 18), Group.B, F(1, 7)),
        Cell("bR", F(1, 18), Group.B, F(0)),
        Cell("bT", F(7, 18), Group.B, F(6, 7)),
    ]
    pop = Population(cells)
    z = Predictor(
        "z",
        {
            "an": F(1, 4), "bP": F(1, 4), "bQ": F(1, 4),
            "ap": F(3, 4), "bR": F(3, 4), "bT": F(3, 4),
        },
    )
    z_prime = Predictor(
        "z_prime",
        {
            "an": F(1, 2), "ap": F(1, 2),
            "bP": F(7, 8), "bT": F(7, 8),
            "bQ": F(1, 8), "bR": F(1, 8),
        },
    )
    return pop, z, z_prime


def paper_instances() -> dict[str, tuple[Population, dict[str, Predictor]]]:
    """All fixed instances keyed by demo name, in file-format-ready shape."""
    fig_pop, fig_z, fig_zp = figure1_instance()
    caution_pop, caution_z, _ = caution_calibration_instance()
    gw_pop, gw_z, gw_zp = groupwise_loss_instance()
    return {
        "figure1": (fig_pop, {"z": fig_z, "z_prime": fig_zp}),
        "caution": (caution_pop, {"z": caution_z}),
        "groupwise": (gw_pop, {"z": gw_z, "z_prime": gw_zp}),
    }


# ---------------------------------------------------------------------------
# Seeded random generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for the random population generator.

    n_cells:      cells per group
    grid_alpha:   when set, risks are drawn from the alpha-grid (plus {0, 1})
    p_spread:     width of the continuous risk component, centered at 1/2
    group_split:  mass of group A (group B gets the rest)
    exact:        draw masses and risks as small Fractions (rational mode)
    """

    seed: int
    n_cells: int = 6
    grid_alpha: Number | None = None
    p_spread: float = 1.0
    group_split: Number = F(1, 2)
    exact: bool = True

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise ValueError("n_cells must be at least 1")
        if not 0 < self.group_split < 1:
            raise ValueError("group_split must lie strictly inside (0, 1)")
        if not 0 <= self.p_spread <= 1:
            raise ValueError("p_spread must lie in [0, 1]")


ATOM_WEIGHT = 0.15  # chance of pinning a risk to exactly 0 or 1


def _draw_p_star(rng: np.random.Generator, params: GeneratorParams, force_interior: bool) -> Number:
    if not force_interior:
        u = rng.random()
        if u < ATOM_WEIGHT:
            return F(0) if params.exact else 0.0
        if u < 2 * ATOM_WEIGHT:
            return F(1) if params.exact else 1.0
    lo = 0.5 - params.p_spread / 2
    width = params.p_spread
    if force_interior:
        lo, width = max(lo, 1 / 16), min(width, 7 / 8)
    if params.grid_alpha is not None:
        # draw from the alpha-grid points inside the spread window
        alpha = float(params.grid_alpha)
        ks = [
            k
            for k in range(int(1 / alpha) + 1)
            if lo <= alpha / 2 + k * alpha <= lo + width
        ]
        k = ks[rng.integers(len(ks))] if ks else 0
        if params.exact:
            a = F(params.grid_alpha)
            return a / 2 + k * a
        return alpha / 2 + k * alpha
    if params.exact:
        denom = 64
        lo_n = int(np.ceil(lo * denom))
        hi_n = max(lo_n + 1, int(np.floor((lo + width) * denom)))
        return F(int(rng.integers(lo_n, hi_n + 1)), denom)
    return lo + width * rng.random()


def random_population(params: GeneratorParams) -> Population:
    """Two-group population; every group keeps a strictly interior base rate."""
    rng = np.random.default_rng(params.seed)
    split = {Group.A: params.group_split, Group.B: 1 - params.group_split}
    cells = []
    for group in (Group.A, Group.B):
        weights = [int(w) for w in rng.integers(1, 10, size=params.n_cells)]
        total = sum(weights)
        for i, w in enumerate(weights):
            if params.exact:
                mass = F(split[group]) * F(w, total)
            else:
                mass = float(split[group]) * w / total
            p = _draw_p_star(rng, params, force_interior=(i == 0))
            cells.append(Cell(f"{group.value.lower()}{i}", mass, group, p))
    return Population(cells)


def _random_partition(rng: np.random.Generator, items: list, parts: int) -> list[list]:
    """Split items into exactly ``parts`` nonempty chunks, order-randomized."""
    order = [items[i] for i in rng.permutation(len(items))]
    if parts == 1:
        return [order]
    cuts = sorted(rng.choice(np.arange(1, len(order)), size=parts - 1, replace=False).tolist())
    return [order[a:b] for a, b in zip([0] + cuts, cuts + [len(order)])]


def random_calibrated_predictor(
    pop: Population,
    coarseness: int,
    seed: int,
    scopes: Scope | tuple[Scope, ...] = (Group.A, Group.B),
    name: str | None = None,
    stratify_extremes: bool = False,
) -> Predictor:
    """Random predictor calibrated by construction on each scope.

    Each scope's cells are randomly partitioned into at most ``coarseness``
    parts and every part is scored by its true-risk mean.  With
    ``stratify_extremes``, cells at risk exactly 0 or 1 are partitioned apart
    from the interior cells, keeping the support inside {0, 1} plus the convex
    hull of the interior risks.
    """
    if coarseness < 1:
        raise ValueError("coarseness must be at least 1")
    rng = np.random.default_rng(seed)
    scope_list = scopes if isinstance(scopes, tuple) else (scopes,)
    scores: dict[str, Number] = {}
    for scope in scope_list:
        cells = list(pop.scope_cells(scope))
        if coarseness > len(cells):
            warnings.warn(
                f"coarseness {coarseness} exceeds {len(cells)} cells in scope; clamping",
                stacklevel=2,
            )
        strata: list[list[Cell]]
        if stratify_extremes:
            strata = [
                [c for c in cells if c.p_star == 0],
                [c for c in cells if 0 < c.p_star < 1],
                [c for c in cells if c.p_star == 1],
            ]
            strata = [s for s in strata if s]
        else:
            strata = [cells]
        for stratum in strata:
            parts = min(coarseness, len(stratum))
            parts = int(rng.integers(1, parts + 1)) if parts > 1 else 1
            for chunk in _random_partition(rng, stratum, parts):
                value = mean_p_star(chunk)
                for c in chunk:
                    scores[c.id] = value
    for c in pop.cells:
        scores.setdefault(c.id, c.p_star)
    return Predictor(name or f"zrand{seed}", scores)


def random_refinement(
    pop: Population,
    z: Predictor,
    seed: int,
    scopes: Scope | tuple[Scope, ...] = (Group.A, Group.B),
    split_chance: float = 0.85,
    name: str | None = None,
) -> Predictor:
    """Refine z on each scope by randomly splitting level sets.

    Sub-level sets are scored by their own true-risk means, so the result is
    calibrated on each scope and keeps every original level-set mean; its
    information never drops below z's and grows exactly when a split separates
    unequal risks.
    """
    rng = np.random.default_rng(seed)
    scope_list = scopes if isinstance(scopes, tuple) else (scopes,)
    scores: dict[str, Number] = {}
    for scope in scope_list:
        for _, cells in level_sets(pop, z, scope).items():
            members = list(cells)
            if len(members) >= 2 and rng.random() < split_chance:
                parts = _random_partition(rng, members, 2)
            else:
                parts = [members]
            for chunk in parts:
                value = mean_p_star(chunk)
                for c in chunk:
                    scores[c.id] = value
    for c in pop.cells:
        scores.setdefault(c.id, z(c))
    return Predictor(name or f"{z.name}+r{seed}", scores)
