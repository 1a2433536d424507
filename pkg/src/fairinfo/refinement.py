"""Refinement checking, refinement distance, and the merge algorithm.

A calibrated predictor z' refines z on a scope when every level set of z keeps
its mean under z'; the refinement distance quantifies the mass-weighted
violation of that condition.  Merging two calibrated predictors crosses their
level-set partitions and scores each crossed cell by its true-risk mean,
producing a common refinement whose information gain is lower-bounded by the
squared refinement distances.

Exact mode answers the required statistical queries from p_star directly.
Sample mode estimates them from (cell id, outcome) records, with an explicit
sample budget sufficient for every crossed-cell estimate to land within
alpha/2 of the truth with the requested confidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .information import DEFAULT_CAL_TOL, information_content, require_calibrated
from .population import (
    ALL,
    Cell,
    Number,
    Population,
    Predictor,
    Scope,
    level_sets,
    mean_p_star,
    normalize_scope,
    scope_name,
    snap_to_grid,
)

Scopes = tuple[Scope, ...]


def _scope_tuple(scopes: Scope | Scopes) -> Scopes:
    if isinstance(scopes, tuple):
        return scopes
    return (scopes,)


@dataclass(frozen=True)
class RefinementLevel:
    value: Number
    conditional_mean: Number
    deviation: Number


@dataclass(frozen=True)
class RefinementCheck:
    """Level-by-level audit of whether z_prime keeps z's conditional means."""

    base: str
    candidate: str
    scope: str
    tolerance: float
    per_level: tuple[RefinementLevel, ...]
    max_deviation: Number = field(init=False)
    is_refinement: bool = field(init=False)

    def __post_init__(self) -> None:
        worst = max((lvl.deviation for lvl in self.per_level), default=0)
        object.__setattr__(self, "max_deviation", worst)
        object.__setattr__(self, "is_refinement", worst <= self.tolerance)


def is_refinement(
    pop: Population,
    z: Predictor,
    z_prime: Predictor,
    scope: Scope = ALL,
    tolerance: float = 1e-10,
    cal_tolerance: float = DEFAULT_CAL_TOL,
) -> RefinementCheck:
    """Check that E[z_prime | z = v] = v on every level set of z within scope."""
    require_calibrated(pop, z, scope, cal_tolerance)
    require_calibrated(pop, z_prime, scope, cal_tolerance)
    levels = []
    for v, cells in level_sets(pop, z, scope).items():
        total = sum(c.mass for c in cells)
        mean = sum(c.mass * z_prime(c) for c in cells) / total
        levels.append(RefinementLevel(v, mean, abs(mean - v)))
    return RefinementCheck(
        z.name, z_prime.name, scope_name(normalize_scope(scope)), tolerance, tuple(levels)
    )


def refinement_distance(
    pop: Population,
    z: Predictor,
    q: Predictor,
    scope: Scope = ALL,
    cal_tolerance: float = DEFAULT_CAL_TOL,
) -> Number:
    """Mass-weighted mean violation of q's refinement condition over z's levels.

    Zero exactly when q refines z on the scope; asymmetric in its arguments.
    """
    require_calibrated(pop, z, scope, cal_tolerance)
    require_calibrated(pop, q, scope, cal_tolerance)
    scope_total = pop.scope_mass(scope)
    acc = 0
    for v, cells in level_sets(pop, z, scope).items():
        total = sum(c.mass for c in cells)
        mean = sum(c.mass * q(c) for c in cells) / total
        acc += (total / scope_total) * abs(mean - v)
    return acc


@dataclass(frozen=True)
class ScopeMergeStats:
    """Merge guarantees evaluated on one scope."""

    scope: str
    info_z: Number
    info_q: Number
    info_merged: Number
    distance_qz: Number  # D_R(q; z): z's means over q's level sets
    distance_zq: Number  # D_R(z; q): q's means over z's level sets
    guaranteed_gain: Number = field(init=False)
    eta: Number = field(init=False)

    def __post_init__(self) -> None:
        gain = max(
            self.info_z + 4 * self.distance_qz**2,
            self.info_q + 4 * self.distance_zq**2,
        )
        object.__setattr__(self, "guaranteed_gain", gain)
        object.__setattr__(self, "eta", min(self.distance_qz, self.distance_zq))


@dataclass(frozen=True)
class MergeReport:
    """Outcome of merging q into z (or estimating that merge from samples)."""

    result: Predictor
    per_scope: tuple[ScopeMergeStats, ...]
    estimated: bool = False
    cell_estimates: tuple["CrossedCellEstimate", ...] = ()

    def stats(self, scope: Scope) -> ScopeMergeStats:
        name = scope_name(normalize_scope(scope))
        for s in self.per_scope:
            if s.scope == name:
                return s
        raise KeyError(f"merge report has no scope {name!r}")

    def to_dict(self) -> dict:
        return {
            "result": self.result.name,
            "estimated": self.estimated,
            "per_scope": [
                {
                    "scope": s.scope,
                    "info_before": {"z": float(s.info_z), "q": float(s.info_q)},
                    "info_after": float(s.info_merged),
                    "distances": {
                        "qz": float(s.distance_qz),
                        "zq": float(s.distance_zq),
                    },
                    "guaranteed_gain": float(s.guaranteed_gain),
                    "eta": float(s.eta),
                }
                for s in self.per_scope
            ],
        }


def _crossed_cells(
    cells: Iterable[Cell], z: Predictor, q: Predictor
) -> dict[tuple[Number, Number], list[Cell]]:
    out: dict[tuple[Number, Number], list[Cell]] = {}
    for c in cells:
        out.setdefault((z(c), q(c)), []).append(c)
    return {k: out[k] for k in sorted(out)}


def merge_oracle(
    pop: Population,
    z: Predictor,
    q: Predictor,
    scopes: Scope | Scopes = ALL,
    cal_tolerance: float = DEFAULT_CAL_TOL,
    name: str | None = None,
) -> MergeReport:
    """Merge two calibrated predictors by scoring every crossed level set
    with its p_star mean, separately within each scope.

    The result is calibrated on each scope, refines both inputs there, and
    gains information at least 4 * D_R^2 over each input (empty crossed cells
    carry no mass and are skipped).
    """
    scopes = _scope_tuple(scopes)
    merged_scores: dict[str, Number] = {}
    for scope in scopes:
        require_calibrated(pop, z, scope, cal_tolerance)
        require_calibrated(pop, q, scope, cal_tolerance)
        for _, cells in _crossed_cells(pop.scope_cells(scope), z, q).items():
            value = mean_p_star(cells)
            for c in cells:
                merged_scores[c.id] = value
    missing = [c.id for c in pop.cells if c.id not in merged_scores]
    if missing:
        raise ValueError(f"scopes {scopes} do not cover cells {missing}")
    merged = Predictor(name or f"merge({z.name},{q.name})", merged_scores)

    per_scope = tuple(
        ScopeMergeStats(
            scope=scope_name(normalize_scope(scope)),
            info_z=information_content(pop, z, scope, cal_tolerance),
            info_q=information_content(pop, q, scope, cal_tolerance),
            info_merged=information_content(pop, merged, scope, cal_tolerance),
            distance_qz=refinement_distance(pop, q, z, scope, cal_tolerance),
            distance_zq=refinement_distance(pop, z, q, scope, cal_tolerance),
        )
        for scope in scopes
    )
    return MergeReport(merged, per_scope)


# ---------------------------------------------------------------------------
# Sample mode
# ---------------------------------------------------------------------------


class UndersampledError(RuntimeError):
    """A crossed cell received no samples; raise m or the density floor."""


@dataclass(frozen=True)
class SampleBudget:
    """Sample requirements for answering merge queries to alpha/2 accuracy.

    alpha: discretization precision of the estimated predictor
    gamma: minimum density of any nonempty crossed cell
    delta: allowed failure probability over the sample draw
    m:     total samples; defaults to the explicit Hoeffding + union-bound
           count t * log(2 t / delta) / gamma with t = 2 ln(4 / (delta
           alpha^2)) / alpha^2 per cell
    """

    alpha: float
    gamma: float
    delta: float
    m: int = 0

    def __post_init__(self) -> None:
        for label, v in (("alpha", self.alpha), ("gamma", self.gamma), ("delta", self.delta)):
            if not 0 < v < 1:
                raise ValueError(f"{label} must lie in (0, 1), got {v}")
        if self.m <= 0:
            object.__setattr__(self, "m", self.required_samples())
        if self.m < 1:
            raise ValueError("sample budget must be at least 1")

    def per_cell_samples(self) -> int:
        """Hoeffding count t making one cell's mean alpha/2-accurate w.h.p."""
        return math.ceil(2 * math.log(4 / (self.delta * self.alpha**2)) / self.alpha**2)

    def required_samples(self) -> int:
        t = self.per_cell_samples()
        return math.ceil(t * math.log(2 * t / self.delta) / self.gamma)


@dataclass(frozen=True)
class CrossedCellEstimate:
    z_value: Number
    q_value: Number
    count: int
    positives: int
    mean: float
    snapped: Number


def parse_sample_stream(lines: Iterable[str]) -> dict[str, tuple[int, int]]:
    """Tally newline-delimited ``cell_id,y`` records into (count, positives)."""
    counts: dict[str, tuple[int, int]] = {}
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            cell_id, raw_y = line.rsplit(",", 1)
            y = int(raw_y)
            if y not in (0, 1):
                raise ValueError
        except ValueError:
            raise ValueError(f"sample stream line {i + 1}: expected 'cell_id,y' with y in 0/1")
        n, k = counts.get(cell_id, (0, 0))
        counts[cell_id] = (n + 1, k + y)
    return counts


def draw_sample_counts(
    pop: Population, m: int, seed: int, scope: Scope = ALL
) -> dict[str, tuple[int, int]]:
    """Simulate m iid draws (x by mass, y ~ Bernoulli(p_star)) as per-cell tallies."""
    cells = pop.scope_cells(scope)
    rng = np.random.default_rng(seed)
    masses = np.array([float(c.mass) for c in cells])
    masses /= masses.sum()
    counts = rng.multinomial(m, masses)
    positives = rng.binomial(counts, np.array([float(c.p_star) for c in cells]))
    return {
        c.id: (int(n), int(k))
        for c, n, k in zip(cells, counts, positives)
        if n > 0
    }


def draw_sample_stream(pop: Population, m: int, seed: int, scope: Scope = ALL) -> Iterator[str]:
    """The same draw as ``draw_sample_counts`` but as explicit stream records."""
    cells = pop.scope_cells(scope)
    rng = np.random.default_rng(seed)
    masses = np.array([float(c.mass) for c in cells])
    masses /= masses.sum()
    ids = [c.id for c in cells]
    p = np.array([float(c.p_star) for c in cells])
    idx = rng.choice(len(cells), size=m, p=masses)
    ys = (rng.random(m) < p[idx]).astype(int)
    for i, y in zip(idx, ys):
        yield f"{ids[i]},{y}"


def merge_from_samples(
    z: Predictor,
    q: Predictor,
    samples: Iterable[str] | Mapping[str, tuple[int, int]],
    budget: SampleBudget,
) -> MergeReport:
    """Estimate merge(z, q) from outcome samples.

    Every crossed cell's score is the empirical mean of its outcomes snapped
    to the alpha-grid.  The report's information and distance figures are
    computed against the empirical cell frequencies (the true masses are not
    observable in sample mode) and are flagged as estimates.

    Raises UndersampledError when some crossed cell of the predictors' common
    domain receives no samples at all.
    """
    counts = samples if isinstance(samples, Mapping) else parse_sample_stream(samples)
    domain = sorted(set(z.scores) & set(q.scores))
    if not domain:
        raise ValueError("predictors share no cells")
    unknown = sorted(set(counts) - set(domain))
    if unknown:
        raise ValueError(f"samples reference cells outside the predictors' domain: {unknown}")

    crossed: dict[tuple[Number, Number], list[str]] = {}
    for cell_id in domain:
        crossed.setdefault((z(cell_id), q(cell_id)), []).append(cell_id)

    estimates = []
    merged_scores: dict[str, Number] = {}
    for key in sorted(crossed):
        ids = crossed[key]
        n = sum(counts.get(cid, (0, 0))[0] for cid in ids)
        k = sum(counts.get(cid, (0, 0))[1] for cid in ids)
        if n == 0:
            raise UndersampledError(
                f"crossed cell (z={float(key[0])}, q={float(key[1])}) received no samples"
            )
        mean = k / n
        snapped = snap_to_grid(mean, budget.alpha)
        estimates.append(
            CrossedCellEstimate(key[0], key[1], n, k, mean, snapped)
        )
        for cid in ids:
            merged_scores[cid] = snapped

    merged = Predictor(f"merge({z.name},{q.name})~", merged_scores)

    total = sum(e.count for e in estimates)
    weights = {(e.z_value, e.q_value): e.count / total for e in estimates}
    rho_of = {(e.z_value, e.q_value): e.snapped for e in estimates}

    def info(value_of: Callable[[tuple[Number, Number]], float]) -> float:
        return 1 - 4 * sum(w * value_of(k) * (1 - value_of(k)) for k, w in weights.items())

    def distance(axis: int) -> float:
        # D over the level sets of the axis predictor, means of the other one
        level_mass: dict[Number, float] = {}
        level_mean: dict[Number, float] = {}
        for k, w in weights.items():
            level_mass[k[axis]] = level_mass.get(k[axis], 0.0) + w
            level_mean[k[axis]] = level_mean.get(k[axis], 0.0) + w * float(k[1 - axis])
        return sum(
            mass * abs(level_mean[v] / mass - float(v)) for v, mass in level_mass.items()
        )

    stats = ScopeMergeStats(
        scope=ALL,
        info_z=info(lambda k: float(k[0])),
        info_q=info(lambda k: float(k[1])),
        info_merged=1 - 4 * sum(w * float(rho_of[k]) * (1 - float(rho_of[k])) for k, w in weights.items()),
        distance_qz=distance(1),
        distance_zq=distance(0),
    )
    return MergeReport(merged, (stats,), estimated=True, cell_estimates=tuple(estimates))


# ---------------------------------------------------------------------------
# Feature predictors and merge accounting
# ---------------------------------------------------------------------------


def feature_predictor(
    pop: Population,
    phi: Callable[[str], bool],
    scopes: Scope | Scopes = ALL,
    name: str = "q_phi",
) -> Predictor:
    """The calibrated predictor induced by one boolean feature.

    Within each scope, cells with the same feature value share the true-risk
    mean of that class; a feature constant on a scope therefore yields that
    scope's base-rate predictor.
    """
    scores: dict[str, Number] = {}
    for scope in _scope_tuple(scopes):
        classes: dict[bool, list[Cell]] = {}
        for c in pop.scope_cells(scope):
            classes.setdefault(bool(phi(c.id)), []).append(c)
        for cells in classes.values():
            value = mean_p_star(cells)
            for c in cells:
                scores[c.id] = value
    missing = [c.id for c in pop.cells if c.id not in scores]
    if missing:
        raise ValueError(f"scopes do not cover cells {missing}")
    return Predictor(name, scores)


def feature_informativeness(pop: Population, phi: Callable[[str], bool], scope: Scope = ALL) -> Number:
    """|E[p_star | phi=1] - E[p_star | phi=0]| within scope; 0 if phi is constant."""
    classes: dict[bool, list[Cell]] = {}
    for c in pop.scope_cells(scope):
        classes.setdefault(bool(phi(c.id)), []).append(c)
    if len(classes) < 2:
        return 0
    return abs(mean_p_star(classes[True]) - mean_p_star(classes[False]))


@dataclass(frozen=True)
class EtaMergeAudit:
    eta: float
    count: int
    bound: int
    within_bound: bool
    min_gain: float
    gains_ok: bool


def eta_merge_counter(
    history: Iterable[MergeReport], eta: float, scope: Scope = ALL, slack: float = 1e-10
) -> EtaMergeAudit:
    """Count eta-merges in a history of successive merges of one predictor.

    A report counts as an eta-merge when both refinement distances on the
    scope reach eta; each such merge must have gained at least 4 eta^2
    information, and the total count can never exceed ceil(1 / (4 eta^2)) + 1.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    count = 0
    min_gain = math.inf
    gains_ok = True
    for report in history:
        s = report.stats(scope)
        if eta > 0 and s.eta >= eta:
            count += 1
            gain = float(s.info_merged - s.info_z)
            min_gain = min(min_gain, gain)
            if gain < 4 * eta**2 - slack:
                gains_ok = False
    bound = math.ceil(1 / (4 * eta**2)) + 1 if eta > 0 else 0
    within = count <= bound if eta > 0 else True
    return EtaMergeAudit(
        eta=eta,
        count=count,
        bound=bound,
        within_bound=within,
        min_gain=0.0 if math.isinf(min_gain) else min_gain,
        gains_ok=gains_ok,
    )
