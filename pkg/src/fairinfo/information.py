"""Calibration auditing and information measures for calibrated predictors.

The variance-based information content of a calibrated predictor z on a scope
S is ``1 - 4 * E[z(1-z)]``; its loss against a reference refinement is four
times the expected squared gap, and the two are linked by the identity
``loss = content(reference) - content(z)``.  The entropic variants replace
Bernoulli variance with binary entropy (base-2 logs, so both measures live in
[0, 1]) and squared error with binary KL divergence.

Every quantity here is only meaningful for calibrated inputs, so the
operations refuse miscalibrated predictors instead of silently computing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .population import (
    ALL,
    Number,
    Population,
    Predictor,
    Scope,
    level_sets,
    mean_p_star,
    normalize_scope,
    scope_name,
)

#: Default tolerance at which exact-mode populations must pass calibration.
DEFAULT_CAL_TOL = 1e-9


class CalibrationError(ValueError):
    """An information quantity was requested for a miscalibrated predictor."""


class DivergenceError(ValueError):
    """Binary KL divergence is infinite for some cell."""


@dataclass(frozen=True)
class CalibrationLevel:
    value: Number
    mass: Number
    mean_p_star: Number
    deviation: Number


@dataclass(frozen=True)
class CalibrationReport:
    """Per-level calibration deviations of a predictor on one scope."""

    predictor: str
    scope: str
    tolerance: float
    per_level: tuple[CalibrationLevel, ...]
    max_deviation: Number = field(init=False)
    is_calibrated: bool = field(init=False)

    def __post_init__(self) -> None:
        worst = max((lvl.deviation for lvl in self.per_level), default=0)
        object.__setattr__(self, "max_deviation", worst)
        object.__setattr__(self, "is_calibrated", worst <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "predictor": self.predictor,
            "scope": self.scope,
            "tolerance": self.tolerance,
            "per_level": [
                {
                    "value": float(l.value),
                    "mass": float(l.mass),
                    "mean_p_star": float(l.mean_p_star),
                    "deviation": float(l.deviation),
                }
                for l in self.per_level
            ],
            "max_deviation": float(self.max_deviation),
            "is_calibrated": self.is_calibrated,
        }


def check_calibration(
    pop: Population, z: Predictor, scope: Scope = ALL, tolerance: float = DEFAULT_CAL_TOL
) -> CalibrationReport:
    """Audit z against the level-set means of p_star within ``scope``."""
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    scope = normalize_scope(scope)
    total = pop.scope_mass(scope)
    levels = []
    for v, cells in level_sets(pop, z, scope).items():
        mean = mean_p_star(cells)
        mass = sum(c.mass for c in cells) / total
        levels.append(CalibrationLevel(v, mass, mean, abs(mean - v)))
    return CalibrationReport(z.name, scope_name(scope), tolerance, tuple(levels))


def require_calibrated(
    pop: Population, z: Predictor, scope: Scope, tolerance: float = DEFAULT_CAL_TOL
) -> None:
    report = check_calibration(pop, z, scope, tolerance)
    if not report.is_calibrated:
        raise CalibrationError(
            f"predictor {z.name!r} is not calibrated on scope {report.scope} "
            f"(max deviation {float(report.max_deviation):.3e} > tolerance {tolerance:.1e})"
        )


def calibrate(pop: Population, raw: Predictor, scopes: Scope | tuple[Scope, ...] = ALL) -> Predictor:
    """Canonical recalibration: score every level set by its p_star mean.

    Level sets are taken within each scope separately, so the returned
    predictor is calibrated on each scope and its partition refines the raw
    partition intersected with the scopes.  Idempotent.
    """
    scope_list = scopes if isinstance(scopes, tuple) else (scopes,)
    scores: dict[str, Number] = {}
    for scope in scope_list:
        for _, cells in level_sets(pop, raw, scope).items():
            mean = mean_p_star(cells)
            for c in cells:
                scores[c.id] = mean
    missing = [c.id for c in pop.cells if c.id not in scores]
    if missing:
        raise ValueError(f"scopes {scope_list} do not cover cells {missing}")
    return Predictor(f"cal({raw.name})", scores)


def information_content(
    pop: Population, z: Predictor, scope: Scope = ALL, tolerance: float = DEFAULT_CAL_TOL
) -> Number:
    """1 - 4 E[z(1-z)] over ``scope``; 0 for a constant 1/2, 1 for a perfect z."""
    require_calibrated(pop, z, scope, tolerance)
    cells = pop.scope_cells(scope)
    total = sum(c.mass for c in cells)
    second = sum(c.mass * z(c) * (1 - z(c)) for c in cells) / total
    return 1 - 4 * second


def information_loss(
    pop: Population,
    reference: Predictor,
    z: Predictor,
    scope: Scope = ALL,
    tolerance: float = DEFAULT_CAL_TOL,
) -> Number:
    """4 E[(reference - z)^2] over ``scope``.

    Equals ``information_content(reference) - information_content(z)`` when
    the reference refines z on the scope; for other references the value is
    still the scaled squared error but the difference identity need not hold.
    """
    require_calibrated(pop, z, scope, tolerance)
    require_calibrated(pop, reference, scope, tolerance)
    cells = pop.scope_cells(scope)
    total = sum(c.mass for c in cells)
    gap = sum(c.mass * (reference(c) - z(c)) ** 2 for c in cells) / total
    return 4 * gap


def binary_entropy(p: Number) -> float:
    """H2(p) in bits with the limit convention 0 log 0 = 0."""
    p = float(p)
    if p <= 0 or p >= 1:
        if p in (0.0, 1.0):
            return 0.0
        raise ValueError(f"entropy argument {p} outside [0, 1]")
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def binary_kl(p: Number, q: Number) -> float:
    """KL divergence in bits between Bernoulli(p) and Bernoulli(q)."""
    p, q = float(p), float(q)
    if q in (0.0, 1.0):
        if p == q:
            return 0.0
        raise DivergenceError(f"D_KL({p}; {q}) is infinite")
    out = 0.0
    if p > 0:
        out += p * math.log2(p / q)
    if p < 1:
        out += (1 - p) * math.log2((1 - p) / (1 - q))
    return out


def entropic_information_content(
    pop: Population, z: Predictor, scope: Scope = ALL, tolerance: float = DEFAULT_CAL_TOL
) -> float:
    """1 - E[H2(z)] in bits; never exceeds the variance-based content."""
    require_calibrated(pop, z, scope, tolerance)
    cells = pop.scope_cells(scope)
    total = float(sum(c.mass for c in cells))
    return 1 - sum(float(c.mass) * binary_entropy(z(c)) for c in cells) / total


def entropic_information_loss(
    pop: Population,
    reference: Predictor,
    z: Predictor,
    scope: Scope = ALL,
    tolerance: float = DEFAULT_CAL_TOL,
) -> float:
    """Expected binary KL divergence E[D_KL(reference(x); z(x))] over ``scope``.

    Raises DivergenceError, naming the offending cell, if z scores a cell 0 or
    1 while the reference disagrees there.
    """
    require_calibrated(pop, z, scope, tolerance)
    require_calibrated(pop, reference, scope, tolerance)
    cells = pop.scope_cells(scope)
    total = float(sum(c.mass for c in cells))
    acc = 0.0
    for c in cells:
        try:
            acc += float(c.mass) * binary_kl(reference(c), z(c))
        except DivergenceError:
            raise DivergenceError(
                f"infinite divergence at cell {c.id!r}: z={float(z(c))}, "
                f"reference={float(reference(c))}"
            ) from None
    return acc / total


def expected_log_likelihood(
    pop: Population, z: Predictor, scope: Scope = ALL, tolerance: float = DEFAULT_CAL_TOL
) -> float:
    """Expected normalized log-likelihood of z on fresh outcomes: I_ent - 1."""
    return entropic_information_content(pop, z, scope, tolerance) - 1


def empirical_log_likelihood(
    pop: Population,
    z: Predictor,
    scope: Scope = ALL,
    draws: int = 10**6,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo normalized log-likelihood from simulated (x, y) pairs.

    Returns ``(mean, standard_error)``.  Draws x by cell mass within the scope
    and y ~ Bernoulli(p_star(x)); cells where z is 0 or 1 contribute only when
    the outcome matches, which calibration guarantees almost surely.
    """
    cells = pop.scope_cells(scope)
    rng = np.random.default_rng(seed)
    masses = np.array([float(c.mass) for c in cells])
    masses /= masses.sum()
    p = np.array([float(c.p_star) for c in cells])
    q = np.array([float(z(c)) for c in cells])

    counts = rng.multinomial(draws, masses)
    positives = rng.binomial(counts, p)
    negatives = counts - positives

    with np.errstate(divide="ignore"):
        log_q = np.where(q > 0, np.log2(np.maximum(q, 1e-300)), -np.inf)
        log_1q = np.where(q < 1, np.log2(np.maximum(1 - q, 1e-300)), -np.inf)
    pos_mask, neg_mask = positives > 0, negatives > 0
    if (pos_mask & np.isinf(log_q)).any() or (neg_mask & np.isinf(log_1q)).any():
        raise DivergenceError("observed an outcome with zero predicted probability")

    pos_term = np.zeros_like(log_q)
    neg_term = np.zeros_like(log_1q)
    pos_term[pos_mask] = positives[pos_mask] * log_q[pos_mask]
    neg_term[neg_mask] = negatives[neg_mask] * log_1q[neg_mask]
    mean = float(pos_term.sum() + neg_term.sum()) / draws
    # per-draw second moment from the same tallies
    sq = (pos_term * np.where(pos_mask, log_q, 0.0)).sum()
    sq += (neg_term * np.where(neg_mask, log_1q, 0.0)).sum()
    var = max(float(sq) / draws - mean**2, 0.0)
    stderr = math.sqrt(var / draws)
    return mean, stderr


@dataclass(frozen=True)
class InformationReport:
    """Information content of a predictor on one scope, with optional loss."""

    predictor: str
    scope: str
    content: Number
    entropic_content: float
    loss_vs: Optional[tuple[str, Number]] = None
    entropic_loss_vs: Optional[tuple[str, float]] = None
    identity_applicable: Optional[bool] = None

    def to_dict(self) -> dict:
        out = {
            "predictor": self.predictor,
            "scope": self.scope,
            "content": float(self.content),
            "entropic_content": float(self.entropic_content),
        }
        if self.loss_vs is not None:
            out["loss_vs"] = {"reference": self.loss_vs[0], "loss": float(self.loss_vs[1])}
            out["entropic_loss_vs"] = {
                "reference": self.entropic_loss_vs[0],
                "loss": float(self.entropic_loss_vs[1]),
            }
            out["identity_applicable"] = self.identity_applicable
        return out


def information_report(
    pop: Population,
    z: Predictor,
    scope: Scope = ALL,
    reference: Predictor | None = None,
    tolerance: float = DEFAULT_CAL_TOL,
) -> InformationReport:
    """Bundle content (both variants) and, when a reference is given, losses.

    The difference identity ``loss = content(ref) - content(z)`` only holds
    when the reference refines z on the scope, so the report carries an
    ``identity_applicable`` flag computed from that check.
    """
    content = information_content(pop, z, scope, tolerance)
    ent = entropic_information_content(pop, z, scope, tolerance)
    if reference is None:
        return InformationReport(z.name, scope_name(normalize_scope(scope)), content, ent)

    from .refinement import is_refinement  # local import to avoid a cycle

    loss = information_loss(pop, reference, z, scope, tolerance)
    try:
        ent_loss = entropic_information_loss(pop, reference, z, scope, tolerance)
    except DivergenceError:
        # legitimate for non-refinement references; the flag below records it
        ent_loss = math.inf
    applicable = is_refinement(pop, z, reference, scope, tolerance=tolerance).is_refinement
    return InformationReport(
        z.name,
        scope_name(normalize_scope(scope)),
        content,
        ent,
        (reference.name, loss),
        (reference.name, ent_loss),
        applicable,
    )
