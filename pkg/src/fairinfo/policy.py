"""Threshold policies, general selection rules, and their per-group statistics.

A selection rule is a table f(v, S) of selection probabilities, one entry per
(score, group) pair.  A threshold policy is the special case that selects all
scores above a per-group threshold and randomizes on the threshold atom; it is
parameterized interchangeably by (tau, tie probability) or by its selection
rate, which the curve machinery below converts between exactly.

Selecting the highest scores first makes every statistic of a threshold
policy a piecewise-linear function of the selection rate, with breakpoints at
the cumulative score masses.  ``GroupCurve`` encapsulates that function family
and its exact inversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .information import DEFAULT_CAL_TOL, require_calibrated
from .refinement import is_refinement
from .population import (
    Group,
    Number,
    Population,
    Predictor,
    as_group,
    base_rate,
    score_distribution,
)


class PolicyError(ValueError):
    """Malformed policy input (missing table entries, bad parameters)."""


@dataclass(frozen=True)
class ImpactParams:
    """Per-score payoff thresholds: utility v - tau_u, impact v - tau_l.

    With ``require_risk_aversion`` the lender threshold must sit strictly
    above the impact threshold, so scores in (tau_l, tau_u) are beneficial to
    the individual but not to the lender.
    """

    tau_u: Number
    tau_l: Number
    require_risk_aversion: bool = False

    def __post_init__(self) -> None:
        for label, v in (("tau_u", self.tau_u), ("tau_l", self.tau_l)):
            if not 0 <= v <= 1:
                raise PolicyError(f"{label} must lie in [0, 1], got {v}")
        if self.require_risk_aversion and not self.tau_u > self.tau_l:
            raise PolicyError(
                f"risk aversion requires tau_u > tau_l, got {self.tau_u} <= {self.tau_l}"
            )

    def utility(self, v: Number) -> Number:
        return v - self.tau_u

    def impact(self, v: Number) -> Number:
        return v - self.tau_l


@dataclass(frozen=True)
class ThresholdPolicy:
    """Per-group threshold with mass-proportional randomization on the atom."""

    thresholds: Mapping[Group, tuple[Number, Number]]

    def __post_init__(self) -> None:
        table = {as_group(g): (tau, p) for g, (tau, p) in dict(self.thresholds).items()}
        for g, (tau, p) in table.items():
            if not 0 <= tau <= 1:
                raise PolicyError(f"threshold for group {g.value} outside [0, 1]: {tau}")
            if not 0 <= p <= 1:
                raise PolicyError(f"tie probability for group {g.value} outside [0, 1]: {p}")
        object.__setattr__(self, "thresholds", table)

    def probability(self, v: Number, group: Group) -> Number:
        group = as_group(group)
        if group not in self.thresholds:
            raise PolicyError(f"threshold policy has no entry for group {group.value}")
        tau, tie = self.thresholds[group]
        if v > tau:
            return 1
        if v == tau:
            return tie
        return 0


@dataclass(frozen=True)
class SelectionRule:
    """Explicit table of selection probabilities on (score, group) pairs."""

    table: Mapping[tuple[Number, Group], Number]

    def __post_init__(self) -> None:
        entries = {(v, as_group(g)): p for (v, g), p in dict(self.table).items()}
        for (v, g), p in entries.items():
            if not 0 <= p <= 1:
                raise PolicyError(f"selection probability f({v}, {g.value}) outside [0, 1]: {p}")
        object.__setattr__(self, "table", entries)

    def probability(self, v: Number, group: Group) -> Number:
        key = (v, as_group(group))
        if key not in self.table:
            raise PolicyError(f"selection rule has no entry for (v={v}, S={as_group(group).value})")
        return self.table[key]


Rule = Union[SelectionRule, ThresholdPolicy]


def _clamp_rate(beta: Number, tolerance: float = 1e-9) -> Number:
    """Absorb float drift just outside [0, 1]; exact values pass through."""
    if isinstance(beta, Fraction) or 0 <= beta <= 1:
        return beta
    if -tolerance <= beta < 0:
        return 0.0
    if 1 < beta <= 1 + tolerance:
        return 1.0
    return beta


def as_selection_rule(pop: Population, z: Predictor, rule: Rule) -> SelectionRule:
    """Materialize a rule as an explicit table over supp(z) x groups."""
    if isinstance(rule, SelectionRule):
        return rule
    table = {}
    support = z.support(pop)
    for g in pop.groups:
        for v in support:
            table[(v, g)] = rule.probability(v, g)
    return SelectionRule(table)


@dataclass(frozen=True)
class GroupStats:
    group: Group
    beta: Number
    tpr: Optional[Number]
    fpr: Optional[Number]
    ppv: Optional[Number]
    impact: Number


@dataclass(frozen=True)
class PolicyStats:
    """Per-group selection statistics plus the lender's overall utility."""

    per_group: Mapping[Group, GroupStats]
    utility: Number

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_group", dict(self.per_group))

    def group(self, g: Group | str) -> GroupStats:
        return self.per_group[as_group(g)]

    def disparity(self, h: str) -> Number:
        """|h_A - h_B| for h in beta/tpr/fpr; requires both groups defined."""
        values = [metric_value(self.per_group[g], h) for g in (Group.A, Group.B)]
        if any(v is None for v in values):
            raise PolicyError(f"{h} undefined for a group; cannot compute disparity")
        return abs(values[0] - values[1])

    def to_dict(self) -> dict:
        return {
            "utility": float(self.utility),
            "per_group": {
                g.value: {
                    "beta": float(s.beta),
                    "tpr": None if s.tpr is None else float(s.tpr),
                    "fpr": None if s.fpr is None else float(s.fpr),
                    "ppv": None if s.ppv is None else float(s.ppv),
                    "impact": float(s.impact),
                }
                for g, s in self.per_group.items()
            },
        }


def metric_value(stats: GroupStats, h: str) -> Optional[Number]:
    if h == "beta":
        return stats.beta
    if h == "tpr":
        return stats.tpr
    if h == "fpr":
        return stats.fpr
    raise PolicyError(f"unknown parity metric {h!r}; expected beta, tpr, or fpr")


def evaluate(
    pop: Population,
    z: Predictor,
    rule: Rule,
    params: ImpactParams,
    cal_tolerance: float = DEFAULT_CAL_TOL,
) -> PolicyStats:
    """Selection rate, TPR, FPR, PPV, and impact per group, plus utility.

    TPR (resp. FPR) is omitted for a group whose base rate is 0 (resp. 1),
    and PPV is omitted when the group selects nothing.
    """
    rule = as_selection_rule(pop, z, rule)
    per_group: dict[Group, GroupStats] = {}
    utility: Number = 0
    for g in pop.groups:
        require_calibrated(pop, z, g, cal_tolerance)
        dist = score_distribution(pop, z, g)
        r = base_rate(pop, g)
        beta: Number = 0
        selected_positive: Number = 0
        impact: Number = 0
        for v, mass in dist.entries.items():
            f = rule.probability(v, g)
            beta = beta + mass * f
            selected_positive = selected_positive + mass * f * v
            impact = impact + mass * f * params.impact(v)
        group_mass = pop.scope_mass(g)
        utility = utility + group_mass * (selected_positive - beta * params.tau_u)
        tpr = selected_positive / r if r > 0 else None
        fpr = (beta - selected_positive) / (1 - r) if r < 1 else None
        ppv = selected_positive / beta if beta > 0 else None
        per_group[g] = GroupStats(g, beta, tpr, fpr, ppv, impact)
    return PolicyStats(per_group, utility)


# ---------------------------------------------------------------------------
# Threshold <-> selection-rate machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupCurve:
    """Statistics of within-group threshold policies as functions of the rate.

    ``breaks`` are the cumulative score masses from the top score downward;
    ``selpos`` holds, at each breakpoint, the (unnormalized) mass of selected
    positives.  Every other statistic is an affine image of ``selpos``.
    """

    group: Group
    scores_desc: tuple[Number, ...]
    masses: tuple[Number, ...]
    breaks: tuple[Number, ...]
    selpos: tuple[Number, ...]
    r: Number

    def segment(self, beta: Number) -> int:
        """Index j of the segment [breaks[j-1], breaks[j]] containing beta."""
        if not 0 <= beta <= 1:
            raise PolicyError(f"selection rate {beta} outside [0, 1]")
        for j in range(1, len(self.breaks)):
            if beta <= self.breaks[j]:
                return j
        return len(self.breaks) - 1

    def selected_positive(self, beta: Number) -> Number:
        j = self.segment(beta)
        return self.selpos[j - 1] + (beta - self.breaks[j - 1]) * self.scores_desc[j - 1]

    def tpr(self, beta: Number) -> Optional[Number]:
        return self.selected_positive(beta) / self.r if self.r > 0 else None

    def fpr(self, beta: Number) -> Optional[Number]:
        if self.r >= 1:
            return None
        return (beta - self.selected_positive(beta)) / (1 - self.r)

    def ppv(self, beta: Number) -> Optional[Number]:
        if beta <= 0:
            return None
        return self.selected_positive(beta) / beta

    def utility_term(self, beta: Number, params: ImpactParams) -> Number:
        """Group-conditional expected utility (unweighted by group mass)."""
        return self.selected_positive(beta) - params.tau_u * beta

    def impact(self, beta: Number, params: ImpactParams) -> Number:
        return self.selected_positive(beta) - params.tau_l * beta

    def metric(self, beta: Number, h: str) -> Optional[Number]:
        if h == "beta":
            return beta
        if h == "tpr":
            return self.tpr(beta)
        if h == "fpr":
            return self.fpr(beta)
        raise PolicyError(f"unknown parity metric {h!r}")

    def rate_for_tpr(self, target: Number) -> Number:
        """Smallest rate whose TPR equals ``target`` (TPR is nondecreasing)."""
        if self.r <= 0:
            raise PolicyError(f"TPR undefined: group {self.group.value} base rate is 0")
        goal = target * self.r
        if goal > self.selpos[-1] and goal - self.selpos[-1] <= 1e-9:
            goal = self.selpos[-1]  # float-mode drift between r and the top cumulative
        return _smallest_inverse(self.breaks, self.selpos, goal)

    def rate_for_fpr(self, target: Number) -> Number:
        """Largest rate whose FPR equals ``target`` (FPR is nondecreasing)."""
        if self.r >= 1:
            raise PolicyError(f"FPR undefined: group {self.group.value} base rate is 1")
        selneg = tuple(b - sp for b, sp in zip(self.breaks, self.selpos))
        return _largest_inverse(self.breaks, selneg, target * (1 - self.r))

    def rate_for_metric(self, target: Number, h: str) -> Number:
        if h == "beta":
            return target
        if h == "tpr":
            return self.rate_for_tpr(target)
        if h == "fpr":
            return self.rate_for_fpr(target)
        raise PolicyError(f"unknown parity metric {h!r}")

    def threshold_for_rate(self, beta: Number) -> tuple[Number, Number]:
        """The (tau, tie probability) pair selecting exactly ``beta`` mass."""
        beta = _clamp_rate(beta)
        if not 0 <= beta <= 1:
            raise PolicyError(f"selection rate {beta} outside [0, 1]")
        if beta == 0:
            return 1, 0
        j = self.segment(beta)
        tau = self.scores_desc[j - 1]
        above = self.breaks[j - 1]
        atom = self.masses[j - 1]
        tie = (beta - above) / atom
        if not isinstance(tie, Fraction):  # float drift can overshoot by an ulp
            tie = min(1.0, max(0.0, tie))
        return tau, tie


def _smallest_inverse(breaks: Sequence[Number], values: Sequence[Number], target: Number) -> Number:
    """Smallest x with pw-linear(x) = target, for a nondecreasing curve."""
    if target <= values[0]:
        return breaks[0]
    if target > values[-1]:
        raise PolicyError(f"target {float(target)} above the curve's maximum {float(values[-1])}")
    for j in range(1, len(breaks)):
        if values[j] >= target:
            if values[j] == values[j - 1]:
                return breaks[j]
            return breaks[j - 1] + (target - values[j - 1]) * (breaks[j] - breaks[j - 1]) / (
                values[j] - values[j - 1]
            )
    raise AssertionError("unreachable")


def _largest_inverse(breaks: Sequence[Number], values: Sequence[Number], target: Number) -> Number:
    """Largest x with pw-linear(x) = target, for a nondecreasing curve."""
    if target >= values[-1]:
        return breaks[-1]
    if target < values[0]:
        raise PolicyError(f"target {float(target)} below the curve's minimum {float(values[0])}")
    for j in range(1, len(breaks)):
        if values[j] > target:
            if values[j] == values[j - 1]:  # pragma: no cover - guarded by > above
                return breaks[j]
            return breaks[j - 1] + (target - values[j - 1]) * (breaks[j] - breaks[j - 1]) / (
                values[j] - values[j - 1]
            )
    raise AssertionError("unreachable")


def group_curve(
    pop: Population, z: Predictor, group: Group | str, cal_tolerance: float = DEFAULT_CAL_TOL
) -> GroupCurve:
    group = as_group(group)
    require_calibrated(pop, z, group, cal_tolerance)
    dist = score_distribution(pop, z, group)
    scores = sorted(dist.entries, reverse=True)
    masses = [dist.entries[v] for v in scores]
    breaks: list[Number] = [0]
    selpos: list[Number] = [0]
    for v, m in zip(scores, masses):
        breaks.append(breaks[-1] + m)
        selpos.append(selpos[-1] + m * v)
    breaks[-1] = 1  # guard the cumulative rounding of the last atom
    return GroupCurve(
        group=group,
        scores_desc=tuple(scores),
        masses=tuple(masses),
        breaks=tuple(breaks),
        selpos=tuple(selpos),
        r=base_rate(pop, group),
    )


def threshold_for_rate(
    pop: Population, z: Predictor, group: Group | str, beta: Number
) -> tuple[Number, Number]:
    """The threshold policy piece with selection rate exactly ``beta`` in the group.

    beta = 0 selects nothing via (1, 0); beta = 1 returns (0, 1) selecting all
    mass including any atom at score 0.
    """
    beta = _clamp_rate(beta)
    if beta == 0:
        return 1, 0
    if beta == 1:
        return 0, 1
    return group_curve(pop, z, group).threshold_for_rate(beta)


def policy_for_rates(
    pop: Population, z: Predictor, rates: Mapping[Group | str, Number]
) -> ThresholdPolicy:
    return ThresholdPolicy(
        {as_group(g): threshold_for_rate(pop, z, g, beta) for g, beta in rates.items()}
    )


@dataclass(frozen=True)
class CurveRow:
    beta: Number
    tpr: Optional[Number]
    fpr: Optional[Number]
    ppv: Optional[Number]


def curve_breakpoints(pop: Population, z: Predictor, group: Group | str) -> list[Number]:
    """Selection rates at which the group's threshold statistics kink."""
    return list(group_curve(pop, z, group).breaks)


def sweep_curves(
    pop: Population,
    z: Predictor,
    group: Group | str,
    betas: Iterable[Number] | None = None,
    points: int = 1001,
) -> list[CurveRow]:
    """TPR/FPR/PPV rows across selection rates.

    Defaults to the union of a uniform grid and the curve's breakpoints, so
    piecewise-linear consumers see every kink exactly.
    """
    curve = group_curve(pop, z, group)
    if betas is None:
        grid = [Fraction(k, points - 1) for k in range(points)]
        betas = sorted(set(grid) | set(curve.breaks))
    rows = []
    for beta in betas:
        rows.append(CurveRow(beta, curve.tpr(beta), curve.fpr(beta), curve.ppv(beta)))
    return rows


@dataclass(frozen=True)
class DominanceViolation:
    scope: str
    beta: Number
    metric: str
    base: Number
    refined: Number


@dataclass(frozen=True)
class DominanceReport:
    """Outcome of checking curve dominance of a refinement over its base."""

    scopes: tuple[str, ...]
    checked_rates: int
    worst_margins: dict[str, float]
    violations: tuple[DominanceViolation, ...]
    ok: bool


def dominance_check(
    pop: Population,
    z: Predictor,
    z_prime: Predictor,
    scopes: Iterable[Group | str] = (Group.A, Group.B),
    beta_grid: Iterable[Number] | None = None,
    tolerance: float = 1e-10,
    refinement_tolerance: float = 1e-10,
) -> DominanceReport:
    """Verify TPR up / FPR down / PPV up at every rate for a refinement pair.

    Rates checked are the supplied grid plus every breakpoint of both curves;
    between consecutive breakpoints all three statistics are linear (or, for
    PPV, monotone ratios of linears), so breakpoint dominance is decisive.
    """
    scopes = [as_group(s) for s in scopes]
    for s in scopes:
        check = is_refinement(pop, z, z_prime, s, tolerance=refinement_tolerance)
        if not check.is_refinement:
            raise PolicyError(
                f"{z_prime.name!r} does not refine {z.name!r} on {s.value} "
                f"(max deviation {float(check.max_deviation):.3e})"
            )
    worst = {"tpr": float("inf"), "fpr": float("inf"), "ppv": float("inf")}
    violations: list[DominanceViolation] = []
    checked = 0
    for s in scopes:
        base = group_curve(pop, z, s)
        refined = group_curve(pop, z_prime, s)
        rates = set(base.breaks) | set(refined.breaks)
        if beta_grid is not None:
            rates |= set(beta_grid)
        for beta in sorted(rates):
            checked += 1
            pairs = []
            if base.r > 0:
                pairs.append(("tpr", refined.tpr(beta) - base.tpr(beta)))
            if base.r < 1:
                pairs.append(("fpr", base.fpr(beta) - refined.fpr(beta)))
            if beta > 0:
                pairs.append(("ppv", refined.ppv(beta) - base.ppv(beta)))
            for metric, margin in pairs:
                worst[metric] = min(worst[metric], float(margin))
                if margin < -tolerance:
                    ref_val = refined.metric(beta, metric) if metric != "ppv" else refined.ppv(beta)
                    base_val = base.metric(beta, metric) if metric != "ppv" else base.ppv(beta)
                    violations.append(
                        DominanceViolation(s.value, beta, metric, base_val, ref_val)
                    )
    return DominanceReport(
        scopes=tuple(s.value for s in scopes),
        checked_rates=checked,
        worst_margins=worst,
        violations=tuple(violations),
        ok=not violations,
    )
