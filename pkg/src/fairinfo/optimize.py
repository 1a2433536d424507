"""Fairness-constrained selection-policy optimization.

Four problem shapes over the selection table f(v, S):

* utility:   maximize expected utility subject to an impact floor for group B
             and a parity band |h_A - h_B| <= eps
* disparity: minimize |h_A - h_B| subject to the impact floor and a utility
             floor
* impact:    maximize group B's impact subject to the utility floor and the
             parity band
* combo:     maximize lambda_u * U + lambda_i * Imp_B - lambda_beta * |h_A - h_B|

All are linear programs after the absolute values are linearized, and each has
an optimal threshold policy, which ``solve_optimization`` extracts by matching
the optimum's per-group parity values.  ``solve_by_sweep`` solves the same
problem by enumerating the vertices of the (rate_A, rate_B) parameterization
directly, independent of the simplex, and serves as its cross-validation
oracle.  Refining the predictor can only improve any of these programs;
``verify_improvement`` checks that, along with the matched-rate construction
behind it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .information import require_calibrated
from .lp import Constraint, LinearProgram, solve as lp_solve
from .policy import (
    GroupCurve,
    ImpactParams,
    PolicyStats,
    SelectionRule,
    ThresholdPolicy,
    as_selection_rule,
    evaluate,
    group_curve,
    metric_value,
    policy_for_rates,
)
from .population import (
    Group,
    Number,
    Population,
    Predictor,
    base_rate,
    score_distribution,
)
from .refinement import is_refinement

OBJECTIVES = ("utility", "disparity", "impact", "combo")
METRICS = ("beta", "tpr", "fpr")

VALUE_TOL = 1e-9
SWEEP_TOL = 1e-7


class SpecError(ValueError):
    """Invalid or inapplicable optimization specification."""


@dataclass(frozen=True)
class OptimizationSpec:
    """Objective kind, parity metric, and the numeric knobs of Optimizations 1-4."""

    objective: str
    fairness_metric: str = "beta"
    eps: Number = 1
    t_i: Number = -1
    t_u: Number = -1
    impact_params: ImpactParams = ImpactParams(Fraction(1, 2), Fraction(1, 2))
    lambda_u: Number = 1
    lambda_i: Number = 0
    lambda_beta: Number = 0

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise SpecError(f"unknown objective {self.objective!r}; expected one of {OBJECTIVES}")
        if self.fairness_metric not in METRICS:
            raise SpecError(
                f"unknown fairness metric {self.fairness_metric!r}; expected one of {METRICS}"
            )
        if self.eps < 0:
            raise SpecError("eps must be nonnegative")
        if min(self.lambda_u, self.lambda_i, self.lambda_beta) < 0:
            raise SpecError("combo weights must be nonnegative")

    @property
    def h(self) -> str:
        return self.fairness_metric

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "fairness_metric": self.fairness_metric,
            "eps": float(self.eps),
            "t_i": float(self.t_i),
            "t_u": float(self.t_u),
            "tau_u": float(self.impact_params.tau_u),
            "tau_l": float(self.impact_params.tau_l),
            "lambda_u": float(self.lambda_u),
            "lambda_i": float(self.lambda_i),
            "lambda_beta": float(self.lambda_beta),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "OptimizationSpec":
        known = {
            "objective", "fairness_metric", "eps", "t_i", "t_u",
            "tau_u", "tau_l", "lambda_u", "lambda_i", "lambda_beta",
        }
        unknown = set(doc) - known
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        if "objective" not in doc:
            raise SpecError("spec requires an 'objective'")
        params = ImpactParams(doc.get("tau_u", 0.5), doc.get("tau_l", 0.5))
        return cls(
            objective=doc["objective"],
            fairness_metric=doc.get("fairness_metric", "beta"),
            eps=doc.get("eps", 1),
            t_i=doc.get("t_i", -1),
            t_u=doc.get("t_u", -1),
            impact_params=params,
            lambda_u=doc.get("lambda_u", 1),
            lambda_i=doc.get("lambda_i", 0),
            lambda_beta=doc.get("lambda_beta", 0),
        )


@dataclass(frozen=True)
class OptimizationResult:
    spec: OptimizationSpec
    predictor: str
    status: str  # optimal | infeasible
    rule: Optional[SelectionRule] = None
    as_threshold: Optional[ThresholdPolicy] = None
    stats: Optional[PolicyStats] = None
    threshold_stats: Optional[PolicyStats] = None
    value: Optional[Number] = None
    diagnostics: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "predictor": self.predictor,
            "status": self.status,
        }
        if self.status != "optimal":
            out["diagnostics"] = self.diagnostics
            return out
        out["value"] = float(self.value)
        out["rule"] = [
            {"v": float(v), "group": g.value, "p": float(p)}
            for (v, g), p in sorted(self.rule.table.items(), key=lambda kv: (kv[0][1].value, kv[0][0]))
        ]
        if self.as_threshold is not None:
            out["threshold_policy"] = {
                g.value: {"tau": float(tau), "tie_probability": float(p)}
                for g, (tau, p) in self.as_threshold.thresholds.items()
            }

        def stats_doc(stats: PolicyStats) -> dict:
            doc = stats.to_dict()
            if len(stats.per_group) == 2:
                doc["disparity"] = float(stats.disparity(self.spec.fairness_metric))
            return doc

        out["stats"] = stats_doc(self.stats)
        if self.threshold_stats is not None:
            out["threshold_stats"] = stats_doc(self.threshold_stats)
        return out


# ---------------------------------------------------------------------------
# LP construction
# ---------------------------------------------------------------------------


def _group_data(pop: Population, z: Predictor, spec: OptimizationSpec):
    if Group.A not in pop.groups or Group.B not in pop.groups:
        raise SpecError("needs-two-groups: the parity optimizations require groups A and B")
    data = {}
    for g in (Group.A, Group.B):
        require_calibrated(pop, z, g)
        dist = score_distribution(pop, z, g)
        r = base_rate(pop, g)
        if spec.fairness_metric == "tpr" and r == 0:
            raise SpecError(f"tpr-undefined-for-group: base rate of {g.value} is 0")
        if spec.fairness_metric == "fpr" and r == 1:
            raise SpecError(f"fpr-undefined-for-group: base rate of {g.value} is 1")
        data[g] = {
            "support": sorted(dist.entries),
            "sigma": dist.entries,
            "mass": pop.scope_mass(g),
            "r": r,
        }
    return data


def _h_coeff(v: Number, sigma_v: Number, h: str, r: Number) -> Number:
    if h == "beta":
        return sigma_v
    if h == "tpr":
        return sigma_v * v / r
    return sigma_v * (1 - v) / (1 - r)


def build_lp(pop: Population, z: Predictor, spec: OptimizationSpec) -> LinearProgram:
    """Materialize the spec as a linear program over f(v, S) variables.

    The parity band enters as two one-sided rows; where the absolute value is
    part of the objective (disparity, combo), one auxiliary variable t with
    t >= +/-(h_A - h_B) linearizes it.
    """
    data = _group_data(pop, z, spec)
    params = spec.impact_params

    keys: list[tuple[Number, Group]] = []
    for g in (Group.A, Group.B):
        keys.extend((v, g) for v in data[g]["support"])
    names = [f"f({v},{g.value})" for v, g in keys]
    index = {k: i for i, k in enumerate(keys)}
    needs_aux = spec.objective in ("disparity", "combo")
    if needs_aux:
        names.append("t")
    n = len(names)

    def vector(entries: Mapping[tuple[Number, Group], Number]) -> list[Number]:
        vec: list[Number] = [0] * n
        for k, c in entries.items():
            vec[index[k]] = c
        return vec

    utility_c = vector(
        {
            (v, g): data[g]["mass"] * data[g]["sigma"][v] * params.utility(v)
            for v, g in keys
        }
    )
    impact_b = vector(
        {
            (v, g): data[g]["sigma"][v] * params.impact(v)
            for v, g in keys
            if g is Group.B
        }
    )
    h_gap = vector(
        {
            (v, g): (1 if g is Group.A else -1)
            * _h_coeff(v, data[g]["sigma"][v], spec.fairness_metric, data[g]["r"])
            for v, g in keys
        }
    )

    constraints: list[Constraint] = []

    def parity_band() -> None:
        constraints.append(Constraint(tuple(h_gap), "<=", spec.eps))
        constraints.append(Constraint(tuple(-c for c in h_gap), "<=", spec.eps))

    def aux_rows() -> None:
        gap_minus_t = list(h_gap)
        gap_minus_t[-1] = -1
        constraints.append(Constraint(tuple(gap_minus_t), "<=", 0))
        neg_gap_minus_t = [-c for c in h_gap]
        neg_gap_minus_t[-1] = -1
        constraints.append(Constraint(tuple(neg_gap_minus_t), "<=", 0))

    objective: list[Number]
    maximize = True
    if spec.objective == "utility":
        objective = utility_c
        constraints.append(Constraint(tuple(impact_b), ">=", spec.t_i))
        parity_band()
    elif spec.objective == "impact":
        objective = impact_b
        constraints.append(Constraint(tuple(utility_c), ">=", spec.t_u))
        parity_band()
    elif spec.objective == "disparity":
        objective = vector({})
        objective[-1] = 1
        maximize = False
        aux_rows()
        constraints.append(Constraint(tuple(impact_b), ">=", spec.t_i))
        constraints.append(Constraint(tuple(utility_c), ">=", spec.t_u))
    else:  # combo
        objective = [
            spec.lambda_u * u + spec.lambda_i * i for u, i in zip(utility_c, impact_b)
        ]
        objective[-1] = -spec.lambda_beta
        aux_rows()

    bounds: list[tuple[Number, Optional[Number]]] = [(0, 1)] * len(keys)
    if needs_aux:
        bounds.append((0, None))
    return LinearProgram(tuple(names), tuple(objective), maximize, tuple(bounds), tuple(constraints))


# ---------------------------------------------------------------------------
# Objective/feasibility evaluation on policy statistics
# ---------------------------------------------------------------------------


def objective_value(spec: OptimizationSpec, stats: PolicyStats) -> Number:
    if spec.objective == "utility":
        return stats.utility
    if spec.objective == "impact":
        return stats.group(Group.B).impact
    if spec.objective == "disparity":
        return stats.disparity(spec.fairness_metric)
    return (
        spec.lambda_u * stats.utility
        + spec.lambda_i * stats.group(Group.B).impact
        - spec.lambda_beta * stats.disparity(spec.fairness_metric)
    )


def is_feasible(spec: OptimizationSpec, stats: PolicyStats, tol: float = VALUE_TOL) -> bool:
    if spec.objective == "utility":
        return (
            stats.group(Group.B).impact >= spec.t_i - tol
            and stats.disparity(spec.fairness_metric) <= spec.eps + tol
        )
    if spec.objective == "impact":
        return (
            stats.utility >= spec.t_u - tol
            and stats.disparity(spec.fairness_metric) <= spec.eps + tol
        )
    if spec.objective == "disparity":
        return stats.group(Group.B).impact >= spec.t_i - tol and stats.utility >= spec.t_u - tol
    return True


def spec_sense_max(spec: OptimizationSpec) -> bool:
    return spec.objective != "disparity"


def max_unconstrained_utility(pop: Population, z: Predictor, params: ImpactParams) -> Number:
    """Select exactly the scores with positive utility (fraction free at zero)."""
    acc: Number = 0
    for c in pop.cells:
        u = params.utility(z(c))
        if u > 0:
            acc = acc + c.mass * u
    return acc


def max_unconstrained_impact_b(pop: Population, z: Predictor, params: ImpactParams) -> Number:
    total = pop.scope_mass(Group.B)
    acc: Number = 0
    for c in pop.scope_cells(Group.B):
        l = params.impact(z(c))
        if l > 0:
            acc = acc + c.mass * l
    return acc / total


def _diagnose_infeasible(pop: Population, z: Predictor, spec: OptimizationSpec) -> str:
    reasons = []
    params = spec.impact_params
    if spec.objective in ("utility", "disparity"):
        best_impact = max_unconstrained_impact_b(pop, z, params)
        if spec.t_i > best_impact:
            reasons.append(
                f"t_i={float(spec.t_i)} unreachable (max impact for B is {float(best_impact)})"
            )
    if spec.objective in ("impact", "disparity"):
        best_utility = max_unconstrained_utility(pop, z, params)
        if spec.t_u > best_utility:
            reasons.append(
                f"t_u={float(spec.t_u)} unreachable (max utility is {float(best_utility)})"
            )
    if not reasons:
        reasons.append("constraint combination jointly infeasible")
    return "; ".join(reasons)


# ---------------------------------------------------------------------------
# Solving and threshold extraction
# ---------------------------------------------------------------------------


def exactify_policy(policy: ThresholdPolicy) -> ThresholdPolicy:
    return ThresholdPolicy(
        {
            g: (Fraction(tau) if not isinstance(tau, Fraction) else tau,
                Fraction(p) if not isinstance(p, Fraction) else p)
            for g, (tau, p) in policy.thresholds.items()
        }
    )


def matched_threshold_policy(
    pop: Population,
    z_to: Predictor,
    stats_from: PolicyStats,
    h: str,
) -> ThresholdPolicy:
    """The threshold policy under ``z_to`` whose per-group h matches ``stats_from``.

    For h = beta the selection rates carry over directly.  For h = tpr the
    smallest rate attaining the target is used; for h = fpr the largest.
    Either way the matched policy preserves h exactly and can only improve
    utility and impact, which is the constructive step behind both threshold
    extraction and the refinement-improvement theorem.
    """
    rates = {}
    for g in (Group.A, Group.B):
        if g not in stats_from.per_group:
            continue
        target = metric_value(stats_from.group(g), h)
        if target is None:
            raise SpecError(f"{h} undefined for group {g.value}; cannot match")
        rates[g] = group_curve(pop, z_to, g).rate_for_metric(target, h)
    return policy_for_rates(pop, z_to, rates)


def solve_optimization(
    pop: Population,
    z: Predictor,
    spec: OptimizationSpec,
    lp_exact: Optional[bool] = None,
) -> OptimizationResult:
    """Build and solve the LP, then extract an equal-value threshold policy.

    ``lp_exact`` follows the lp module's auto-detection by default; pass False
    to force the floating solve on rational inputs.
    """
    program = build_lp(pop, z, spec)
    sol = lp_solve(program, exact=False if lp_exact is None else lp_exact)
    if sol.status == "infeasible":
        return OptimizationResult(
            spec, z.name, "infeasible", diagnostics=_diagnose_infeasible(pop, z, spec)
        )
    if sol.status == "unbounded":  # pragma: no cover - boxed variables
        raise RuntimeError("policy LP cannot be unbounded")

    table = {}
    for g in (Group.A, Group.B):
        for v in score_distribution(pop, z, g).support():
            value = sol.assignment[f"f({v},{g.value})"]
            table[(v, g)] = min(1, max(0, value))
    rule = SelectionRule(table)
    stats = evaluate(pop, z, rule, spec.impact_params)

    exact_inputs = pop.is_exact() and z.is_exact()
    policy = matched_threshold_policy(pop, z, stats, spec.fairness_metric)
    if exact_inputs:
        policy = exactify_policy(policy)
    threshold_stats = evaluate(pop, z, policy, spec.impact_params)

    value = sol.objective_value
    extracted = objective_value(spec, threshold_stats)
    if abs(float(extracted) - float(value)) > 1e-6:
        raise RuntimeError(
            f"threshold extraction drifted from the LP optimum: {float(extracted)} "
            f"vs {float(value)}"
        )
    return OptimizationResult(
        spec,
        z.name,
        "optimal",
        rule=rule,
        as_threshold=policy,
        stats=stats,
        threshold_stats=threshold_stats,
        value=value,
    )


# ---------------------------------------------------------------------------
# Selection-rate sweep oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Affine:
    """c + a * rate_A + b * rate_B."""

    c: float
    a: float
    b: float

    def __call__(self, x: float, y: float) -> float:
        return self.c + self.a * x + self.b * y


def _float_curve(curve: GroupCurve) -> GroupCurve:
    return GroupCurve(
        group=curve.group,
        scores_desc=tuple(float(v) for v in curve.scores_desc),
        masses=tuple(float(m) for m in curve.masses),
        breaks=tuple(float(b) for b in curve.breaks),
        selpos=tuple(float(s) for s in curve.selpos),
        r=float(curve.r),
    )


def solve_by_sweep(
    pop: Population,
    z: Predictor,
    spec: OptimizationSpec,
    extra_points: int = 0,
) -> OptimizationResult:
    """Independent oracle over the (rate_A, rate_B) threshold parameterization.

    Every statistic of a per-group threshold policy is piecewise linear in the
    selection rates with kinks only at the curves' breakpoints, so on each
    breakpoint rectangle the feasible set is a polygon whose vertices are
    intersections of the rectangle edges and constraint boundary lines.  The
    oracle enumerates exactly those vertices (plus the |h_A - h_B| = 0 fold
    line where the objective carries an absolute value), evaluates the true
    objective at each feasible candidate, and keeps the best, breaking ties
    toward smaller rate_B then rate_A.  ``extra_points`` adds a uniform grid
    of additional axis breakpoints for belt-and-braces coverage.
    """
    data = _group_data(pop, z, spec)  # shared validation: two groups, metric defined
    params = spec.impact_params
    tau_u, tau_l = float(params.tau_u), float(params.tau_l)
    curves = {
        g: _float_curve(group_curve(pop, z, g)) for g in (Group.A, Group.B)
    }
    w = {g: float(data[g]["mass"]) for g in (Group.A, Group.B)}
    r = {g: float(data[g]["r"]) for g in (Group.A, Group.B)}

    axes: dict[Group, list[float]] = {}
    for g in (Group.A, Group.B):
        points = set(curves[g].breaks)
        if extra_points > 1:
            points |= {k / (extra_points - 1) for k in range(extra_points)}
        axes[g] = sorted(points)

    h = spec.fairness_metric
    eps = float(spec.eps)
    t_i, t_u = float(spec.t_i), float(spec.t_u)
    lam_u, lam_i, lam_b = float(spec.lambda_u), float(spec.lambda_i), float(spec.lambda_beta)
    maximize = spec_sense_max(spec)
    geom_tol = 1e-9

    def h_affine(g: Group, seg: int) -> tuple[float, float]:
        """(intercept, slope) of h_g over segment ``seg`` of its own axis."""
        curve = curves[g]
        b0 = curve.breaks[seg - 1]
        s = curve.scores_desc[seg - 1]
        p0 = curve.selpos[seg - 1] - s * b0
        if h == "beta":
            return 0.0, 1.0
        if h == "tpr":
            return p0 / r[g], s / r[g]
        return -p0 / (1 - r[g]), (1 - s) / (1 - r[g])

    def seg_affines(seg_a: int, seg_b: int) -> dict[str, _Affine]:
        out = {}
        parts = {}
        for g, seg in ((Group.A, seg_a), (Group.B, seg_b)):
            curve = curves[g]
            b0 = curve.breaks[seg - 1]
            s = curve.scores_desc[seg - 1]
            p0 = curve.selpos[seg - 1] - s * b0
            parts[g] = (p0, s)
        (pa, sa), (pb, sb) = parts[Group.A], parts[Group.B]
        out["U"] = _Affine(
            w[Group.A] * pa + w[Group.B] * pb,
            w[Group.A] * (sa - tau_u),
            w[Group.B] * (sb - tau_u),
        )
        out["ImpB"] = _Affine(pb, 0.0, sb - tau_l)
        ha0, ha1 = h_affine(Group.A, seg_a)
        hb0, hb1 = h_affine(Group.B, seg_b)
        out["gap"] = _Affine(ha0 - hb0, ha1, -hb1)
        return out

    def objective_at(fns: dict[str, _Affine], x: float, y: float) -> float:
        if spec.objective == "utility":
            return fns["U"](x, y)
        if spec.objective == "impact":
            return fns["ImpB"](x, y)
        if spec.objective == "disparity":
            return abs(fns["gap"](x, y))
        return (
            lam_u * fns["U"](x, y)
            + lam_i * fns["ImpB"](x, y)
            - lam_b * abs(fns["gap"](x, y))
        )

    def feasible_at(fns: dict[str, _Affine], x: float, y: float) -> bool:
        if spec.objective == "utility":
            return fns["ImpB"](x, y) >= t_i - geom_tol and abs(fns["gap"](x, y)) <= eps + geom_tol
        if spec.objective == "impact":
            return fns["U"](x, y) >= t_u - geom_tol and abs(fns["gap"](x, y)) <= eps + geom_tol
        if spec.objective == "disparity":
            return fns["ImpB"](x, y) >= t_i - geom_tol and fns["U"](x, y) >= t_u - geom_tol
        return True

    best: Optional[tuple[float, float, float]] = None  # (objective, rate_B, rate_A)

    def consider(val: float, x: float, y: float) -> None:
        nonlocal best
        if best is None:
            best = (val, y, x)
            return
        better = val > best[0] + 1e-12 if maximize else val < best[0] - 1e-12
        tied = abs(val - best[0]) <= 1e-12
        if better or (tied and (y, x) < (best[1], best[2])):
            best = (val, y, x)

    for seg_a in range(1, len(axes[Group.A])):
        a_lo, a_hi = axes[Group.A][seg_a - 1], axes[Group.A][seg_a]
        seg_a_idx = curves[Group.A].segment((a_lo + a_hi) / 2)
        for seg_b in range(1, len(axes[Group.B])):
            b_lo, b_hi = axes[Group.B][seg_b - 1], axes[Group.B][seg_b]
            seg_b_idx = curves[Group.B].segment((b_lo + b_hi) / 2)
            fns = seg_affines(seg_a_idx, seg_b_idx)

            lines: list[tuple[float, float, float]] = [
                (1.0, 0.0, a_lo),
                (1.0, 0.0, a_hi),
                (0.0, 1.0, b_lo),
                (0.0, 1.0, b_hi),
            ]
            gap = fns["gap"]
            if spec.objective in ("utility", "impact"):
                lines.append((gap.a, gap.b, eps - gap.c))
                lines.append((gap.a, gap.b, -eps - gap.c))
            if spec.objective in ("disparity", "combo"):
                lines.append((gap.a, gap.b, -gap.c))  # fold of the absolute value
            if spec.objective in ("utility", "disparity"):
                imp = fns["ImpB"]
                lines.append((imp.a, imp.b, t_i - imp.c))
            if spec.objective in ("impact", "disparity"):
                u = fns["U"]
                lines.append((u.a, u.b, t_u - u.c))

            for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(lines, 2):
                det = a1 * b2 - a2 * b1
                if abs(det) < 1e-12:
                    continue
                x = (c1 * b2 - c2 * b1) / det
                y = (a1 * c2 - a2 * c1) / det
                if not (a_lo - geom_tol <= x <= a_hi + geom_tol):
                    continue
                if not (b_lo - geom_tol <= y <= b_hi + geom_tol):
                    continue
                x = min(max(x, a_lo), a_hi)
                y = min(max(y, b_lo), b_hi)
                if feasible_at(fns, x, y):
                    consider(objective_at(fns, x, y), x, y)

    if best is None:
        return OptimizationResult(
            spec, z.name, "infeasible", diagnostics=_diagnose_infeasible(pop, z, spec)
        )

    value, rate_b, rate_a = best
    policy = policy_for_rates(pop, z, {Group.A: rate_a, Group.B: rate_b})
    stats = evaluate(pop, z, policy, params)
    return OptimizationResult(
        spec,
        z.name,
        "optimal",
        rule=as_selection_rule(pop, z, policy),
        as_threshold=policy,
        stats=stats,
        threshold_stats=stats,
        value=value,
    )


# ---------------------------------------------------------------------------
# Cost of fairness and the refinement-improvement harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostOfFairness:
    u_star: Optional[Number]
    opt: Optional[Number]
    cost: Optional[Number]
    status: str

    def to_dict(self) -> dict:
        return {
            "u_star": None if self.u_star is None else float(self.u_star),
            "opt": None if self.opt is None else float(self.opt),
            "cost": None if self.cost is None else float(self.cost),
            "status": self.status,
        }


def cost_of_fairness(
    pop: Population,
    z: Predictor,
    spec: OptimizationSpec,
    p_star_available: bool = True,
    lp_exact: Optional[bool] = None,
) -> CostOfFairness:
    """U* - OPT(z): the unconstrained truth-based optimum minus the program value.

    U* thresholds the true risks themselves, so it needs exact mode; in sample
    mode only OPT(z) is reported.
    """
    if spec.objective != "utility":
        raise SpecError("cost of fairness is defined for the utility objective")
    res = solve_optimization(pop, z, spec, lp_exact=lp_exact)
    opt = res.value if res.status == "optimal" else None
    if not p_star_available:
        return CostOfFairness(None, opt, None, "u_star-unavailable")
    from .population import bayes_predictor

    u_star = max_unconstrained_utility(pop, bayes_predictor(pop), spec.impact_params)
    cost = None if opt is None else u_star - opt
    return CostOfFairness(u_star, opt, cost, res.status)


@dataclass(frozen=True)
class WitnessCheck:
    h_preserved: bool
    h_gap: float
    utility_margin: float
    impact_margin: float

    @property
    def ok(self) -> bool:
        return self.h_preserved and self.utility_margin >= -1e-9 and self.impact_margin >= -1e-9


@dataclass(frozen=True)
class SpecComparison:
    spec: OptimizationSpec
    base_status: str
    refined_status: str
    opt_base: Optional[Number]
    opt_refined: Optional[Number]
    margin: Optional[float]
    witness: Optional[WitnessCheck]
    ok: bool


@dataclass(frozen=True)
class ImprovementReport:
    comparisons: tuple[SpecComparison, ...]
    ok: bool

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "comparisons": [
                {
                    "spec": c.spec.to_dict(),
                    "base_status": c.base_status,
                    "refined_status": c.refined_status,
                    "opt_base": None if c.opt_base is None else float(c.opt_base),
                    "opt_refined": None if c.opt_refined is None else float(c.opt_refined),
                    "margin": c.margin,
                    "witness_ok": None if c.witness is None else c.witness.ok,
                    "ok": c.ok,
                }
                for c in self.comparisons
            ],
        }


def _witness_check(
    pop: Population,
    z_prime: Predictor,
    spec: OptimizationSpec,
    base_policy_stats: PolicyStats,
    exact: bool,
) -> WitnessCheck:
    h = spec.fairness_metric
    witness = matched_threshold_policy(pop, z_prime, base_policy_stats, h)
    if exact:
        witness = exactify_policy(witness)
    w_stats = evaluate(pop, z_prime, witness, spec.impact_params)
    gaps = []
    exact_match = True
    for g in (Group.A, Group.B):
        target = metric_value(base_policy_stats.group(g), h)
        got = metric_value(w_stats.group(g), h)
        exact_match &= got == target
        gaps.append(abs(float(got) - float(target)))
    h_gap = max(gaps)
    preserved = exact_match if exact else (h_gap <= 1e-12)
    return WitnessCheck(
        h_preserved=preserved,
        h_gap=h_gap,
        utility_margin=float(w_stats.utility - base_policy_stats.utility),
        impact_margin=float(
            w_stats.group(Group.B).impact - base_policy_stats.group(Group.B).impact
        ),
    )


def verify_improvement(
    pop: Population,
    z: Predictor,
    z_prime: Predictor,
    specs: Iterable[OptimizationSpec],
    tolerance: float = 1e-8,
    refinement_tolerance: float = 1e-10,
) -> ImprovementReport:
    """Check that refining z to z_prime can only improve each spec's optimum.

    Also exhibits the constructive matched-rate policy under z_prime for each
    base optimum: the parity metric values must carry over exactly while
    utility and group-B impact may only move up.  Raises if z_prime does not
    refine z on both groups; any inequality violation is reported, not
    silently tolerated.
    """
    for g in (Group.A, Group.B):
        check = is_refinement(pop, z, z_prime, g, tolerance=refinement_tolerance)
        if not check.is_refinement:
            raise SpecError(
                f"{z_prime.name!r} does not refine {z.name!r} on group {g.value} "
                f"(max deviation {float(check.max_deviation):.3e})"
            )
    exact = pop.is_exact() and z.is_exact() and z_prime.is_exact()
    comparisons = []
    for spec in specs:
        base = solve_optimization(pop, z, spec)
        refined = solve_optimization(pop, z_prime, spec)
        maximize = spec_sense_max(spec)
        inf_value = float("-inf") if maximize else float("inf")
        v_base = float(base.value) if base.status == "optimal" else inf_value
        v_refined = float(refined.value) if refined.status == "optimal" else inf_value
        margin = (v_refined - v_base) if maximize else (v_base - v_refined)
        if v_base == v_refined:  # covers the doubly-infeasible case
            margin = 0.0
        witness = None
        if base.status == "optimal":
            witness = _witness_check(pop, z_prime, spec, base.threshold_stats, exact)
        ok = margin >= -tolerance and (witness is None or witness.ok)
        comparisons.append(
            SpecComparison(
                spec,
                base.status,
                refined.status,
                base.value if base.status == "optimal" else None,
                refined.value if refined.status == "optimal" else None,
                margin,
                witness,
                ok,
            )
        )
    return ImprovementReport(tuple(comparisons), all(c.ok for c in comparisons))
