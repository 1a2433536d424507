"""Seeded verification suites over randomly generated instances.

Each suite replays one of the library's mathematical guarantees across many
generated populations and reports the worst observed margin, so a regression
anywhere in the measurement/optimization chain surfaces as a named failure.
The CLI's ``verify`` subcommand and the acceptance tests both run these.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .information import (
    entropic_information_content,
    entropic_information_loss,
    information_content,
    information_loss,
)
from .optimize import (
    METRICS,
    OBJECTIVES,
    OptimizationSpec,
    cost_of_fairness,
    solve_by_sweep,
    solve_optimization,
    verify_improvement,
)
from .policy import ImpactParams, dominance_check
from .population import ALL, Group, Population, Predictor, bayes_predictor, constant_predictor, base_rate
from .refinement import (
    SampleBudget,
    draw_sample_counts,
    is_refinement,
    merge_from_samples,
    merge_oracle,
)
from .synth import GeneratorParams, random_calibrated_predictor, random_population, random_refinement

F = Fraction


@dataclass
class SuiteResult:
    suite: str
    seeds: int
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    worst_margin: float = float("inf")
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, margin: float, tolerance: float, context: str) -> None:
        self.checks += 1
        self.worst_margin = min(self.worst_margin, margin)
        if margin < -tolerance:
            self.failures.append(f"{context}: margin {margin:.3e}")

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seeds": self.seeds,
            "checks": self.checks,
            "ok": self.ok,
            "worst_margin": None if self.worst_margin == float("inf") else self.worst_margin,
            "failures": self.failures[:50],
            "details": self.details,
        }


def _instance(seed: int, exact: bool, n_cells: int = 6) -> Population:
    return random_population(GeneratorParams(seed=seed, n_cells=n_cells, exact=exact))


def suite_identities(seeds: int = 500, base_seed: int = 0, tolerance: float = 1e-10) -> SuiteResult:
    """loss == content(reference) - content(z), variance and entropic variants."""
    result = SuiteResult("identities", seeds)
    for i in range(seeds):
        seed = base_seed + i
        pop = _instance(seed, exact=False)
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 7 + 1)
        refs = {
            "p_star": bayes_predictor(pop),
            "refinement": random_refinement(pop, z, seed=seed * 7 + 2),
        }
        for scope in (Group.A, Group.B, ALL):
            iz = information_content(pop, z, scope)
            ez = entropic_information_content(pop, z, scope)
            for label, ref in refs.items():
                gap = abs(
                    float(information_loss(pop, ref, z, scope))
                    - float(information_content(pop, ref, scope) - iz)
                )
                result.record(-gap, tolerance, f"seed {seed} {label} variance {scope}")
                ent_gap = abs(
                    entropic_information_loss(pop, ref, z, scope)
                    - (entropic_information_content(pop, ref, scope) - ez)
                )
                result.record(-ent_gap, tolerance, f"seed {seed} {label} entropic {scope}")
    return result


def suite_improv(seeds: int = 200, base_seed: int = 0, tolerance: float = 1e-10) -> SuiteResult:
    """Curve dominance of refinements: TPR up, FPR down, PPV up at every rate."""
    result = SuiteResult("improv", seeds)
    for i in range(seeds):
        seed = base_seed + i
        pop = _instance(seed, exact=False)
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 11 + 1)
        z_prime = random_refinement(pop, z, seed=seed * 11 + 2)
        grid = [k / 40 for k in range(41)]
        report = dominance_check(pop, z, z_prime, beta_grid=grid, tolerance=tolerance)
        margin = min(report.worst_margins.values())
        result.record(margin, tolerance, f"seed {seed}")
    return result


def random_spec(rng: np.random.Generator, objective: str, metric: str) -> OptimizationSpec:
    """A parameter draw that keeps the program feasible for the zero policy."""
    tau_u = F(int(rng.integers(3, 9)), 10)
    tau_l = tau_u - F(int(rng.integers(1, 4)), 10)
    eps = [F(0), F(1, 20), F(1, 4), F(1)][rng.integers(4)]
    t_i = [F(-1), F(0)][rng.integers(2)]
    t_u = [F(-1), F(0)][rng.integers(2)]
    return OptimizationSpec(
        objective=objective,
        fairness_metric=metric,
        eps=eps,
        t_i=t_i,
        t_u=t_u,
        impact_params=ImpactParams(tau_u, max(tau_l, F(0))),
        lambda_u=F(int(rng.integers(0, 3))),
        lambda_i=F(int(rng.integers(0, 3))),
        lambda_beta=F(int(rng.integers(0, 3))),
    )


def suite_improve(
    seeds: int = 100,
    base_seed: int = 0,
    tolerance: float = 1e-8,
    objectives: tuple[str, ...] = OBJECTIVES,
    metrics: tuple[str, ...] = METRICS,
) -> SuiteResult:
    """OPT(z') beats OPT(z) for every program; matched-rate witness checks."""
    result = SuiteResult("improve", seeds)
    witness_failures = 0
    for i in range(seeds):
        seed = base_seed + i
        rng = np.random.default_rng(seed + 10_000)
        pop = _instance(seed, exact=True)
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 13 + 1)
        z_prime = random_refinement(pop, z, seed=seed * 13 + 2)
        specs = [random_spec(rng, obj, h) for obj in objectives for h in metrics]
        report = verify_improvement(pop, z, z_prime, specs, tolerance=tolerance)
        for comparison in report.comparisons:
            label = f"seed {seed} {comparison.spec.objective}/{comparison.spec.fairness_metric}"
            result.record(
                0.0 if comparison.margin is None else comparison.margin, tolerance, label
            )
            if comparison.witness is not None and not comparison.witness.ok:
                witness_failures += 1
                result.failures.append(f"{label}: witness violated")
    result.details["witness_failures"] = witness_failures
    return result


def suite_merge(seeds: int = 200, base_seed: int = 0, tolerance: float = 1e-10) -> SuiteResult:
    """Merge refines both inputs and achieves the guaranteed information gain."""
    result = SuiteResult("merge", seeds)
    for i in range(seeds):
        seed = base_seed + i
        pop = _instance(seed, exact=True)
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 17 + 1)
        q = random_calibrated_predictor(pop, coarseness=3, seed=seed * 17 + 2)
        report = merge_oracle(pop, z, q, scopes=ALL)
        rho = report.result
        for base, label in ((z, "z"), (q, "q")):
            check = is_refinement(pop, base, rho, ALL, tolerance=tolerance)
            result.record(
                -float(check.max_deviation), tolerance, f"seed {seed} refines {label}"
            )
        stats = report.stats(ALL)
        result.record(
            float(stats.info_merged - stats.guaranteed_gain),
            tolerance,
            f"seed {seed} information gain",
        )
        # exact identity degenerations
        same = merge_oracle(pop, z, z, scopes=ALL).result
        if any(same.scores[c.id] != z(c) for c in pop.cells):
            result.failures.append(f"seed {seed}: merge(z, z) != z")
        trivial = constant_predictor(pop, base_rate(pop), "base")
        kept = merge_oracle(pop, z, trivial, scopes=ALL).result
        if any(kept.scores[c.id] != z(c) for c in pop.cells):
            result.failures.append(f"seed {seed}: merge(z, const) != z")
        result.checks += 2
    return result


def _crossed_true_means(
    pop: Population, z: Predictor, q: Predictor
) -> dict[tuple, Fraction]:
    means: dict[tuple, Fraction] = {}
    for (v, u), cells in _crossed(pop, z, q).items():
        total = sum(c.mass for c in cells)
        means[(v, u)] = sum(c.mass * c.p_star for c in cells) / total
    return means


def _crossed(pop: Population, z: Predictor, q: Predictor):
    out: dict[tuple, list] = {}
    for c in pop.cells:
        out.setdefault((z(c), q(c)), []).append(c)
    return out


def samples_test_instance(seed: int) -> tuple[Population, Predictor, Predictor]:
    """Eight equal-mass cells (density 1/8 > gamma) under two 2-level predictors."""
    from .population import Cell

    rng = np.random.default_rng(seed)
    cells = []
    for i in range(8):
        p = F(int(rng.integers(0, 33)), 32)
        group = Group.A if i < 4 else Group.B
        cells.append(Cell(f"c{i}", F(1, 8), group, p))
    pop = Population(cells)
    z = random_calibrated_predictor(pop, coarseness=2, seed=seed + 1, scopes=(ALL,), name="z")
    q_scores = {}
    for parity in (0, 1):
        members = [c for c in pop.cells if int(c.id[1]) % 2 == parity]
        total = sum(c.mass for c in members)
        value = sum(c.mass * c.p_star for c in members) / total
        for c in members:
            q_scores[c.id] = value
    q = Predictor("q", q_scores)
    return pop, z, q


def suite_samples(
    trials: int = 200,
    base_seed: int = 0,
    alpha: float = 0.1,
    gamma: float = 0.1,
    delta: float = 0.05,
    accept_fraction: float = 0.93,
) -> SuiteResult:
    """Empirical check of the sample-complexity bound for merge queries.

    Each trial draws the budgeted number of outcome samples and requires every
    crossed-cell empirical mean to land within alpha/2 of the truth; the bound
    promises success probability at least 1 - delta, tested against a binomial
    acceptance threshold.
    """
    result = SuiteResult("samples", trials)
    budget = SampleBudget(alpha=alpha, gamma=gamma, delta=delta)
    successes = 0
    for i in range(trials):
        seed = base_seed + i
        pop, z, q = samples_test_instance(seed * 3 + 1)
        truth = _crossed_true_means(pop, z, q)
        counts = draw_sample_counts(pop, budget.m, seed=seed * 3 + 2)
        report = merge_from_samples(z, q, counts, budget)
        worst = max(
            abs(e.mean - float(truth[(e.z_value, e.q_value)]))
            for e in report.cell_estimates
        )
        if worst < alpha / 2:
            successes += 1
        result.checks += 1
    fraction = successes / trials
    result.details.update(
        {"m": budget.m, "per_cell": budget.per_cell_samples(), "success_fraction": fraction}
    )
    if fraction < accept_fraction:
        result.failures.append(
            f"success fraction {fraction:.3f} below acceptance threshold {accept_fraction}"
        )
    result.worst_margin = fraction - accept_fraction
    return result


def suite_sweep_cross(
    seeds: int = 500, base_seed: int = 0, tolerance: float = 1e-7
) -> SuiteResult:
    """Simplex objective values agree with the selection-rate sweep oracle."""
    result = SuiteResult("sweep_cross", seeds)
    pairs = [(obj, h) for obj in OBJECTIVES for h in METRICS]
    for i in range(seeds):
        seed = base_seed + i
        rng = np.random.default_rng(seed + 50_000)
        pop = _instance(seed, exact=bool(seed % 2))
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 19 + 1)
        obj, h = pairs[i % len(pairs)]
        spec = random_spec(rng, obj, h)
        by_lp = solve_optimization(pop, z, spec)
        by_sweep = solve_by_sweep(pop, z, spec)
        context = f"seed {seed} {obj}/{h}"
        if by_lp.status != by_sweep.status:
            result.failures.append(
                f"{context}: status mismatch {by_lp.status} vs {by_sweep.status}"
            )
            result.checks += 1
            continue
        if by_lp.status == "optimal":
            gap = abs(float(by_lp.value) - float(by_sweep.value))
            result.record(-gap, tolerance, context)
        else:
            result.checks += 1
    return result


def suite_cost(seeds: int = 50, base_seed: int = 0, tolerance: float = 1e-8) -> SuiteResult:
    """Cost of fairness never grows under refinement (utility program, eps=0)."""
    result = SuiteResult("cost", seeds)
    for i in range(seeds):
        seed = base_seed + i
        rng = np.random.default_rng(seed + 90_000)
        pop = _instance(seed, exact=True)
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 23 + 1)
        z_prime = random_refinement(pop, z, seed=seed * 23 + 2)
        tau_u = F(int(rng.integers(3, 9)), 10)
        spec = OptimizationSpec(
            "utility",
            "beta",
            eps=F(0),
            t_i=F(0),
            impact_params=ImpactParams(tau_u, max(tau_u - F(1, 5), F(0))),
        )
        base = cost_of_fairness(pop, z, spec)
        refined = cost_of_fairness(pop, z_prime, spec)
        context = f"seed {seed}"
        if base.cost is None or refined.cost is None:
            infeasible_pair = base.cost is None and refined.cost is None
            if base.cost is None and refined.cost is not None:
                pass  # refinement recovered feasibility: cost dropped from +inf
            elif not infeasible_pair:
                result.failures.append(f"{context}: refinement lost feasibility")
            result.checks += 1
            continue
        result.record(float(base.cost - refined.cost), tolerance, context)
        result.record(float(base.cost), tolerance, f"{context} nonneg base")
        result.record(float(refined.cost), tolerance, f"{context} nonneg refined")
    return result


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "identities": suite_identities,
    "improv": suite_improv,
    "improve": suite_improve,
    "merge": suite_merge,
    "samples": suite_samples,
    "sweep": suite_sweep_cross,
    "cost": suite_cost,
}


def run_suite(name: str, seeds: Optional[int] = None, base_seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    fn = SUITES[name]
    if seeds is None:
        return fn(base_seed=base_seed)
    if name == "samples":
        return fn(trials=seeds, base_seed=base_seed)
    return fn(seeds=seeds, base_seed=base_seed)
