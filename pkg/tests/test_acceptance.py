"""End-to-end acceptance criteria.

Each test prints one PASS/FAIL line so the suite doubles as a checklist;
tolerances and trial counts are pinned here, not configurable.
"""

import math
import time
from fractions import Fraction as F

from fairinfo.information import (
    empirical_log_likelihood,
    entropic_information_content,
    entropic_information_loss,
    expected_log_likelihood,
    information_content,
    information_loss,
)
from fairinfo.lp import solve as lp_solve
from fairinfo.policy import ImpactParams, ThresholdPolicy, evaluate
from fairinfo.population import ALL, Group, as_float_population, as_float_predictor, bayes_predictor
from fairinfo.refinement import is_refinement
from fairinfo.suites import (
    suite_cost,
    suite_identities,
    suite_improv,
    suite_improve,
    suite_merge,
    suite_samples,
    suite_sweep_cross,
)
from fairinfo.synth import (
    GeneratorParams,
    figure1_instance,
    groupwise_loss_instance,
    random_calibrated_predictor,
    random_population,
)

from oracles import best_vertex_value, random_box_lp


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"{status}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_figure1_reproduction():
    started = time.time()
    pop, z, z_prime = figure1_instance()
    ok = information_content(pop, z) == F(1, 6)
    ok &= information_content(pop, z_prime) == F(1, 3)
    ok &= information_content(pop, z_prime) > information_content(pop, z)

    fpop = as_float_population(pop)
    fz, fzp = as_float_predictor(z), as_float_predictor(z_prime)
    ok &= abs(information_content(fpop, fz) - 1 / 6) <= 1e-12
    ok &= abs(information_content(fpop, fzp) - 1 / 3) <= 1e-12

    tau = F(7, 10)
    policy = ThresholdPolicy({Group.A: (tau, 0)})
    params = ImpactParams(tau, F(1, 2))
    u_z = evaluate(pop, z, policy, params).utility
    u_zp = evaluate(pop, z_prime, policy, params).utility
    ok &= u_z == F(1, 50) and u_zp == 0

    elapsed = time.time() - started
    ok &= elapsed < 1.0
    report(
        "figure-1 reproduction (contents 1/6 and 1/3, utilities 0.02 vs 0)",
        bool(ok),
        f"{elapsed:.2f}s",
    )


def test_identity_suite_500():
    started = time.time()
    result = suite_identities(seeds=500, tolerance=1e-10)
    elapsed = time.time() - started
    report(
        "information-loss identity suite, variance and entropic, 500 seeds",
        result.ok and elapsed < 30,
        f"{result.checks} checks, worst {result.worst_margin:.2e}, {elapsed:.1f}s",
    )


def test_dominance_suite_200():
    result = suite_improv(seeds=200, tolerance=1e-10)
    report(
        "refinement dominance of TPR/FPR/PPV curves, 200 pairs",
        result.ok,
        f"{result.checks} pairs, worst margin {result.worst_margin:.2e}",
    )


def test_improvement_theorem_suite():
    started = time.time()
    result = suite_improve(seeds=100, tolerance=1e-8)
    elapsed = time.time() - started
    report(
        "program-value improvement under refinement, 100 seeds x 4 programs x 3 metrics",
        result.ok and elapsed < 300,
        f"{result.checks} comparisons, worst margin {result.worst_margin:.2e}, "
        f"witness failures {result.details['witness_failures']}, {elapsed:.1f}s",
    )


def test_merge_theorem_suite_200():
    result = suite_merge(seeds=200, tolerance=1e-10)
    report(
        "merge refines both inputs with guaranteed information gain, 200 seeds",
        result.ok,
        f"{result.checks} checks, worst margin {result.worst_margin:.2e}",
    )


def test_sample_complexity_bound():
    started = time.time()
    result = suite_samples(trials=200, alpha=0.1, gamma=0.1, delta=0.05, accept_fraction=0.93)
    elapsed = time.time() - started
    report(
        "sample-mode merge recovers all crossed-cell means within alpha/2",
        result.ok and elapsed < 120,
        f"success fraction {result.details['success_fraction']:.3f} with m={result.details['m']}, "
        f"{elapsed:.1f}s",
    )


def test_entropy_bounds_and_likelihood():
    # entropic content never exceeds variance content
    dominance_ok = True
    for seed in range(100):
        pop = random_population(GeneratorParams(seed=seed, exact=False))
        z = random_calibrated_predictor(pop, coarseness=3, seed=seed + 1)
        for scope in (Group.A, Group.B, ALL):
            gap = float(information_content(pop, z, scope)) - entropic_information_content(
                pop, z, scope
            )
            dominance_ok &= gap >= -1e-12
    report("entropic information content bounded by variance content", dominance_ok)

    # Pinsker sandwich on supports inside {0,1} plus [alpha, 1-alpha]
    sandwich_ok = True
    count = 0
    for alpha in (0.1, 0.25):
        for seed in range(100):
            pop = random_population(
                GeneratorParams(seed=seed, exact=False, p_spread=1 - 2 * alpha)
            )
            z = random_calibrated_predictor(
                pop, coarseness=3, seed=seed + 7, stratify_extremes=True
            )
            support = sorted(set(z.scores.values()))
            assert all(v in (0.0, 1.0) or alpha <= v <= 1 - alpha for v in support)
            ref = bayes_predictor(pop)
            for scope in (Group.A, Group.B, ALL):
                loss = float(information_loss(pop, ref, z, scope))
                ent = entropic_information_loss(pop, ref, z, scope)
                sandwich_ok &= loss <= 2 * math.log(2) * ent + 1e-10
                sandwich_ok &= 2 * math.log(2) * ent <= loss / alpha + 1e-10
                count += 1
    report("Pinsker sandwich on restricted supports", sandwich_ok, f"{count} checks")

    # expected log-likelihood: analytic identity and a Monte-Carlo cross-check
    pop = random_population(GeneratorParams(seed=11, exact=False))
    z = random_calibrated_predictor(pop, coarseness=3, seed=12)
    analytic = expected_log_likelihood(pop, z)
    identity_gap = abs(analytic - (entropic_information_content(pop, z) - 1))
    mean, stderr = empirical_log_likelihood(pop, z, draws=10**6, seed=13)
    mc_ok = abs(mean - analytic) <= 3 * stderr
    report(
        "expected log-likelihood equals entropic content minus one",
        identity_gap <= 1e-10 and mc_ok,
        f"identity gap {identity_gap:.1e}, MC deviation {abs(mean - analytic):.2e} "
        f"vs 3se={3 * stderr:.2e}",
    )


def test_solver_cross_validation():
    result = suite_sweep_cross(seeds=500, tolerance=1e-7)
    report(
        "simplex agrees with the selection-rate sweep oracle, 500 instances",
        result.ok,
        f"worst gap {-result.worst_margin:.2e}",
    )

    worst = 0.0
    mismatches = 0
    for seed in range(500):
        program = random_box_lp(seed)
        sol = lp_solve(program, exact=False)
        oracle = best_vertex_value(program)
        if oracle is None:
            mismatches += sol.status != "infeasible"
        elif sol.status != "optimal":
            mismatches += 1
        else:
            worst = max(worst, abs(sol.objective_value - oracle))
    report(
        "simplex agrees with brute-force vertex enumeration, 500 LPs",
        mismatches == 0 and worst <= 1e-9,
        f"worst gap {worst:.2e}",
    )


def test_groupwise_information_loss_instance():
    pop, z, z_prime = groupwise_loss_instance()
    overall = is_refinement(pop, z, z_prime, ALL, tolerance=0).is_refinement
    on_a = is_refinement(pop, z, z_prime, Group.A, tolerance=1e-12).is_refinement
    drop = information_content(pop, z, Group.A) - information_content(pop, z_prime, Group.A)
    report(
        "overall refinement that strictly loses group-A information",
        overall and not on_a and drop > 0,
        f"I_A drop {float(drop)}",
    )


def test_cost_of_fairness_monotone():
    result = suite_cost(seeds=50, tolerance=1e-8)
    report(
        "cost of fairness never grows under refinement, 50 seeds",
        result.ok,
        f"worst margin {result.worst_margin:.2e}",
    )
