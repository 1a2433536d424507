"""Fairness-constrained selection and the value of refining predictions.

Reproduces the cautionary two-group instance: equally risky groups, unequal
score informativeness.  Solves the parity-constrained utility program, shows
the cost of fairness, then refines the uninformative group's scores and
watches every program improve.
"""

from fractions import Fraction as F

from fairinfo import (
    cost_of_fairness,
    solve_by_sweep,
    solve_optimization,
    verify_improvement,
)
from fairinfo.optimize import OptimizationSpec
from fairinfo.policy import ImpactParams
from fairinfo.population import Group, Predictor
from fairinfo.synth import caution_calibration_instance

pop, z, tau = caution_calibration_instance()
params = ImpactParams(tau_u=tau, tau_l=F(1, 2), require_risk_aversion=True)

print("== the instance ==")
print(f"group masses: A={float(pop.scope_mass(Group.A))}, B={float(pop.scope_mass(Group.B))}")
print("scores: A in {0,1} (perfect), B flat 0.5; both groups half qualified")

print("\n== unconstrained vs parity-constrained utility ==")
unconstrained = OptimizationSpec("utility", "beta", eps=1, t_i=-1, impact_params=params)
constrained = OptimizationSpec("utility", "beta", eps=0, t_i=-1, impact_params=params)
for label, spec in (("eps=1 (no parity)", unconstrained), ("eps=0 (parity)", constrained)):
    result = solve_optimization(pop, z, spec)
    rates = {g.value: float(s.beta) for g, s in result.threshold_stats.per_group.items()}
    print(f"{label}: value {float(result.value):.4f}, selection rates {rates}")
    cross = solve_by_sweep(pop, z, spec)
    assert abs(float(cross.value) - float(result.value)) < 1e-7  # oracle agreement

print("\n== cost of fairness ==")
strict = OptimizationSpec("utility", "beta", eps=0, t_i=0, impact_params=params)
before = cost_of_fairness(pop, z, strict)
print(f"U* = {float(before.u_star):.4f}, OPT(z) = {float(before.opt):.4f}, "
      f"cost = {float(before.cost):.4f}")

print("\n== refine group B's scores and re-solve everything ==")
refined = Predictor(
    "z_refined", {c.id: (c.p_star if c.group is Group.B else z(c)) for c in pop.cells}
)
after = cost_of_fairness(pop, refined, strict)
print(f"OPT(z') = {float(after.opt):.4f}, cost = {float(after.cost):.4f} (was "
      f"{float(before.cost):.4f})")

specs = [
    OptimizationSpec(objective, h, eps=F(1, 10), t_i=F(0), t_u=F(0), impact_params=params,
                     lambda_u=1, lambda_i=1, lambda_beta=1)
    for objective in ("utility", "disparity", "impact", "combo")
    for h in ("beta", "tpr", "fpr")
]
report = verify_improvement(pop, z, refined, specs)
print(f"\nall {len(report.comparisons)} program comparisons improve: {report.ok}")
for comparison in report.comparisons[:4]:
    spec = comparison.spec
    print(
        f"  {spec.objective:9s}/{spec.fairness_metric}: "
        f"OPT(z)={float(comparison.opt_base):.4f} -> "
        f"OPT(z')={float(comparison.opt_refined):.4f}"
    )
