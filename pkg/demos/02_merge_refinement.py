"""Combining information sources with the merge operation.

Shows refinement distances as a measure of how much two predictors disagree,
merges a score set with a single boolean feature, and estimates the same
merge from sampled outcomes instead of exact statistics.
"""

from fairinfo import (
    is_refinement,
    merge_from_samples,
    merge_oracle,
    refinement_distance,
)
from fairinfo.population import ALL, base_rate, constant_predictor
from fairinfo.refinement import SampleBudget, draw_sample_counts, feature_informativeness, feature_predictor
from fairinfo.synth import figure1_instance

pop, z, _ = figure1_instance()

print("== refinement distance is asymmetric ==")
flat = constant_predictor(pop, base_rate(pop), "flat")
print(f"D(z -> flat) = {refinement_distance(pop, z, flat)}   (z's levels, flat's means)")
print(f"D(flat -> z) = {refinement_distance(pop, flat, z)}   (z averages back to the base rate)")

print("\n== merging in a boolean feature ==")
# the feature isolates cell x1, splitting z's low level set into risk means 0 and 1/2
phi = lambda cell_id: cell_id != "x1"
print(f"marginal informativeness of the feature: {feature_informativeness(pop, phi)}")
q = feature_predictor(pop, phi, scopes=ALL, name="q_phi")
report = merge_oracle(pop, z, q, scopes=ALL)
stats = report.stats(ALL)
print(f"I(z) = {stats.info_z}, I(q) = {stats.info_q}")
print(f"distances: D(q->z) = {stats.distance_qz}, D(z->q) = {stats.distance_zq}")
print(f"merged support: {sorted(set(report.result.scores.values()))}")
print(f"I(merged) = {stats.info_merged} >= guaranteed {float(stats.guaranteed_gain):.4f}")
for base in (z, q):
    check = is_refinement(pop, base, report.result, tolerance=0)
    print(f"merged refines {base.name}: {check.is_refinement}")

print("\n== the same merge from sampled outcomes ==")
budget = SampleBudget(alpha=0.1, gamma=0.1, delta=0.05)
print(f"budget: {budget.per_cell_samples()} samples per crossed cell, {budget.m} total")
counts = draw_sample_counts(pop, budget.m, seed=0)
estimated = merge_from_samples(z, q, counts, budget)
for est in estimated.cell_estimates:
    print(
        f"  crossed cell (z={float(est.z_value):.3f}, q={float(est.q_value):.3f}): "
        f"{est.count} samples, mean {est.mean:.4f} -> grid {float(est.snapped):.2f}"
    )
exact_scores = sorted({float(v) for v in report.result.scores.values()})
estimated_scores = sorted({float(v) for v in estimated.result.scores.values()})
print(f"exact merge support     {exact_scores}")
print(f"estimated merge support {estimated_scores}")
