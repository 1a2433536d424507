import math
from fractions import Fraction as F

import numpy as np
import pytest

from fairinfo.information import check_calibration, information_content
from fairinfo.population import (
    ALL,
    Cell,
    Group,
    Population,
    Predictor,
    base_rate,
    bayes_predictor,
    constant_predictor,
)
from fairinfo.refinement import (
    SampleBudget,
    UndersampledError,
    draw_sample_counts,
    draw_sample_stream,
    eta_merge_counter,
    feature_informativeness,
    feature_predictor,
    is_refinement,
    merge_from_samples,
    merge_oracle,
    parse_sample_stream,
    refinement_distance,
)
from fairinfo.synth import (
    GeneratorParams,
    figure1_instance,
    groupwise_loss_instance,
    random_calibrated_predictor,
    random_population,
    random_refinement,
)


@pytest.fixture
def fig1():
    return figure1_instance()


# --- refinement checks ------------------------------------------------------


def test_bayes_refines_every_calibrated_predictor(fig1):
    pop, z, z_prime = fig1
    for candidate in (z, z_prime):
        check = is_refinement(pop, candidate, bayes_predictor(pop), tolerance=0)
        assert check.is_refinement


def test_self_refinement(fig1):
    pop, z, _ = fig1
    assert is_refinement(pop, z, z, tolerance=0).is_refinement


def test_groupwise_instance_fails_on_group_a():
    pop, z, z_prime = groupwise_loss_instance()
    assert is_refinement(pop, z, z_prime, ALL, tolerance=0).is_refinement
    check_a = is_refinement(pop, z, z_prime, Group.A, tolerance=1e-12)
    assert not check_a.is_refinement
    assert information_content(pop, z_prime, Group.A) < information_content(pop, z, Group.A)


# --- refinement distance ----------------------------------------------------


def test_distance_to_bayes_is_zero(fig1):
    pop, z, _ = fig1
    assert refinement_distance(pop, z, bayes_predictor(pop)) == 0


def test_figure1_distance_asymmetry(fig1):
    pop, z, _ = fig1
    q = constant_predictor(pop, F(1, 2), "half")  # calibrated: base rate 1/2
    assert refinement_distance(pop, z, q) == F(1, 5)
    assert refinement_distance(pop, q, z) == 0


def test_distance_zero_iff_refinement_rational():
    for seed in range(10):
        pop = random_population(GeneratorParams(seed=seed, exact=True))
        z = random_calibrated_predictor(pop, coarseness=2, seed=seed + 100)
        z_prime = random_refinement(pop, z, seed=seed + 200)
        for scope in (Group.A, Group.B):
            d = refinement_distance(pop, z, z_prime, scope)
            check = is_refinement(pop, z, z_prime, scope, tolerance=0)
            assert (d == 0) == check.is_refinement
            assert d == 0


# --- merge -------------------------------------------------------------------


def test_merge_with_self_is_identity(fig1):
    pop, z, _ = fig1
    merged = merge_oracle(pop, z, z, scopes=ALL).result
    assert all(merged(c) == z(c) for c in pop.cells)


def test_merge_with_base_rate_constant_is_identity(fig1):
    pop, z, _ = fig1
    trivial = constant_predictor(pop, base_rate(pop), "base")
    report = merge_oracle(pop, z, trivial, scopes=ALL)
    assert all(report.result(c) == z(c) for c in pop.cells)
    assert report.stats(ALL).distance_qz == 0  # z already refines the constant


def test_merge_figure1_with_feature(fig1):
    pop, z, _ = fig1
    # feature splitting the v=1/3 level set into p*-means 0 and 1/2 (masses 1/5 and 2/5)
    phi = lambda cid: cid != "x1"
    q = feature_predictor(pop, phi, scopes=ALL, name="q_phi")
    report = merge_oracle(pop, z, q, scopes=ALL)
    rho = report.result
    assert set(rho.scores.values()) == {F(0), F(1, 2), F(3, 4)}
    # information computed two ways: report formula vs brute force over cells
    brute = 1 - 4 * sum(c.mass * rho(c) * (1 - rho(c)) for c in pop.cells)
    assert report.stats(ALL).info_merged == brute
    assert check_calibration(pop, rho, tolerance=0).is_calibrated
    for base in (z, q):
        assert is_refinement(pop, base, rho, tolerance=0).is_refinement
    stats = report.stats(ALL)
    assert stats.info_merged >= stats.guaranteed_gain


@pytest.mark.parametrize("seed", range(15))
def test_merge_theorem_randomized(seed):
    pop = random_population(GeneratorParams(seed=seed, exact=True))
    z = random_calibrated_predictor(pop, coarseness=3, seed=seed * 31 + 1)
    q = random_calibrated_predictor(pop, coarseness=3, seed=seed * 31 + 2)
    report = merge_oracle(pop, z, q, scopes=ALL)
    stats = report.stats(ALL)
    assert is_refinement(pop, z, report.result, tolerance=0).is_refinement
    assert is_refinement(pop, q, report.result, tolerance=0).is_refinement
    assert stats.info_merged >= stats.guaranteed_gain
    assert stats.eta == min(stats.distance_qz, stats.distance_zq)


def test_merge_symmetry(fig1):
    pop, z, _ = fig1
    q = feature_predictor(pop, lambda cid: cid in ("x5", "x6"), scopes=ALL)
    forward = merge_oracle(pop, z, q, scopes=ALL).result
    backward = merge_oracle(pop, q, z, scopes=ALL).result
    assert all(forward(c) == backward(c) for c in pop.cells)


def test_per_group_merge_refines_per_group():
    pop = random_population(GeneratorParams(seed=3, exact=True))
    z = random_calibrated_predictor(pop, coarseness=2, seed=11)
    q = random_calibrated_predictor(pop, coarseness=2, seed=12)
    report = merge_oracle(pop, z, q, scopes=(Group.A, Group.B))
    for g in (Group.A, Group.B):
        assert check_calibration(pop, report.result, g, tolerance=0).is_calibrated
        assert is_refinement(pop, z, report.result, g, tolerance=0).is_refinement
        assert is_refinement(pop, q, report.result, g, tolerance=0).is_refinement


# --- sample mode -------------------------------------------------------------


def test_sample_budget_validates():
    with pytest.raises(ValueError):
        SampleBudget(alpha=0, gamma=0.1, delta=0.1)
    budget = SampleBudget(alpha=0.1, gamma=0.1, delta=0.05)
    assert budget.m >= budget.per_cell_samples()


def test_parse_sample_stream():
    counts = parse_sample_stream(["a,1", "a,0", "b,1", "", "a,1"])
    assert counts == {"a": (3, 2), "b": (1, 1)}
    with pytest.raises(ValueError, match="line 1"):
        parse_sample_stream(["a;1"])


def test_deterministic_population_exact_recovery():
    pop = Population(
        [
            Cell("n", F(1, 2), Group.A, F(0)),
            Cell("p", F(1, 2), Group.A, F(1)),
        ]
    )
    z = bayes_predictor(pop)
    q = constant_predictor(pop, F(1, 2), "q")
    budget = SampleBudget(alpha=0.25, gamma=0.4, delta=0.1, m=64)
    counts = draw_sample_counts(pop, 64, seed=5)
    report = merge_from_samples(z, q, counts, budget)
    assert report.estimated
    for est in report.cell_estimates:
        assert est.mean == float(est.z_value)  # outcomes are deterministic
        assert est.snapped == est.z_value


def test_undersampled_cell_is_an_error():
    pop = Population(
        [
            Cell("n", F(1, 2), Group.A, F(0)),
            Cell("p", F(1, 2), Group.A, F(1)),
        ]
    )
    z = bayes_predictor(pop)
    q = constant_predictor(pop, F(1, 2), "q")
    budget = SampleBudget(alpha=0.25, gamma=0.4, delta=0.1, m=4)
    with pytest.raises(UndersampledError, match="no samples"):
        merge_from_samples(z, q, {"n": (4, 0)}, budget)


def test_stream_and_counts_agree():
    pop = random_population(GeneratorParams(seed=9, exact=False))
    lines = list(draw_sample_stream(pop, 500, seed=4))
    assert len(lines) == 500
    counts = parse_sample_stream(lines)
    assert sum(n for n, _ in counts.values()) == 500
    assert all(k <= n for n, k in counts.values())


def test_single_cell_hoeffding_accuracy():
    pop = Population([Cell("c", 1, Group.A, F(3, 10))])
    z = constant_predictor(pop, F(3, 10), "z")
    q = constant_predictor(pop, F(3, 10), "q")
    alpha, delta = 0.1, 0.05
    t = SampleBudget(alpha=alpha, gamma=0.9, delta=delta).per_cell_samples()
    hits = 0
    trials = 200
    for seed in range(trials):
        counts = draw_sample_counts(pop, t, seed=seed)
        report = merge_from_samples(z, q, counts, SampleBudget(alpha, 0.9, delta, m=t))
        (est,) = report.cell_estimates
        hits += abs(est.mean - 0.3) < alpha / 2
    assert hits / trials >= 1 - delta


# --- feature predictors ------------------------------------------------------


def test_group_indicator_feature(four_cell_pop):
    group_of = {c.id: c.group for c in four_cell_pop.cells}
    phi = lambda cid: group_of[cid] is Group.A
    q = feature_predictor(four_cell_pop, phi, scopes=ALL)
    assert q.scores["a1"] == q.scores["a2"] == F(1, 2)
    assert q.scores["b1"] == q.scores["b2"] == F(1, 2)


def test_constant_feature_gives_base_rate(four_cell_pop):
    q = feature_predictor(four_cell_pop, lambda cid: True, scopes=ALL)
    assert set(q.scores.values()) == {base_rate(four_cell_pop)}
    assert feature_informativeness(four_cell_pop, lambda cid: True) == 0


def test_feature_split_means(four_cell_pop):
    phi = lambda cid: cid in ("a2", "b2")  # p* means: 0.2/0.4 vs 0.8/0.6
    q = feature_predictor(four_cell_pop, phi, scopes=ALL)
    assert q.scores["a1"] == F(3, 10)
    assert q.scores["a2"] == F(7, 10)
    assert feature_informativeness(four_cell_pop, phi) == F(2, 5)
    assert check_calibration(four_cell_pop, q, tolerance=0).is_calibrated


# --- eta-merge accounting -----------------------------------------------------


def test_eta_merge_single_gain():
    # crossing two orthogonal pairings: both refinement distances are exactly
    # 1/4, so the merge must gain at least 4 * (1/4)^2 = 1/4 (here: exactly).
    pop = Population(
        [
            Cell("c1", F(1, 4), Group.A, F(1)),
            Cell("c2", F(1, 4), Group.A, F(1, 2)),
            Cell("c3", F(1, 4), Group.A, F(1, 2)),
            Cell("c4", F(1, 4), Group.A, F(0)),
        ]
    )
    z = Predictor("z", {"c1": F(3, 4), "c2": F(3, 4), "c3": F(1, 4), "c4": F(1, 4)})
    q = Predictor("q", {"c1": F(3, 4), "c3": F(3, 4), "c2": F(1, 4), "c4": F(1, 4)})
    report = merge_oracle(pop, z, q, scopes=ALL)
    stats = report.stats(ALL)
    assert stats.distance_zq == F(1, 4)
    assert stats.distance_qz == F(1, 4)
    assert stats.eta == F(1, 4)
    assert stats.info_merged - stats.info_z == F(1, 4)
    audit = eta_merge_counter([report], eta=0.25)
    assert audit.count == 1
    assert audit.gains_ok
    assert audit.min_gain >= 4 * 0.25**2 - 1e-10


def test_eta_zero_counts_nothing(fig1):
    pop, z, _ = fig1
    trivial = constant_predictor(pop, base_rate(pop), "base")
    report = merge_oracle(pop, z, trivial, scopes=ALL)
    audit = eta_merge_counter([report], eta=0.0)
    assert audit.count == 0
    assert audit.within_bound


def test_eta_chain_bound():
    audit = eta_merge_counter([], eta=0.1)
    assert audit.bound == math.ceil(1 / 0.04) + 1 == 26


def test_merge_chain_stays_within_bound():
    pop = random_population(GeneratorParams(seed=21, n_cells=12, exact=True))
    current = constant_predictor(pop, base_rate(pop), "start")
    reports = []
    eta = 0.05
    rng = np.random.default_rng(0)
    ids = [c.id for c in pop.cells]
    for step in range(60):
        mask = {cid: bool(rng.integers(2)) for cid in ids}
        q = feature_predictor(pop, lambda cid: mask[cid], scopes=ALL, name=f"q{step}")
        report = merge_oracle(pop, current, q, scopes=ALL)
        if float(report.stats(ALL).eta) >= eta:
            reports.append(report)
            current = report.result.renamed(f"m{step}")
    audit = eta_merge_counter(reports, eta=eta)
    assert audit.within_bound
    assert audit.gains_ok
