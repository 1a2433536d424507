from fractions import Fraction as F

import pytest

from fairinfo.information import check_calibration, information_content
from fairinfo.policy import ImpactParams, ThresholdPolicy, evaluate
from fairinfo.population import ALL, Group, base_rate, dump_population
from fairinfo.refinement import is_refinement
from fairinfo.synth import (
    GeneratorParams,
    caution_calibration_instance,
    figure1_instance,
    groupwise_loss_instance,
    paper_instances,
    random_calibrated_predictor,
    random_population,
    random_refinement,
)


def test_figure1_exact_contents():
    pop, z, z_prime = figure1_instance()
    assert information_content(pop, z) == F(1, 6)
    assert information_content(pop, z_prime) == F(1, 3)
    assert information_content(pop, z_prime) - information_content(pop, z) == F(1, 6)
    assert base_rate(pop) == F(1, 2)
    assert check_calibration(pop, z, tolerance=0).is_calibrated
    assert check_calibration(pop, z_prime, tolerance=0).is_calibrated


def test_figure1_utility_window():
    pop, z, z_prime = figure1_instance()
    for tau in (F(27, 40), F(7, 10), F(29, 40)):  # inside (2/3, 3/4)
        policy = ThresholdPolicy({Group.A: (tau, 0)})
        params = ImpactParams(tau, F(1, 2))
        u_z = evaluate(pop, z, policy, params).utility
        u_zp = evaluate(pop, z_prime, policy, params).utility
        assert u_z > u_zp
        assert u_zp == 0
    assert evaluate(
        pop, z, ThresholdPolicy({Group.A: (F(7, 10), 0)}), ImpactParams(F(7, 10), F(1, 2))
    ).utility == F(1, 50)


def test_caution_instance_properties():
    pop, z, tau = caution_calibration_instance()
    assert tau == F(7, 10)
    assert pop.scope_mass(Group.A) > pop.scope_mass(Group.B)  # A is the majority
    assert base_rate(pop, Group.B) == F(1, 2)
    assert base_rate(pop, Group.A) == F(1, 2)  # identical true risk profiles
    assert information_content(pop, z, Group.A) == 1
    assert information_content(pop, z, Group.B) == 0
    for g in (Group.A, Group.B):
        assert check_calibration(pop, z, g, tolerance=0).is_calibrated


def test_groupwise_instance_phenomenon():
    pop, z, z_prime = groupwise_loss_instance()
    for g in (Group.A, Group.B):
        assert check_calibration(pop, z, g, tolerance=0).is_calibrated
        assert check_calibration(pop, z_prime, g, tolerance=0).is_calibrated
    assert is_refinement(pop, z, z_prime, ALL, tolerance=0).is_refinement
    assert not is_refinement(pop, z, z_prime, Group.A, tolerance=1e-12).is_refinement
    assert information_content(pop, z_prime, Group.A) < information_content(pop, z, Group.A)


def test_generators_deterministic():
    params = GeneratorParams(seed=77, exact=True)
    one = random_population(params)
    two = random_population(params)
    assert dump_population(one) == dump_population(two)
    z1 = random_calibrated_predictor(one, coarseness=3, seed=5)
    z2 = random_calibrated_predictor(two, coarseness=3, seed=5)
    assert z1.scores == z2.scores
    r1 = random_refinement(one, z1, seed=6)
    r2 = random_refinement(two, z2, seed=6)
    assert r1.scores == r2.scores


@pytest.mark.parametrize("seed", range(30))
def test_generated_predictors_calibrated_everywhere(seed):
    pop = random_population(GeneratorParams(seed=seed, exact=True))
    z = random_calibrated_predictor(pop, coarseness=3, seed=seed + 1)
    z_prime = random_refinement(pop, z, seed=seed + 2)
    for scope in (Group.A, Group.B, ALL):
        assert check_calibration(pop, z, scope, tolerance=1e-12).is_calibrated
        assert check_calibration(pop, z_prime, scope, tolerance=1e-12).is_calibrated
    for g in (Group.A, Group.B):
        assert is_refinement(pop, z, z_prime, g, tolerance=0).is_refinement
        assert 0 < base_rate(pop, g) < 1  # nondegenerate groups by construction


@pytest.mark.parametrize("seed", range(10))
def test_refinement_information_never_drops(seed):
    pop = random_population(GeneratorParams(seed=seed, exact=True))
    z = random_calibrated_predictor(pop, coarseness=2, seed=seed + 30)
    z_prime = random_refinement(pop, z, seed=seed + 31)
    for g in (Group.A, Group.B):
        gain = information_content(pop, z_prime, g) - information_content(pop, z, g)
        assert gain >= 0
        split = any(z_prime(c) != z(c) for c in pop.scope_cells(g))
        changed_risk = any(
            z_prime(c1) != z_prime(c2)
            for c1 in pop.scope_cells(g)
            for c2 in pop.scope_cells(g)
            if z(c1) == z(c2)
        )
        if gain > 0:
            assert split and changed_risk


def test_constant_coarseness_is_base_rate():
    pop = random_population(GeneratorParams(seed=2, exact=True))
    z = random_calibrated_predictor(pop, coarseness=1, seed=3)
    for g in (Group.A, Group.B):
        values = {z(c) for c in pop.scope_cells(g)}
        assert values == {base_rate(pop, g)}


def test_excess_coarseness_warns_and_clamps():
    pop = random_population(GeneratorParams(seed=2, n_cells=2, exact=True))
    with pytest.warns(UserWarning, match="clamp"):
        z = random_calibrated_predictor(pop, coarseness=10, seed=3)
    for g in (Group.A, Group.B):
        assert len({z(c) for c in pop.scope_cells(g)}) <= 2


def test_paper_instances_exported():
    instances = paper_instances()
    assert set(instances) == {"figure1", "caution", "groupwise"}
    for name, (pop, predictors) in instances.items():
        text = dump_population(pop, predictors)
        assert '"cells"' in text


def test_generator_param_validation():
    with pytest.raises(ValueError):
        GeneratorParams(seed=0, n_cells=0)
    with pytest.raises(ValueError):
        GeneratorParams(seed=0, group_split=0)
    with pytest.raises(ValueError):
        GeneratorParams(seed=0, p_spread=2)
