from fractions import Fraction as F

import pytest

from fairinfo.population import Cell, Group, Population, Predictor


@pytest.fixture
def four_cell_pop() -> Population:
    """Two groups with mass 0.5 each, exact rational data."""
    return Population(
        [
            Cell("a1", F(1, 4), Group.A, F(1, 5)),
            Cell("a2", F(1, 4), Group.A, F(4, 5)),
            Cell("b1", F(1, 4), Group.B, F(2, 5)),
            Cell("b2", F(1, 4), Group.B, F(3, 5)),
        ]
    )


@pytest.fixture
def four_cell_truth(four_cell_pop) -> Predictor:
    return Predictor("truth", {c.id: c.p_star for c in four_cell_pop.cells})
