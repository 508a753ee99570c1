import numpy as np
import pytest

from topoinf import Graph, LabelData, PolynomialFilter

TRIANGLE_EDGES = [(0, 1), (0, 2), (1, 2)]
TRIANGLE_LABELS = [0, 0, 1]


@pytest.fixture
def triangle():
    return Graph.from_edges(3, TRIANGLE_EDGES)


@pytest.fixture
def triangle_labels():
    return LabelData(2, TRIANGLE_LABELS)


@pytest.fixture
def walk_filter():
    """Pure one-step propagation: f = A_hat."""
    return PolynomialFilter((0.0, 1.0))


@pytest.fixture
def identity_filter():
    return PolynomialFilter((1.0,))


@pytest.fixture
def path4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def make_labels(c, hard):
    return LabelData(c, np.asarray(hard, dtype=np.int64))
