import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlkpp import ConfigurationError, Field, ResolutionError, ShapeError, build_grid, norm, sample


def test_nodes_are_cell_centres():
    g = build_grid([0, 1], 4)
    np.testing.assert_allclose(g.nodes, [0.125, 0.375, 0.625, 0.875])
    assert g.weight == 0.25
    g = build_grid(2.0, 2)
    np.testing.assert_allclose(g.nodes, [0.5, 1.5])
    assert g.weight == 1.0


def test_2d_grid():
    g = build_grid([(0, 1), (0, 1)], (3, 3))
    assert g.size == 9
    assert g.weight == pytest.approx(1 / 9)
    assert g.nodes.shape == (9, 2)
    assert g.weight * g.size == pytest.approx(g.volume, rel=1e-12)


@pytest.mark.parametrize("extent,n", [((1.0,), 7), ((2.5,), 333), ((1.0, 3.0), (5, 9))])
def test_total_weight_is_volume(extent, n):
    g = build_grid(extent, n)
    assert abs(g.weight * g.size - g.volume) <= 1e-12 * g.volume
    nodes = g.nodes.reshape(g.size, -1)
    assert np.all(nodes > 0) and np.all(nodes < np.array(extent))


@pytest.mark.parametrize("extent,n", [(0.0, 10), (-1.0, 10), (1.0, 1), (1.0, 2.5), ((1, 1, 1), 4)])
def test_bad_grids(extent, n):
    with pytest.raises(ConfigurationError):
        build_grid(extent, n)


def test_sample():
    g = build_grid(1.0, 2)
    np.testing.assert_array_equal(sample(g, lambda x: 3.0).values, [3.0, 3.0])
    g = build_grid(1.0, 4)
    np.testing.assert_allclose(sample(g, lambda x: x).values, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(sample(g, lambda x: np.maximum(x - 0.5, 0)).values, [0, 0, 0.125, 0.375])


def test_norm_examples():
    assert norm(sample(build_grid(1.0, 10), lambda x: 2.0), "L2") == pytest.approx(2.0)
    assert norm(sample(build_grid(2.0, 10), lambda x: -3.0), "L1") == pytest.approx(6.0)
    # int_0^1 x^2 = 1/3
    assert abs(norm(sample(build_grid(1.0, 1000), lambda x: x), "L2") - 1 / math.sqrt(3)) <= 1e-3
    assert norm(sample(build_grid(1.0, 4), lambda x: x - 1), "Linf") == pytest.approx(0.875)


def test_normalised_constant():
    g = build_grid(3.0, 17)
    assert abs(norm(sample(g, lambda x: g.volume ** -0.5), "L2") - 1.0) <= 1e-12


@given(st.floats(-1e3, 1e3).filter(lambda c: c == 0 or abs(c) > 1e-100), st.sampled_from(["L1", "L2", "Linf"]))
def test_norm_homogeneity(c, kind):
    g = build_grid(1.0, 16)
    f = sample(g, lambda x: np.sin(7 * x) + x)
    assert norm(c * f, kind) == pytest.approx(abs(c) * norm(f, kind), rel=1e-12, abs=1e-300)


def test_field_length_checked():
    g = build_grid(1.0, 4)
    with pytest.raises(ShapeError):
        Field(g, np.zeros(5))


def test_resolution_rule():
    g = build_grid(1.0, 39)
    with pytest.raises(ResolutionError) as info:
        g.check_resolution(0.1)
    assert info.value.required_n == 40
    build_grid(1.0, 40).check_resolution(0.1)
