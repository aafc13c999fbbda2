import numpy as np
import pytest

from nlkpp import (
    RegimeError,
    assemble,
    build_grid,
    limit_profile,
    make_kernel,
    principal_eigenpair,
    sample,
    solve_stationary,
)
from nlkpp.stationary import march

from conftest import standard_coef


def _check_solution(sol, op, a):
    av = np.asarray(a)
    th = sol.theta.values
    g = op.grid
    scale = (1 + np.abs(av).max()) ** 2
    assert th.min() >= 0
    assert th.max() <= max(av.max(), 0) + 1e-8
    lower = np.maximum(av - op.rate * op.p_sigma.values, 0)
    assert np.all(th >= lower - 1e-6)
    assert sol.residual <= 1e-8 * scale
    assert abs(g.weight * np.sum(th * (av - th))) <= 1e-8 * g.volume * scale


@pytest.mark.parametrize("c", [0.5, 3.0])
@pytest.mark.parametrize("sigma,m", [(0.1, 0), (1.0, 2), (10.0, 3)])
def test_constant_positive(c, sigma, m, uniform1d):
    g = build_grid(1.0, 60)
    op = assemble(g, uniform1d, sigma, m)
    sol = solve_stationary(op, np.full(g.size, c))
    assert sol.exists
    np.testing.assert_allclose(sol.theta.values, c, atol=1e-8)


def test_negative_constant_has_no_solution(uniform1d):
    g = build_grid(1.0, 60)
    sol = solve_stationary(assemble(g, uniform1d, 0.1, 0), np.full(g.size, -1.0))
    assert not sol.exists
    assert sol.lam == pytest.approx(1.0)
    assert np.all(sol.theta.values == 0)


def test_marching_and_newton_agree(uniform1d):
    g = build_grid(1.0, 800)
    op = assemble(g, uniform1d, 0.1, 0)
    a = sample(g, standard_coef)
    sol = solve_stationary(op, a)
    assert sol.exists
    assert sol.method_agreement <= 1e-8
    assert sol.theta.values.min() > 0
    _check_solution(sol, op, a.values)


@pytest.mark.parametrize("m", [0, 2])
@pytest.mark.parametrize("c", [-0.5, 0.5])
def test_persistence_dichotomy(c, m, uniform1d):
    g = build_grid(1.0, 160)
    op = assemble(g, uniform1d, 0.1, m)
    a = sample(g, lambda x: c + np.sin(2 * np.pi * x))
    lam = principal_eigenpair(op, a).lam
    sol = solve_stationary(op, a)
    assert sol.exists == (lam < 0)
    if sol.exists:
        assert sol.theta.values.max() > 1e-6
        _check_solution(sol, op, a.values)


@pytest.mark.parametrize("sigma,m", [(0.1, 0), (0.05, 2), (0.05, 3)])
def test_unique_from_sub_and_super(sigma, m, uniform1d):
    g = build_grid(1.0, int(round(16 / sigma)))
    op = assemble(g, uniform1d, sigma, m)
    a = sample(g, standard_coef)
    top = solve_stationary(op, a)
    phi = principal_eigenpair(op, a).phi.values
    bottom, info = march(op, a, 1e-3 * phi)
    assert np.max(np.abs(bottom - top.theta.values)) <= 1e-6
    _check_solution(top, op, a.values)


@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("sigma", [20, 50, 100])
def test_large_sigma_upper_bound(sigma, m, uniform1d):
    g = build_grid(1.0, 200)
    a = sample(g, lambda x: np.sin(2 * np.pi * x) + 0.3)
    sol = solve_stationary(assemble(g, uniform1d, sigma, m), a)
    assert np.all(sol.theta.values <= np.maximum(a.values, 0) + sigma ** -0.25 + 1e-6)


def test_limit_profiles_for_constant(uniform1d):
    g = build_grid(1.0, 50)
    for kind in ("a_plus", "v1", "v2", "abar"):
        np.testing.assert_allclose(limit_profile(kind, g, uniform1d, np.full(g.size, 1.3)).values, 1.3,
                                   atol=1e-10)


def test_abar_and_a_plus(uniform1d):
    g = build_grid(1.0, 400)
    a = sample(g, standard_coef)
    np.testing.assert_allclose(limit_profile("abar", g, uniform1d, a).values, 2.0, atol=1e-6)
    b = sample(g, lambda x: x - 0.5)
    np.testing.assert_array_equal(limit_profile("a_plus", g, uniform1d, b).values, np.maximum(b.values, 0))


def test_v2_grid_refinement():
    tri = make_kernel("triangular", 1)
    assert tri.diffusivity == pytest.approx(1 / 12)
    coarse_g, fine_g = build_grid(1.0, 800), build_grid(1.0, 1600)
    coarse = limit_profile("v2", coarse_g, tri, sample(coarse_g, standard_coef)).values
    fine = limit_profile("v2", fine_g, tri, sample(fine_g, standard_coef)).values
    assert coarse.min() > 0
    restricted = 0.5 * (fine[0::2] + fine[1::2])
    assert np.max(np.abs(restricted - coarse)) <= 1e-3


def test_regime_errors(uniform1d):
    g = build_grid(1.0, 50)
    with pytest.raises(RegimeError):
        limit_profile("v2", g, uniform1d, np.full(g.size, -1.0))
    with pytest.raises(RegimeError):
        limit_profile("abar", g, uniform1d, sample(g, lambda x: np.sin(2 * np.pi * x) - 0.1))


def test_sign_changing_coefficient(uniform1d):
    g = build_grid(1.0, 200)
    op = assemble(g, uniform1d, 0.1, 1)
    a = sample(g, lambda x: np.where(x < 0.4, -1.0, 2.0) * np.abs(np.sin(3 * x)) + 0.1)
    sol = solve_stationary(op, a)
    assert sol.exists
    _check_solution(sol, op, a.values)
