import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlkpp import FitError, fit_rate
from nlkpp.ratefit import large_sigma_verdict, small_sigma_verdict

SIGMAS = [0.2, 0.1, 0.05, 0.025]


def test_exact_power_laws():
    fit = fit_rate([(s, 3 * s**2) for s in SIGMAS])
    assert abs(fit.slope - 2) <= 1e-10 and abs(fit.r2 - 1) <= 1e-10
    assert fit.constant == pytest.approx(3.0)
    assert fit_rate([(s, 5 * s**-3) for s in (20, 40, 80)]).slope == pytest.approx(-3, abs=1e-10)


def test_drops_nonpositive_errors():
    with pytest.warns(RuntimeWarning):
        fit = fit_rate([(0.1, 1e-2), (0.2, 4e-2), (0.4, 0.16), (0.8, 0.0)])
    assert len(fit.points) == 3
    with pytest.raises(FitError), pytest.warns(RuntimeWarning):
        fit_rate([(0.1, 1e-2), (0.2, 0.0), (0.4, -1.0)])
    with pytest.raises(FitError):
        fit_rate([(0.1, 1.0), (0.1, 2.0), (0.2, 3.0)])


def test_low_confidence_flag():
    fit = fit_rate([(1, 1.0), (2, 0.1), (3, 5.0), (4, 0.2)])
    assert fit.low_confidence


def test_verdicts():
    assert small_sigma_verdict(fit_rate([(s, s**1.7) for s in SIGMAS]), m=0)
    assert not small_sigma_verdict(fit_rate([(s, s**1.0) for s in SIGMAS]), m=0)
    assert large_sigma_verdict(fit_rate([(s, s**-2.5) for s in (20, 40, 80)]), m=1)
    assert not large_sigma_verdict(fit_rate([(s, s**-1.2) for s in (20, 40, 80)]), m=1)


points = st.lists(st.tuples(st.integers(-30, 30), st.floats(1e-8, 1e8)), min_size=3, max_size=8,
                  unique_by=lambda p: p[0]).map(lambda ps: [(2.0 ** (k / 4), e) for k, e in ps])


@given(points, st.floats(1e-6, 1e6))
def test_scaling_changes_intercept_only(pts, c):
    a = fit_rate(pts)
    b = fit_rate([(s, c * e) for s, e in pts])
    assert abs(a.slope - b.slope) <= 1e-12
    assert b.intercept == pytest.approx(a.intercept + np.log(c), abs=1e-8)


@given(points, st.randoms())
def test_permutation_invariance(pts, rnd):
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    a, b = fit_rate(pts), fit_rate(shuffled)
    assert a.slope == b.slope and a.intercept == b.intercept and a.r2 == b.r2
