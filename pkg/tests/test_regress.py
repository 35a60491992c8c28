import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import least_squares

from geyserpredict.errors import DegenerateDesign, NonConvergenceWarning
from geyserpredict.prep import IntervalPair
from geyserpredict.regress import (
    FitOptions,
    RegressionModel,
    fit_exponential,
    fit_linear,
    fit_sigmoid,
    initial_models,
    predict,
    predict_many,
    sse_of,
)

import oracles


def pairs_of(x, y):
    return [IntervalPair(float(a), float(b), i) for i, (a, b) in enumerate(zip(x, y))]


def sigmoid(x, L, k, x0, y0):
    return y0 + L / (1.0 + np.exp(-k * (x - x0)))


def test_linear_two_points():
    m = fit_linear(pairs_of([0, 1], [1, 3]))
    assert m.params == pytest.approx((2.0, 1.0), abs=1e-15)
    assert m.sse == pytest.approx(0.0, abs=1e-24)


def test_linear_vertical_data_is_degenerate():
    with pytest.raises(DegenerateDesign):
        fit_linear(pairs_of([1, 1], [5, 7]))
    with pytest.raises(DegenerateDesign):
        fit_linear(pairs_of([1], [5]))


def test_linear_matches_hand_normal_equations():
    # n=4, sum x=6, sum y=5.8, sum x^2=14, sum xy=13.4 -> det 20
    # a = (4*13.4 - 6*5.8)/20 = 0.94, b = (14*5.8 - 6*13.4)/20 = 0.04
    m = fit_linear(pairs_of([0, 1, 2, 3], [0, 1, 2, 2.8]))
    assert m.params[0] == pytest.approx(0.94, rel=1e-12)
    assert m.params[1] == pytest.approx(0.04, rel=1e-12)
    resid = np.array([0, 1, 2, 2.8]) - (0.94 * np.arange(4) + 0.04)
    assert m.sse == pytest.approx(float(resid @ resid), rel=1e-12)


@given(st.lists(st.tuples(st.floats(1, 6), st.floats(30, 120)), min_size=2, max_size=40))
def test_linear_equals_exact_normal_equations(points):
    xs, ys = zip(*points)
    if len(set(xs)) < 2 or np.ptp(xs) < 1e-3:
        return
    a, b = oracles.normal_equations_line(xs, ys)
    m = fit_linear(pairs_of(xs, ys))
    scale = max(abs(float(b)), 1.0)
    assert m.params[0] == pytest.approx(float(a), rel=1e-9, abs=1e-9)
    assert m.params[1] == pytest.approx(float(b), rel=1e-9, abs=1e-9 * scale)


def test_exponential_recovers_generator():
    x = np.arange(5.0)
    m = fit_exponential(pairs_of(x, 2 * np.exp(0.5 * x) + 10))
    assert m.params == pytest.approx((2.0, 0.5, 10.0), rel=1e-6)
    assert m.sse < 1e-8
    assert m.converged


def test_exponential_constant_data():
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    m = fit_exponential(pairs_of(x, np.full(5, 7.0)))
    a, b, _ = m.params
    assert abs(a) < 1e-6 or abs(b) < 1e-6
    assert m.sse < 1e-12
    for xv in (0.5, 2.5, 6.0):
        assert predict(m, xv) == pytest.approx(7.0, abs=1e-6)


def test_exponential_needs_four_pairs():
    with pytest.raises(DegenerateDesign):
        fit_exponential(pairs_of([1, 2, 3], [1, 2, 4]))


def test_sigmoid_recovers_generator():
    x = np.linspace(0, 6, 9)
    m = fit_sigmoid(pairs_of(x, sigmoid(x, 35, 3, 3, 60)))
    assert m.params == pytest.approx((35.0, 3.0, 3.0, 60.0), rel=1e-5)
    assert m.sse < 1e-8


def test_sigmoid_decreasing_data_canonical_form():
    x = np.linspace(1, 6, 15)
    y = sigmoid(x, -30, 2.5, 3.5, 95)  # same curve as (30, -2.5, 3.5, 65)
    m = fit_sigmoid(pairs_of(x, y))
    L, k, x0, y0 = m.params
    assert L > 0
    assert (L, k, x0, y0) == pytest.approx((30.0, -2.5, 3.5, 65.0), rel=1e-5)


def _grid_oracle_sse(x, y):
    """Dense search over (k, x0); plateaus (L, y0) solved linearly for each."""
    best = math.inf
    for k in np.geomspace(0.5, 200, 120):
        for x0 in np.linspace(x.min(), x.max(), 201):
            with np.errstate(over="ignore"):
                s = 1.0 / (1.0 + np.exp(-k * (x - x0)))
            A = np.column_stack([s, np.ones_like(s)])
            coef = np.linalg.lstsq(A, y, rcond=None)[0]
            r = A @ coef - y
            best = min(best, float(r @ r))
    return best


def test_sigmoid_step_data_against_grid_oracle():
    x = np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 4.0, 4.5, 5.0, 5.5])
    y = np.where(x < 3, 60.0, 95.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        m = fit_sigmoid(pairs_of(x, y))
    assert m.sse <= _grid_oracle_sse(x, y) + 1e-9
    assert abs(predict(m, 1.0) - 60.0) < 0.5
    assert abs(predict(m, 5.0) - 95.0) < 0.5


def test_sigmoid_constant_y_is_degenerate():
    with pytest.raises(DegenerateDesign):
        fit_sigmoid(pairs_of([1, 2, 3, 4, 5], [70] * 5))


def test_sigmoid_needs_five_pairs():
    with pytest.raises(DegenerateDesign):
        fit_sigmoid(pairs_of([1, 2, 3, 4], [60, 61, 90, 95]))


def test_predict_examples():
    assert predict(RegressionModel("linear", (2, 1), 0, 2), 4) == 9
    assert predict(RegressionModel("exponential", (2, 0.5, 10), 0, 5), 0) == 12
    m = RegressionModel("sigmoidal", (35, 1e6, 3.0, 60), 0, 5)
    assert predict(m, 3.0) == 60 + 35 / 2


def test_predict_is_bitwise_pure():
    m = RegressionModel("sigmoidal", (35.1, 2.7, 3.01, 59.9), 1.0, 9)
    first = [predict(m, x) for x in np.linspace(1, 6, 50)]
    assert [predict(m, x) for x in np.linspace(1, 6, 50)] == first
    assert list(predict_many(m, np.linspace(1, 6, 50))) == first


def _noisy_bimodal(seed, n=120):
    rng = np.random.default_rng(seed)
    x = np.where(rng.random(n) < 0.3, rng.normal(2.0, 0.25, n), rng.normal(4.3, 0.3, n))
    y = sigmoid(x, 35, 3, 3, 60) + rng.normal(0, 5, n)
    return x, y


@pytest.mark.parametrize("fit,kind", [(fit_exponential, "exponential"), (fit_sigmoid, "sigmoidal")])
def test_monotone_refinement(fit, kind):
    x, y = _noisy_bimodal(3)
    pairs = pairs_of(x, y)
    m = fit(pairs)
    for start in initial_models(kind, pairs):
        assert m.sse <= start.sse * (1 + 1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sigmoid_at_least_as_good_as_scipy(seed):
    x, y = _noisy_bimodal(seed)
    m = fit_sigmoid(pairs_of(x, y))
    best = math.inf
    for x0 in (2.5, 3.0, 3.5):
        res = least_squares(lambda p: sigmoid(x, *p) - y, [30, 2, x0, 60], method="lm")
        best = min(best, float(res.fun @ res.fun))
    assert m.sse <= best * (1 + 1e-8)


def test_exponential_at_least_as_good_as_scipy():
    x, y = _noisy_bimodal(5)
    m = fit_exponential(pairs_of(x, y))
    best = math.inf
    for b in (-1.0, -0.3, 0.3, 1.0):
        res = least_squares(lambda p: p[0] * np.exp(p[1] * x) + p[2] - y, [1.0, b, 60.0], method="lm")
        best = min(best, float(res.fun @ res.fun))
    assert m.sse <= best * (1 + 1e-8)


def test_iteration_cap_warns_and_returns_best_so_far():
    x, y = _noisy_bimodal(4)
    pairs = pairs_of(x, y)
    with pytest.warns(NonConvergenceWarning):
        m = fit_sigmoid(pairs, FitOptions(max_iterations=1, multistart_count=2))
    assert not m.converged
    assert m.sse <= min(s.sse for s in initial_models("sigmoidal", pairs, FitOptions(multistart_count=2)))


def test_fit_options_must_be_positive():
    with pytest.raises(ValueError):
        FitOptions(multistart_count=0)


def test_model_invariants():
    with pytest.raises(ValueError):
        RegressionModel("quadratic", (1, 2, 3), 0, 3)
    with pytest.raises(ValueError):
        RegressionModel("linear", (1, math.nan), 0, 3)


def test_model_text_block_roundtrip():
    m = RegressionModel("sigmoidal", (35.123456789012345, 2.5, 3.0, 60.0), 123.456, 200)
    text = m.to_text()
    assert text.splitlines()[:3] == ["kind=sigmoidal", "L=35.123456789", "k=2.5"]
    back = RegressionModel.from_text(text)
    assert back.kind == m.kind and back.n == m.n
    assert back.params == pytest.approx(m.params, rel=1e-11)


def test_sse_field_is_sum_of_squares():
    x, y = _noisy_bimodal(7, n=60)
    for m in (fit_linear(pairs_of(x, y)), fit_exponential(pairs_of(x, y)), fit_sigmoid(pairs_of(x, y))):
        assert m.sse == pytest.approx(sse_of(m.kind, m.params, x, y), rel=1e-12)
        assert m.n == 60
