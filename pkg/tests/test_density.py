import math

import numpy as np
import pytest

from bica.density import (
    SourceDensityModel,
    boost_density,
    eval_density_model,
    loglik_from_values,
    modified_loglik,
    partition_sum,
)
from bica.errors import ModelDiverged
from bica.grid import build_grid
from bica.spline import fit_weighted_spline
from bica.synth import SourceSpec, gen_sources


def direct_loglik(fvals, q, step):
    return math.fsum(qi * fi - step * math.exp(fi) for qi, fi in zip(q, fvals))


def log_phi(t):
    return -0.5 * t * t - 0.5 * math.log(2 * math.pi)


def test_base_model_values():
    f, f1, f2 = eval_density_model(SourceDensityModel(), 0.0)
    assert f == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-15)
    assert f1 == 0.0 and f2 == -1.0


def test_m0_boost_is_gaussian(rng):
    res = boost_density(rng.standard_normal(2000), L=100, M=0)
    assert res.model.M == 0
    assert len(res.loglik_trace) == 1
    t = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(res.model(t)[0], [log_phi(v) for v in t], atol=1e-15)


def test_partition_sum_gaussian_span():
    grid = build_grid(np.array([-6.0, 6.0]), 500)
    assert partition_sum(SourceDensityModel(), grid) == pytest.approx(1.0, abs=1e-3)


def test_partition_sum_shift_doubles(rng):
    x = np.linspace(-5, 5, 40)
    grid = build_grid(rng.standard_normal(500), 200)
    shift = fit_weighted_spline(x, np.ones(40), np.full(40, math.log(2)), 1.0)
    model = SourceDensityModel([shift])
    base = partition_sum(SourceDensityModel(), grid)
    assert partition_sum(model, grid) == pytest.approx(2 * base, rel=1e-12)


def test_modified_loglik_direct_sum(rng):
    grid = build_grid(rng.standard_normal(10000), 500)
    got = modified_loglik(SourceDensityModel(), grid)
    oracle = direct_loglik([log_phi(v) for v in grid.values], grid.freqs, grid.step)
    assert got == pytest.approx(oracle, abs=1e-10)
    plug = math.fsum(qi * log_phi(v) for qi, v in zip(grid.freqs, grid.values)) - 1.0
    assert abs(got - plug) <= 0.05


def test_modified_loglik_ideal_fit(rng):
    grid = build_grid(rng.uniform(-1, 1, 5000), 50)
    q = grid.freqs
    f = np.log(q / grid.step)
    expect = math.fsum(qi * math.log(qi / grid.step) for qi in q) - 1.0
    assert loglik_from_values(f, grid) == pytest.approx(expect, abs=1e-12)


def test_constant_shift_optimum(rng):
    # d/dc [sum q (f+c) - e^c Z] at c=0 is 1 - Z; positive when Z < 1
    grid = build_grid(rng.standard_normal(3000), 200)
    f = -0.5 * grid.values**2 - 0.5 * math.log(2 * math.pi) - 0.3
    Z = grid.step * np.exp(f).sum()
    eps = 1e-6
    deriv = (loglik_from_values(f + eps, grid) - loglik_from_values(f - eps, grid)) / (2 * eps)
    assert deriv == pytest.approx(1.0 - Z, abs=1e-6)
    assert deriv > 0


def test_zero_learner_is_identity(rng):
    x = np.linspace(-4, 4, 30)
    zero = fit_weighted_spline(x, np.ones(30), np.zeros(30), 1e10)
    t = rng.uniform(-6, 6, 50)
    a = eval_density_model(SourceDensityModel([zero]), t)
    b = eval_density_model(SourceDensityModel(), t)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, atol=1e-9)


def test_uniform_first_learner_improves(rng):
    y = rng.uniform(-math.sqrt(3), math.sqrt(3), 10000)
    trace = boost_density(y, L=500, M=1, df=3).loglik_trace
    assert trace[1] >= trace[0]
    assert trace[1] > trace[0] + 1e-3


def test_gaussian_normalization(rng):
    res = boost_density(rng.standard_normal(10000), M=5)
    assert abs(partition_sum(res.model, res.grid) - 1.0) <= 0.05


def test_uniform_normalization(rng):
    res = boost_density(rng.uniform(-math.sqrt(3), math.sqrt(3), 10000), M=10)
    assert abs(partition_sum(res.model, res.grid) - 1.0) <= 0.05


@pytest.mark.parametrize("kind", ["uniform", "laplace", "gmm", "student_t"])
def test_monotone_trace(kind):
    y = gen_sources([SourceSpec(kind)], 3000, 4)[0]
    trace = boost_density(y, L=200, M=10).loglik_trace
    assert np.all(np.diff(trace) >= -1e-8)


def test_model_derivatives_finite_difference(rng):
    y = gen_sources([SourceSpec("gmm")], 5000, 2)[0]
    res = boost_density(y, L=300, M=5)
    lo, hi = res.grid.values[0], res.grid.values[-1]
    h = 1e-5 * (hi - lo)
    knots = res.grid.values
    t = rng.uniform(lo, hi, 400)
    # stay clear of knots so central differences see one cubic piece
    near = np.min(np.abs(t[:, None] - knots[None, :]), axis=1)
    t = t[near > 2 * h]
    f, f1, f2 = eval_density_model(res.model, t)
    fp, f1p, _ = eval_density_model(res.model, t + h)
    fm, f1m, _ = eval_density_model(res.model, t - h)
    s1 = np.maximum(np.abs(f1), 1e-3 * np.abs(f1).max())
    s2 = np.maximum(np.abs(f2), 1e-3 * np.abs(f2).max())
    assert np.max(np.abs((fp - fm) / (2 * h) - f1) / s1) <= 1e-5
    assert np.max(np.abs((f1p - f1m) / (2 * h) - f2) / s2) <= 1e-5


def test_derivative_additivity(rng):
    y = gen_sources([SourceSpec("laplace")], 4000, 9)[0]
    res = boost_density(y, L=200, M=4)
    t = rng.uniform(-2, 2, 30)
    total = np.array(eval_density_model(res.model, t))
    parts = np.array([-0.5 * t**2 - 0.5 * math.log(2 * math.pi), -t, -np.ones_like(t)])
    for learner in res.model.learners:
        parts += np.array(learner(t))
    np.testing.assert_allclose(total, parts, atol=1e-10)


def test_diverged_model_raises(rng):
    x = np.linspace(-3, 3, 20)
    huge = fit_weighted_spline(x, np.ones(20), np.full(20, 80.0), 1.0)
    grid = build_grid(rng.standard_normal(200), 50)
    with pytest.raises(ModelDiverged):
        partition_sum(SourceDensityModel([huge]), grid)
