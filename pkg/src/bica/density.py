"""Boosted nonparametric maximum-likelihood estimate of one source density.

The log-density ``f`` starts at the standard-normal log-density and is grown
by smoothing-spline weak learners, each fitted by one IRLS (Newton) step on
the modified log-likelihood ``sum_l q_l f(y_l) - step * exp(f(y_l))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelDiverged
from .grid import Grid, build_grid
from .spline import SplineWeakLearner, calibrate_lambda, eval_spline, fit_weighted_spline

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
F_CLAMP = 50.0
WEIGHT_FLOOR = 1e-10
MAX_HALVINGS = 10


@dataclass
class SourceDensityModel:
    """Gaussian base term plus a list of spline learners.

    ``learners`` hold their accepted (possibly step-halved) contribution.
    Learners fitted on the same knots are merged into one spline for
    evaluation, since natural splines on shared knots add coefficientwise.
    """

    learners: list = field(default_factory=list)

    @property
    def M(self) -> int:
        return len(self.learners)

    def __post_init__(self):
        self._merged = None

    def add(self, learner: SplineWeakLearner):
        self.learners.append(learner)
        self._merged = None

    def _merged_learners(self):
        if self._merged is None:
            merged = []
            for lr in self.learners:
                if merged and np.array_equal(merged[-1].knots, lr.knots):
                    prev = merged[-1]
                    merged[-1] = SplineWeakLearner(
                        prev.knots, prev.values + lr.values, prev.second + lr.second
                    )
                else:
                    merged.append(lr)
            self._merged = merged
        return self._merged

    def __call__(self, t):
        return eval_density_model(self, t)


def eval_density_model(model: SourceDensityModel, t):
    """Return ``(f, f', f'')`` at ``t``."""
    t_arr = np.asarray(t, dtype=float)
    f = -0.5 * t_arr**2 - LOG_SQRT_2PI
    f1 = -t_arr
    f2 = -np.ones_like(t_arr)
    for lr in model._merged_learners():
        b, b1, b2 = eval_spline(lr, t_arr)
        f = f + b
        f1 = f1 + b1
        f2 = f2 + b2
    if t_arr.ndim == 0:
        return float(f), float(f1), float(f2)
    return f, f1, f2


def _exp_clamped(f):
    fmax = np.max(f)
    if not np.isfinite(fmax) or fmax > F_CLAMP:
        raise ModelDiverged(f"log-density reached {fmax:.4g} (clamp {F_CLAMP})")
    return np.exp(f)


def loglik_from_values(f, grid: Grid) -> float:
    """Modified log-likelihood for log-density values ``f`` on the grid points."""
    return float(np.dot(grid.freqs, f) - grid.step * np.sum(_exp_clamped(f)))


def modified_loglik(model: SourceDensityModel, grid: Grid) -> float:
    """``sum_l q_l f(y_l) - step * exp(f(y_l))`` over the grid."""
    f, _, _ = eval_density_model(model, grid.values)
    return loglik_from_values(f, grid)


def partition_sum(model: SourceDensityModel, grid: Grid) -> float:
    """``sum_l step * exp(f(y_l))``; equals 1 at the likelihood optimum."""
    f, _, _ = eval_density_model(model, grid.values)
    return float(grid.step * np.sum(_exp_clamped(f)))


@dataclass
class BoostResult:
    model: SourceDensityModel
    grid: Grid
    loglik_trace: np.ndarray
    lambdas: list

    def __iter__(self):
        # allows ``model, trace = boost_density(...)``
        return iter((self.model, self.loglik_trace))


def boost_density(samples, L: int = 500, M: int = 5, df: float = 3.0, *,
                  grid: Grid | None = None, span=None, monotone: bool = True) -> BoostResult:
    """Fit ``f`` to ``samples`` with ``M`` boosting steps.

    Each step forms IRLS weights ``w_l = step * exp(f(y_l))`` (floored at
    ``1e-10 * max(w)``) and responses ``(q_l - w_l) / w_l``, fits a spline
    with ``df`` degrees of freedom, and adds it to ``f``. With ``monotone``
    the step is halved (up to 10 times, then dropped) whenever it would
    lower the modified log-likelihood. ``span`` is passed to
    :func:`build_grid`; a prebuilt ``grid`` takes precedence.
    """
    if grid is None:
        grid = build_grid(samples, L, span=span)
    y, q, step = grid.values, grid.freqs, grid.step
    model = SourceDensityModel()
    f = -0.5 * y**2 - LOG_SQRT_2PI
    trace = [loglik_from_values(f, grid)]
    # w^0 = step * phi(y); the k-th step multiplies by exp(b_{k-1}) for k >= 2
    w = step * np.exp(f)
    lambdas = []
    lam = None
    for _ in range(M):
        wf = np.maximum(w, WEIGHT_FLOOR * w.max())
        resp = (q - wf) / wf
        lam, df_act = calibrate_lambda(y, wf, df, lam_init=lam)
        learner = fit_weighted_spline(y, wf, resp, lam, df_actual=df_act)
        lambdas.append(lam)
        b = learner.values
        ll_old = trace[-1]
        scale = 1.0
        accepted = None
        for _ in range(MAX_HALVINGS + 1):
            try:
                ll_new = loglik_from_values(f + scale * b, grid)
            except ModelDiverged:
                if not monotone:
                    raise
                ll_new = -math.inf
            if not monotone or ll_new >= ll_old:
                accepted = scale
                break
            scale *= 0.5
        if accepted is None:
            trace.append(ll_old)
            continue
        if accepted != 1.0:
            learner = learner.scaled(accepted)
            b = learner.values
        model.add(learner)
        f = f + b
        w = w * np.exp(b)
        trace.append(ll_new)
    return BoostResult(model, grid, np.array(trace), lambdas)
