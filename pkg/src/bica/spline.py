"""Weighted natural cubic smoothing splines (the boosting weak learner).

The fit minimizes

    sum_l 0.5 * w_l * (b(x_l) - y_l)**2 + lam * integral(b''(t)**2 dt)

over natural cubic splines with a knot at every ``x_l``. It is solved in
Reinsch form: with ``alpha = 2 * lam``, the interior second derivatives
``gamma`` solve the pentadiagonal system ``(R + alpha Q^T W^-1 Q) gamma =
Q^T y`` and the fitted knot values are ``g = y - alpha W^-1 Q gamma``. Both
the solve and the smoother trace cost O(L).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import CalibrationFailed, InvalidData, InvalidDf

DF_TOL = 0.01
LAMBDA_RANGE = (1e-12, 1e12)


class _Design:
    """Band storage of ``Q`` and ``R`` for a fixed set of knots."""

    def __init__(self, knots):
        x = np.asarray(knots, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise InvalidData("need at least three knots")
        h = np.diff(x)
        if not np.all(h > 0):
            raise InvalidData("knots must be strictly increasing")
        self.knots = x
        self.h = h
        # column j of Q (interior knot j + 1) has entries on rows j, j+1, j+2
        self.q0 = 1.0 / h[:-1]
        self.q2 = 1.0 / h[1:]
        self.q1 = -self.q0 - self.q2
        self.r_diag = (h[:-1] + h[1:]) / 3.0
        self.r_off = h[1:-1] / 6.0

    @property
    def n(self):
        return self.knots.size

    def qt_dot(self, y):
        return self.q0 * y[:-2] + self.q1 * y[1:-1] + self.q2 * y[2:]

    def q_dot(self, gamma):
        out = np.zeros(self.n)
        out[:-2] += self.q0 * gamma
        out[1:-1] += self.q1 * gamma
        out[2:] += self.q2 * gamma
        return out

    def weighted_gram(self, winv):
        """Bands (diag, off1, off2) of ``Q^T diag(winv) Q``."""
        q0, q1, q2 = self.q0, self.q1, self.q2
        d0 = q0**2 * winv[:-2] + q1**2 * winv[1:-1] + q2**2 * winv[2:]
        d1 = q1[:-1] * q0[1:] * winv[1:-2] + q2[:-1] * q1[1:] * winv[2:-1]
        d2 = q2[:-2] * q0[2:] * winv[2:-2]
        return d0, d1, d2

    def factor(self, winv, alpha):
        """Upper Cholesky factor (LAPACK band layout) of ``R + alpha*M``."""
        d0, d1, d2 = self.weighted_gram(winv)
        k = self.n - 2
        ab = np.zeros((3, k))
        ab[2] = self.r_diag + alpha * d0
        ab[1, 1:] = self.r_off + alpha * d1
        ab[0, 2:] = alpha * d2
        return cholesky_banded(ab, lower=False), (d0, d1, d2)


def _inverse_bands(u):
    """Central five diagonals of ``(U^T U)^{-1}`` from its banded factor.

    Uses ``U Sigma = U^{-T}`` (lower triangular, diagonal ``1/U_ii``) and
    sweeps rows from the bottom up, touching only entries within the band.
    """
    k = u.shape[1]
    dg = u[2].tolist()
    e1 = u[1].tolist()  # e1[i + 1] = U[i, i + 1]
    e2 = u[0].tolist()  # e2[i + 2] = U[i, i + 2]
    s0 = [0.0] * k
    s1 = [0.0] * k  # s1[i] = Sigma[i, i + 1]
    s2 = [0.0] * k  # s2[i] = Sigma[i, i + 2]
    for i in range(k - 1, -1, -1):
        uii = dg[i]
        a = e1[i + 1] if i + 1 < k else 0.0
        b = e2[i + 2] if i + 2 < k else 0.0
        s11 = s0[i + 1] if i + 1 < k else 0.0
        s22 = s0[i + 2] if i + 2 < k else 0.0
        s12 = s1[i + 1] if i + 2 < k else 0.0
        v2 = -(a * s12 + b * s22) / uii
        v1 = -(a * s11 + b * s12) / uii
        s0[i] = (1.0 / uii - a * v1 - b * v2) / uii
        s1[i] = v1
        s2[i] = v2
    return np.array(s0), np.array(s1[:-1]), np.array(s2[:-2])


def _check_weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InvalidData(f"expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidData("weights must be finite and strictly positive")
    return w


def _df(design, winv, alpha):
    if alpha == 0.0:
        return float(design.n)
    u, (d0, d1, d2) = design.factor(winv, alpha)
    s0, s1, s2 = _inverse_bands(u)
    tr = np.dot(s0, d0) + 2.0 * np.dot(s1, d1) + 2.0 * np.dot(s2, d2)
    return float(design.n - alpha * tr)


def smoother_df(knots, weights, lam) -> float:
    """Trace of the smoother matrix for penalty ``lam``."""
    design = _Design(knots)
    w = _check_weights(weights, design.n)
    return _df(design, 1.0 / w, 2.0 * float(lam))


def calibrate_lambda(knots, weights, df_target, *, tol=DF_TOL, lam_init=None):
    """Find ``lam`` whose smoother trace is within ``tol`` of ``df_target``.

    Bisection on ``log(lam)``; ``lam_init`` (e.g. the previous boosting
    step's value) only seeds the bracket search.

    Returns
    -------
    lam : float
    df_actual : float
    """
    design = _Design(knots)
    n = design.n
    if not 2.0 < df_target <= n:
        raise InvalidDf(f"df must lie in (2, {n}], got {df_target}")
    w = _check_weights(weights, n)
    if df_target >= n - tol:
        return 0.0, float(n)
    winv = 1.0 / w
    span = design.knots[-1] - design.knots[0]
    scale = w.sum() * span**3
    u_min = math.log(LAMBDA_RANGE[0] * scale)
    u_max = math.log(LAMBDA_RANGE[1] * scale)

    def df_of(u):
        return _df(design, winv, 2.0 * math.exp(u))

    if lam_init is not None and lam_init > 0:
        u = min(max(math.log(lam_init), u_min), u_max)
        d = df_of(u)
        if abs(d - df_target) <= tol:
            return math.exp(u), d
        step = math.log(4.0)
        direction = 1.0 if d > df_target else -1.0
        a, da = u, d
        while True:
            b = a + direction * step
            b = min(max(b, u_min), u_max)
            db = df_of(b)
            if abs(db - df_target) <= tol:
                return math.exp(b), db
            if (db - df_target) * (da - df_target) < 0:
                break
            if b in (u_min, u_max):
                raise CalibrationFailed(
                    f"df={df_target} not reachable for lambda in {LAMBDA_RANGE} x {scale:.3g}"
                )
            a, da = b, db
            step *= 2.0
        lo, hi = (a, b) if a < b else (b, a)
    else:
        lo, hi = u_min, u_max
        d_lo, d_hi = df_of(lo), df_of(hi)
        if not d_hi <= df_target <= d_lo:
            raise CalibrationFailed(
                f"df={df_target} outside [{d_hi:.4f}, {d_lo:.4f}] over the lambda range"
            )

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d = df_of(mid)
        if abs(d - df_target) <= tol:
            return math.exp(mid), d
        if d > df_target:
            lo = mid
        else:
            hi = mid
    raise CalibrationFailed(f"bisection did not reach df={df_target} within {tol}")


@dataclass(frozen=True)
class SplineWeakLearner:
    """A fitted natural cubic spline, stored as knot values and second derivatives.

    Outside ``[knots[0], knots[-1]]`` the spline continues linearly.
    """

    knots: np.ndarray
    values: np.ndarray
    second: np.ndarray
    lam: float = 0.0
    df_actual: float = float("nan")

    def scaled(self, c: float) -> "SplineWeakLearner":
        return SplineWeakLearner(
            self.knots, c * self.values, c * self.second, self.lam, self.df_actual
        )

    def __call__(self, t):
        return eval_spline(self, t)

    def roughness(self) -> float:
        """``integral(b''**2)``, exact for the piecewise-linear second derivative."""
        h = np.diff(self.knots)
        g0, g1 = self.second[:-1], self.second[1:]
        return float(np.sum(h * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0))


def fit_weighted_spline(knots, weights, responses, lam, df_actual=None) -> SplineWeakLearner:
    """Penalized weighted least-squares natural cubic spline through all knots."""
    design = _Design(knots)
    n = design.n
    w = _check_weights(weights, n)
    y = np.asarray(responses, dtype=float)
    if y.shape != (n,):
        raise InvalidData(f"expected {n} responses, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InvalidData("responses contain non-finite values")
    if lam < 0:
        raise InvalidData(f"lambda must be >= 0, got {lam}")
    winv = 1.0 / w
    alpha = 2.0 * float(lam)
    u, _ = design.factor(winv, alpha)
    gamma = cho_solve_banded((u, False), design.qt_dot(y))
    g = y - alpha * winv * design.q_dot(gamma)
    second = np.concatenate(([0.0], gamma, [0.0]))
    if df_actual is None:
        s0, s1, s2 = _inverse_bands(u)
        d0, d1, d2 = design.weighted_gram(winv)
        tr = np.dot(s0, d0) + 2.0 * np.dot(s1, d1) + 2.0 * np.dot(s2, d2)
        df_actual = float(n - alpha * tr)
    return SplineWeakLearner(design.knots.copy(), g, second, float(lam), float(df_actual))


def eval_spline(learner: SplineWeakLearner, t):
    """Evaluate ``(b, b', b'')`` at ``t`` (scalar or array)."""
    x, g, gam = learner.knots, learner.values, learner.second
    t_arr = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t_arr).ravel()
    n = x.size
    i = np.clip(np.searchsorted(x, tt, side="right") - 1, 0, n - 2)
    h = x[i + 1] - x[i]
    g0, g1 = g[i], g[i + 1]
    c0, c1 = gam[i], gam[i + 1]
    slope = (g1 - g0) / h - h * (2.0 * c0 + c1) / 6.0
    cub = (c1 - c0) / (6.0 * h)
    # clamp to the knot range; the linear tails are added back below
    d = np.clip(tt, x[0], x[-1]) - x[i]
    b = g0 + d * (slope + d * (0.5 * c0 + d * cub))
    b1 = slope + d * (c0 + 3.0 * d * cub)
    b2 = c0 + d * (c1 - c0) / h
    outside = (tt < x[0]) | (tt > x[-1])
    if np.any(outside):
        b = b + np.where(outside, b1 * (tt - np.clip(tt, x[0], x[-1])), 0.0)
        b2 = np.where(outside, 0.0, b2)
    if t_arr.ndim == 0:
        return float(b[0]), float(b1[0]), float(b2[0])
    shape = t_arr.shape
    return b.reshape(shape), b1.reshape(shape), b2.reshape(shape)
