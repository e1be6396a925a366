"""Fixed-point (approximate Newton) updates of an orthonormal unmixing matrix."""
from __future__ import annotations

import numpy as np

from .density import SourceDensityModel, eval_density_model
from .errors import DegenerateUpdate, InvalidData
from .linalg import random_orthonormal, sym_decorrelate

NORM_TOL = 1e-12


def g0_contrast(u):
    """Derivatives of ``G0(u) = u**4 / 4``."""
    return u**3, 3.0 * u**2


def g1_contrast(u):
    """Derivatives of ``G1(u) = log(cosh(u))``."""
    t = np.tanh(u)
    return t, 1.0 - t * t


CONTRASTS = {"G0": g0_contrast, "G1": g1_contrast}


def contrast_derivatives(contrast, u):
    """``(g(u), g'(u))`` for a density model, a baseline name, or a callable."""
    if isinstance(contrast, SourceDensityModel):
        _, f1, f2 = eval_density_model(contrast, u)
        return f1, f2
    if isinstance(contrast, str):
        try:
            contrast = CONTRASTS[contrast]
        except KeyError:
            raise InvalidData(f"unknown contrast {contrast!r}") from None
    return contrast(u)


def fixed_point_update(W, whitened, contrasts) -> np.ndarray:
    """One sweep ``w_i <- E{x g_i(w_i^T x)} - E{g_i'(w_i^T x)} w_i``, then
    symmetric decorrelation of the stacked rows.

    ``contrasts`` is one contrast per row, or a single contrast shared by all
    rows.
    """
    W = np.asarray(W, dtype=float)
    x = np.asarray(whitened, dtype=float)
    m, n = x.shape
    if W.shape != (m, m):
        raise InvalidData(f"W has shape {W.shape}, data has {m} rows")
    if isinstance(contrasts, (str, SourceDensityModel)) or callable(contrasts):
        contrasts = [contrasts] * m
    if len(contrasts) != m:
        raise InvalidData(f"need {m} contrasts, got {len(contrasts)}")
    Y = W @ x
    new = np.empty_like(W)
    for i in range(m):
        g, dg = contrast_derivatives(contrasts[i], Y[i])
        new[i] = x @ g / n - dg.mean() * W[i]
    norms = np.linalg.norm(new, axis=1)
    bad = np.flatnonzero(norms < NORM_TOL)
    if bad.size:
        raise DegenerateUpdate(
            f"row(s) {bad.tolist()} collapsed to norm {norms[bad].max():.3g}; "
            "the contrast carries no non-Gaussian information"
        )
    return sym_decorrelate(new)


def convergence_gap(W_new, W_old) -> float:
    """``1 - min_i |(W_new W_old^T)_ii|``, insensitive to row sign flips."""
    return float(1.0 - np.min(np.abs(np.einsum("ij,ij->i", W_new, W_old))))


def fastica_baseline(whitened, kind: str = "G1", maxit: int = 20, seed: int = 0, *,
                     tol: float = 1e-8, w_init=None, return_n_iter: bool = False):
    """Symmetric FastICA with a fixed contrast (``"G0"`` or ``"G1"``)."""
    if kind not in CONTRASTS:
        raise InvalidData(f"kind must be one of {sorted(CONTRASTS)}, got {kind!r}")
    if maxit < 1:
        raise InvalidData("maxit must be >= 1")
    x = np.asarray(whitened, dtype=float)
    m = x.shape[0]
    W = random_orthonormal(m, seed) if w_init is None else sym_decorrelate(w_init)
    n_iter = 0
    for n_iter in range(1, maxit + 1):
        W_new = fixed_point_update(W, x, kind)
        gap = convergence_gap(W_new, W)
        W = W_new
        if gap < tol:
            break
    if return_n_iter:
        return W, n_iter
    return W
