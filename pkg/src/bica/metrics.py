"""Separation quality: Amari metric and signal-to-interference ratio."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateSignal, InvalidData, RankDeficient

SIR_CAP_DB = 150.0


def amari(W, W0) -> float:
    """Amari metric between an estimated and a true unmixing matrix.

    With ``r = W W0^{-1}`` this is the mean, over rows and over columns, of
    ``sum|r| / max|r| - 1``, halved. Zero iff ``W`` equals ``W0`` up to row
    permutation and scaling; at most ``m - 1``.
    """
    W = np.asarray(W, dtype=float)
    W0 = np.asarray(W0, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape != W0.shape:
        raise InvalidData(f"need equal square matrices, got {W.shape} and {W0.shape}")
    sv = np.linalg.svd(W0, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise RankDeficient("true unmixing matrix is singular")
    r = np.abs(W @ np.linalg.inv(W0))
    m = r.shape[0]
    rows = np.sum(r.sum(axis=1) / r.max(axis=1) - 1.0)
    cols = np.sum(r.sum(axis=0) / r.max(axis=0) - 1.0)
    return float((rows + cols) / (2.0 * m))


def _standardize(x, what):
    x = np.asarray(x, dtype=float)
    x = x - x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1)
    if np.any(sd <= 0) or not np.all(np.isfinite(sd)):
        raise DegenerateSignal(f"{what} has a zero-variance row")
    return x / sd[:, np.newaxis]


def match_components(true_sources, estimated) -> tuple[np.ndarray, np.ndarray]:
    """Optimal one-to-one matching by absolute correlation.

    Returns ``(perm, rho)`` where estimated row ``perm[i]`` is matched to
    true row ``i`` with correlation ``rho[i]``.
    """
    s = _standardize(true_sources, "true_sources")
    y = _standardize(estimated, "estimated")
    if s.shape != y.shape:
        raise InvalidData(f"shape mismatch {s.shape} vs {y.shape}")
    corr = s @ y.T / s.shape[1]
    rows, cols = linear_sum_assignment(-np.abs(corr))
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    rho = corr[np.arange(len(perm)), perm]
    return perm, rho


def sir(true_sources, estimated) -> tuple[float, np.ndarray]:
    """Mean and per-component SIR in dB, ``10 log10(rho^2 / (1 - rho^2))``.

    Components are matched by :func:`match_components`; values are capped at
    150 dB so that perfect recovery stays finite.
    """
    _, rho = match_components(true_sources, estimated)
    r2 = np.minimum(rho**2, 1.0)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(r2) - 10.0 * np.log10(1.0 - r2)
    db = np.minimum(db, SIR_CAP_DB)
    return float(db.mean()), db


def report(W=None, W0=None, true_sources=None, estimated=None) -> dict:
    out = {}
    if W is not None and W0 is not None:
        out["amari_x100"] = 100.0 * amari(W, W0)
    if true_sources is not None and estimated is not None:
        mean_db, per = sir(true_sources, estimated)
        out["mean_sir_db"] = mean_db
        out["per_component_sir"] = per.tolist()
    return out
