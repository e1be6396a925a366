"""Preprocessing and orthonormalization helpers.

Data matrices follow the convention used throughout the package: rows are
components (signals), columns are samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidData, InvalidDimension, RankDeficient

RANK_TOL = 1e-12


def as_data_matrix(data, min_rows: int = 1) -> np.ndarray:
    """Validate and convert ``data`` to a 2-D float array."""
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2:
        raise InvalidData(f"expected a 2-D matrix, got shape {x.shape}")
    if x.shape[0] < min_rows:
        raise InvalidDimension(f"need at least {min_rows} rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InvalidData("data contains non-finite entries")
    return x


def center(data) -> tuple[np.ndarray, np.ndarray]:
    """Remove the row means.

    Returns
    -------
    centered : ndarray, shape (m, N)
    mean : ndarray, shape (m,)
    """
    x = as_data_matrix(data)
    if x.shape[1] < 2:
        raise InvalidData("need at least two samples to center")
    mean = x.mean(axis=1)
    centered = x - mean[:, np.newaxis]
    # second pass removes the residual rounding left by the first subtraction
    centered -= centered.mean(axis=1, keepdims=True)
    return centered, mean


@dataclass(frozen=True)
class WhiteningResult:
    """Whitened data plus what is needed to map back to the input space.

    ``whitened = transform @ (data - mean[:, None])``.
    """

    whitened: np.ndarray
    mean: np.ndarray
    transform: np.ndarray

    @property
    def inverse_transform(self) -> np.ndarray:
        return np.linalg.inv(self.transform)


def _sym_eig(c: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(c)
    if evals[-1] <= 0 or evals[0] <= RANK_TOL * evals[-1]:
        raise RankDeficient(
            f"{what} is rank deficient (eigenvalues {evals[0]:.3g} .. {evals[-1]:.3g})"
        )
    return evals, evecs


def whiten(centered, mean=None, symmetric: bool = False) -> WhiteningResult:
    """Whiten row-centered data so that its sample covariance is the identity.

    The covariance uses the ``N - 1`` divisor. By default the transform is
    ``Lambda^{-1/2} U^T`` from ``Cov = U Lambda U^T`` (PCA whitening). With
    ``symmetric=True`` it is ``U Lambda^{-1/2} U^T``, which leaves data that
    is already white (up to scale) in its original frame.
    """
    x = as_data_matrix(centered, min_rows=1)
    m, n = x.shape
    if n <= m:
        raise InvalidData(f"need more samples than components (m={m}, N={n})")
    cov = x @ x.T / (n - 1)
    evals, evecs = _sym_eig(cov, "sample covariance")
    transform = evecs.T / np.sqrt(evals)[:, np.newaxis]
    if symmetric:
        transform = evecs @ transform
    if mean is None:
        mean = np.zeros(m)
    return WhiteningResult(transform @ x, np.asarray(mean, dtype=float), transform)


def center_whiten(data, symmetric: bool = False) -> WhiteningResult:
    centered, mean = center(data)
    return whiten(centered, mean, symmetric=symmetric)


def sym_decorrelate(w) -> np.ndarray:
    """Symmetric decorrelation ``(W W^T)^{-1/2} W``."""
    w = np.asarray(w, dtype=float)
    evals, evecs = _sym_eig(w @ w.T, "W W^T")
    return (evecs / np.sqrt(evals)) @ evecs.T @ w


def random_orthonormal(m: int, seed) -> np.ndarray:
    """Haar-distributed random orthonormal ``m x m`` matrix.

    Draws come from numpy's PCG64 generator (``np.random.default_rng(seed)``);
    the Gaussian matrix is orthonormalized by QR with the signs of ``R``'s
    diagonal folded back into ``Q``. ``seed`` may be an int or a sequence of
    ints (anything ``default_rng`` accepts).
    """
    if m < 2:
        raise InvalidDimension(f"m must be >= 2, got {m}")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.sign(np.diag(r))
    return sym_decorrelate(q)
