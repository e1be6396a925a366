"""Joint maximization: boosted densities alternate with fixed-point W updates."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .density import BoostResult, boost_density
from .errors import InvalidData, InvalidDimension, ModelDiverged
from .fixed_point import convergence_gap, fixed_point_update
from .linalg import (
    WhiteningResult, as_data_matrix, center_whiten, random_orthonormal, sym_decorrelate,
)


SUPPORTS = ("ball", "sample")


def support_span(z, support: str):
    """Grid span shared by every projection of the whitened data ``z``.

    For orthonormal W each ``|w_i^T z_j| <= ||z_j||``, so ``[-R, R]`` with
    ``R = max_j ||z_j||`` covers every component at every W and keeps the
    density support fixed while W moves. ``"sample"`` returns None (each
    grid spans its own sample range).
    """
    if support == "sample":
        return None
    r = float(np.sqrt(np.max(np.einsum("ij,ij->j", z, z))))
    return (-r, r)


@dataclass(frozen=True)
class BicaConfig:
    L: int = 500
    df: float = 3.0
    M: int = 5
    maxit: int = 20
    seed: int = 0
    tol: float = 1e-8
    sweeps_per_iter: int = 1
    restarts: int = 3
    support: str = "ball"

    def __post_init__(self):
        if self.L < 10:
            raise InvalidData(f"L must be >= 10, got {self.L}")
        if not 2.0 < self.df <= self.L:
            raise InvalidData(f"df must lie in (2, L], got {self.df}")
        if self.M < 0 or self.maxit < 1 or self.sweeps_per_iter < 1 or self.restarts < 0:
            raise InvalidData(
                "M >= 0, maxit >= 1, sweeps_per_iter >= 1 and restarts >= 0 are required"
            )

        if self.support not in SUPPORTS:
            raise InvalidData(f"support must be one of {SUPPORTS}, got {self.support!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class SeparationResult:
    W: np.ndarray
    models: list
    loglik_per_iter: np.ndarray
    iterations_run: int
    whitening: WhiteningResult
    component_loglik: np.ndarray = None
    W_history: list = field(default_factory=list, repr=False)

    @property
    def unmixing(self) -> np.ndarray:
        """Unmixing matrix acting on the raw (uncentered) input rows."""
        return self.W @ self.whitening.transform

    @property
    def sources(self) -> np.ndarray:
        return self.W @ self.whitening.whitened

    def transform(self, data) -> np.ndarray:
        x = as_data_matrix(data)
        return self.unmixing @ (x - self.whitening.mean[:, np.newaxis])


def _fit_densities(Y, config: BicaConfig, span, threads: int = 1) -> list[BoostResult]:
    def one(i):
        try:
            return boost_density(Y[i], config.L, config.M, config.df, span=span)
        except ModelDiverged as exc:
            exc.component = i
            raise

    if threads > 1 and Y.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(Y.shape[0])))
    return [one(i) for i in range(Y.shape[0])]


def _run_from(z, W, config: BicaConfig, threads, callback, start):
    span = support_span(z, config.support)
    history = [W]
    logliks = []
    per_comp = []
    fits = []
    it = 0
    for it in range(1, config.maxit + 1):
        fits = _fit_densities(W @ z, config, span, threads)
        per_comp.append([r.loglik_trace[-1] for r in fits])
        logliks.append(math.fsum(per_comp[-1]))
        W_new = W
        for _ in range(config.sweeps_per_iter):
            W_new = fixed_point_update(W_new, z, [r.model for r in fits])
            history.append(W_new)
        gap = convergence_gap(W_new, W)
        W = W_new
        if callback is not None:
            callback(it, W, logliks[-1], gap, start)
        if gap < config.tol:
            break
    return W, fits, logliks, it, history, per_comp


def start_matrix(m: int, seed: int, start: int) -> np.ndarray:
    """Initial W for restart number ``start`` (start 0 uses ``seed`` itself)."""
    return random_orthonormal(m, seed if start == 0 else [seed, start])


def separate(data, config: BicaConfig | None = None, *, threads: int = 1,
             callback=None, w_init=None) -> SeparationResult:
    """Estimate an unmixing matrix and the source log-densities.

    Each outer iteration fits a boosted density to every current component
    ``y_i = w_i^T z`` and then applies ``sweeps_per_iter`` fixed-point
    sweeps. The total modified log-likelihood is recorded after the density
    step. A run stops after ``maxit`` iterations or once the row-wise change
    of W drops below ``tol``.

    The joint likelihood can have secondary maxima (e.g. the 45 degree
    configuration of two symmetric sources), so ``1 + restarts`` runs are
    started from random orthonormal matrices and the one with the highest
    final log-likelihood is returned.

    ``callback(iteration, W, total_loglik, gap, start)`` is invoked after
    every outer iteration of every start. ``w_init`` (m x m, orthonormalized
    here) replaces the random matrix of start 0.
    """
    config = config or BicaConfig()
    x = as_data_matrix(data, min_rows=2)
    wr = center_whiten(x)
    z = wr.whitened
    m = z.shape[0]
    best = None
    for start in range(config.restarts + 1):
        if start == 0 and w_init is not None:
            W0 = np.asarray(w_init, dtype=float)
            if W0.shape != (m, m):
                raise InvalidDimension(f"w_init must be {m}x{m}, got {W0.shape}")
            W0 = sym_decorrelate(W0)
        else:
            W0 = start_matrix(m, config.seed, start)
        run = _run_from(z, W0, config, threads, callback, start)
        if best is None or run[2][-1] > best[2][-1]:
            best = run
    W, fits, logliks, it, history, per_comp = best
    return SeparationResult(
        W=W,
        models=[r.model for r in fits],
        loglik_per_iter=np.array(logliks),
        iterations_run=it,
        whitening=wr,
        component_loglik=np.array(per_comp),
        W_history=history,
    )


def rotation(theta_deg: float) -> np.ndarray:
    """``[[cos, sin], [-sin, cos]]`` for an angle in degrees."""
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]])


def likelihood_scan(data2d, angles, config: BicaConfig | None = None):
    """Total modified log-likelihood as a function of the unmixing angle.

    The data are whitened symmetrically, so an input that is already white
    keeps its frame and the scan peaks at the angle of its true unmixing
    rotation (modulo 90 degrees). W is held fixed at each angle.
    """
    config = config or BicaConfig()
    x = as_data_matrix(data2d)
    if x.shape[0] != 2:
        raise InvalidDimension(f"likelihood scan needs 2-row data, got {x.shape[0]}")
    z = center_whiten(x, symmetric=True).whitened
    span = support_span(z, config.support)
    out = []
    for theta in angles:
        Y = rotation(theta) @ z
        total = 0.0
        for i in range(2):
            try:
                res = boost_density(Y[i], config.L, config.M, config.df, span=span)
            except ModelDiverged as exc:
                exc.component = i
                raise
            total += res.loglik_trace[-1]
        out.append((float(theta), float(total)))
    return out
