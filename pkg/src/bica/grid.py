"""Equally spaced histogram grid for one estimated source."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, InvalidData, InvalidGrid

DEFAULT_MIN_POINTS = 10


@dataclass(frozen=True)
class Grid:
    """``L`` ascending grid values with spacing ``step`` and bin frequencies.

    Bin ``l`` collects samples in ``(values[l] - step/2, values[l] + step/2]``;
    the first bin is also closed below.
    """

    values: np.ndarray
    step: float
    freqs: np.ndarray

    @property
    def L(self) -> int:
        return len(self.values)


def build_grid(samples, L: int, *, span=None, min_points: int = DEFAULT_MIN_POINTS) -> Grid:
    """Bin ``samples`` onto ``L`` equally spaced points.

    The grid spans exactly ``[min, max]`` of the samples unless ``span =
    (lo, hi)`` is given, in which case it must cover every sample.
    """
    y = np.asarray(samples, dtype=float).ravel()
    if y.size < 2:
        raise InvalidData("need at least two samples")
    if not np.all(np.isfinite(y)):
        raise InvalidData("samples contain non-finite values")
    if L < max(min_points, 2):
        raise InvalidGrid(f"grid needs at least {max(min_points, 2)} points, got {L}")
    lo, hi = y.min(), y.max()
    if not hi > lo:
        raise DegenerateSample("samples have zero range")
    if span is not None:
        if not (span[0] <= lo and hi <= span[1]):
            raise InvalidGrid(f"span {tuple(span)} does not cover samples [{lo}, {hi}]")
        lo, hi = float(span[0]), float(span[1])
    step = (hi - lo) / (L - 1)
    values = lo + step * np.arange(L)
    values[-1] = hi
    idx = np.ceil((y - lo) / step - 0.5).astype(np.intp)
    np.clip(idx, 0, L - 1, out=idx)
    freqs = np.bincount(idx, minlength=L) / y.size
    return Grid(values, float(step), freqs)
