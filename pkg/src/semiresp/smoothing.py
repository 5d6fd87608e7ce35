"""Conditional-mean smoothers: exact cell averages and Nadaraya-Watson kernels.

Both forms estimate E{Z | x} from points (x_i, z_i).  Discrete covariates get
exact cell averages; continuous ones get a kernel regression with a product
kernel, one shared bandwidth scaled by per-coordinate standard deviation, and
leave-one-out cross-validated bandwidth selection on a logarithmic grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandwidthSelectionFailed, DegenerateWindow, EmptyCell

DEN_FLOOR = 1e-30          # below this the kernel window is declared degenerate
CV_GRID_POINTS = 25
CV_GRID_SPAN = (0.05, 5.0)  # multiples of the Silverman rule-of-thumb


@dataclass(frozen=True)
class Bandwidth:
    h: float

    def __post_init__(self):
        if not (self.h > 0):
            raise ValueError(f"bandwidth must be positive, got {self.h}")


def gaussian_kernel(u):
    return np.exp(-0.5 * u * u)


def epanechnikov_kernel(u):
    return np.maximum(0.0, 0.75 * (1.0 - u * u))


KERNELS = {"gaussian": gaussian_kernel, "epanechnikov": epanechnikov_kernel}


class CellMeanSmoother:
    """Exact per-level averages: evaluate(x0) = sum(z I(x=x0)) / sum(I(x=x0)).

    Levels may be scalars or tuples (joint levels of several discrete
    coordinates).  Evaluating at a level with zero count raises EmptyCell.
    """

    form = "cell"

    def __init__(self, table, target=""):
        self._table = dict(table)    # level -> (sum, count)
        self.target = target

    def evaluate(self, x0) -> float:
        key = _level_key(x0)
        got = self._table.get(key)
        if got is None or got[1] == 0:
            raise EmptyCell(key, self.target)
        s, c = got
        return s / c

    def levels(self):
        return sorted(self._table)


def _level_key(x0):
    if np.isscalar(x0):
        return float(x0)
    arr = np.atleast_1d(np.asarray(x0, dtype=float))
    return float(arr[0]) if arr.size == 1 else tuple(arr.tolist())


def fit_cell_mean(points, target="") -> CellMeanSmoother:
    """Fit exact cell averages from (code, z) pairs."""
    if len(points) == 0:
        raise ValueError("fit_cell_mean needs at least one point")
    table = {}
    for x, z in points:
        key = _level_key(x)
        s, c = table.get(key, (0.0, 0))
        table[key] = (s + float(z), c + 1)
    return CellMeanSmoother(table, target)


class KernelMeanSmoother:
    """Nadaraya-Watson estimator with a product kernel over coordinates."""

    form = "kernel"

    def __init__(self, x, z, h, kernel="gaussian", scales=None, target=""):
        self.x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.x.shape[0] == 1 and len(np.atleast_1d(z)) > 1:
            self.x = self.x.T
        self.z = np.asarray(z, dtype=float)
        if self.x.shape[0] != self.z.shape[0]:
            raise ValueError("x and z lengths differ")
        if self.x.shape[0] < 2:
            raise ValueError("kernel smoother needs at least 2 points")
        self.h = h.h if isinstance(h, Bandwidth) else float(h)
        if not (self.h > 0):
            raise ValueError("bandwidth must be positive")
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}")
        self.kernel = kernel
        if scales is None:
            scales = self.x.std(axis=0, ddof=0)
            scales[scales == 0] = 1.0
        self.scales = np.asarray(scales, dtype=float)
        self.target = target

    def weights(self, x0) -> np.ndarray:
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        u = (self.x - x0[None, :]) / (self.h * self.scales[None, :])
        k = KERNELS[self.kernel]
        return np.prod(k(u), axis=1)

    def evaluate(self, x0) -> float:
        w = self.weights(x0)
        den = w.sum()
        if den < DEN_FLOOR:
            raise DegenerateWindow(x0)
        return float(w @ self.z / den)


def fit_kernel_mean(points, h, kernel="gaussian", target="") -> KernelMeanSmoother:
    """Fit a Nadaraya-Watson smoother from (x, z) pairs."""
    xs = np.array([np.atleast_1d(p[0]) for p in points], dtype=float)
    zs = np.array([p[1] for p in points], dtype=float)
    return KernelMeanSmoother(xs, zs, h, kernel=kernel, target=target)


def silverman_bandwidth(x) -> float:
    """Rule-of-thumb bandwidth on standardized coordinates (0.9 min(sd, IQR/1.34) n^-1/5)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1:
        x = x.T
    n = x.shape[0]
    # coordinates are standardized by their sd inside the smoother, so the
    # spread statistics are computed on the standardized scale too
    scales = x.std(axis=0, ddof=0)
    scales[scales == 0] = 1.0
    xs = x / scales
    sds = xs.std(axis=0, ddof=0)
    q75, q25 = np.percentile(xs, [75, 25], axis=0)
    iqr = (q75 - q25) / 1.34
    spread = np.where(iqr > 0, np.minimum(sds, iqr), sds)
    h = 0.9 * float(np.max(spread)) * n ** (-0.2)
    return h


def select_bandwidth_cv(x, z, kernel="gaussian") -> Bandwidth:
    """Leave-one-out CV over a 25-point log grid around the Silverman bandwidth.

    Deterministic given inputs; ties broken toward the smallest bandwidth
    (grid is scanned in increasing order and strict improvement is required).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1 and len(np.atleast_1d(z)) > 1:
        x = x.T
    z = np.asarray(z, dtype=float)
    n = x.shape[0]
    if n < 10:
        raise ValueError("cross-validation needs n >= 10")
    h0 = silverman_bandwidth(x)
    if not (h0 > 0) or not np.isfinite(h0):
        raise BandwidthSelectionFailed("no spread in x")
    grid = h0 * np.exp(np.linspace(np.log(CV_GRID_SPAN[0]), np.log(CV_GRID_SPAN[1]),
                                   CV_GRID_POINTS))
    scales = x.std(axis=0, ddof=0)
    scales[scales == 0] = 1.0
    kfun = KERNELS[kernel]
    best_h, best_err = None, np.inf
    for h in grid:
        u = (x[:, None, :] - x[None, :, :]) / (h * scales[None, None, :])
        w = np.prod(kfun(u), axis=2)
        np.fill_diagonal(w, 0.0)
        den = w.sum(axis=1)
        if np.any(den < DEN_FLOOR):
            continue
        pred = w @ z / den
        err = float(np.mean((z - pred) ** 2))
        if err < best_err:
            best_h, best_err = h, err
    if best_h is None:
        raise BandwidthSelectionFailed("all grid bandwidths degenerate")
    return Bandwidth(float(best_h))
