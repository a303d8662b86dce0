"""Interpolators for 1D sample sets and baseline estimators for 2D scenes.

The 1D interpolators (nearest neighbour, linear, truncated sinc) are the
ones the error bounds in :mod:`rmbounds.errors` are stated for. The 2D
estimators (KNN, simple Kriging, kernel ridge regression) follow a
fit/predict split: construction factorises the system once and the fitted
object is read-only afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from rmbounds import kernels


@dataclass(frozen=True)
class SampleSet:
    """Sorted 1D measurement locations ``xs`` with measured values ``ys``."""

    xs: np.ndarray
    ys: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        ys = np.asarray(self.ys, dtype=float).ravel()
        if len(xs) != len(ys):
            raise ValueError(f"xs and ys differ in length ({len(xs)} vs {len(ys)})")
        if len(xs) < 1:
            raise ValueError("a SampleSet needs at least one sample")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("sample locations and values must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("sample locations must be strictly increasing")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.noise_sigma == 0 and np.any(ys < 0):
            raise ValueError("noiseless power samples must be >= 0")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_map(cls, fmap, xs, noise_sigma: float = 0.0, rng: np.random.Generator | None = None):
        """Sample ``fmap`` at ``xs``, adding i.i.d. Gaussian noise when ``noise_sigma > 0``."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(fmap(xs), dtype=float)
        if noise_sigma > 0:
            if rng is None:
                raise ValueError("noisy sampling needs an explicit rng")
            ys = ys + rng.normal(0.0, noise_sigma, size=ys.shape)
        return cls(xs, ys, noise_sigma)

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def deltas(self) -> np.ndarray:
        """Gaps ``x_{n+1} - x_n``."""
        return np.diff(self.xs)


@dataclass(frozen=True)
class UniformSampling:
    """Locations ``n * spacing + offset`` for ``n`` in the inclusive ``index_range``."""

    spacing: float
    offset: float = 0.0
    index_range: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if not 0 <= self.offset < self.spacing:
            raise ValueError("offset must lie in [0, spacing)")
        lo, hi = self.index_range
        object.__setattr__(self, "index_range", (int(lo), int(hi)))

    @classmethod
    def covering(cls, spacing: float, offset: float, lo: float, hi: float) -> "UniformSampling":
        """Every sample location inside ``[lo, hi]``."""
        first = math.ceil((lo - offset) / spacing)
        last = math.floor((hi - offset) / spacing)
        return cls(spacing, offset, (first, last))

    @property
    def n(self) -> int:
        return max(0, self.index_range[1] - self.index_range[0] + 1)

    def indices(self) -> np.ndarray:
        lo, hi = self.index_range
        return np.arange(lo, hi + 1)

    def positions(self) -> np.ndarray:
        return self.indices() * self.spacing + self.offset


def _cell_index(samples: SampleSet, x: np.ndarray) -> np.ndarray:
    xs = samples.xs
    if samples.n < 2:
        raise ValueError("interval interpolators need at least two samples")
    if np.any(x < xs[0]) or np.any(x > xs[-1]) or np.any(np.isnan(x)):
        raise ValueError(f"query outside the sampled interval [{xs[0]}, {xs[-1]}]")
    # cell n holds xs[n] <= x < xs[n+1]; the right end point joins the last cell
    return np.minimum(np.searchsorted(xs, x, side="right") - 1, samples.n - 2)


def _as_output(values: np.ndarray, x):
    return float(values) if np.ndim(x) == 0 else values


def interp_nearest(samples: SampleSet, x):
    """Nearest-sample value; at an exact midpoint the right-hand sample wins."""
    xq = np.asarray(x, dtype=float)
    n = _cell_index(samples, xq)
    mid = 0.5 * (samples.xs[n] + samples.xs[n + 1])
    return _as_output(samples.ys[np.where(xq >= mid, n + 1, n)], x)


def interp_linear(samples: SampleSet, x):
    """Piecewise linear interpolation between consecutive samples."""
    xq = np.asarray(x, dtype=float)
    n = _cell_index(samples, xq)
    x0, x1 = samples.xs[n], samples.xs[n + 1]
    y0, y1 = samples.ys[n], samples.ys[n + 1]
    # convex weights: finite for tiny gaps and never outside [y0, y1]
    w = (xq - x0) / (x1 - x0)
    out = (1.0 - w) * y0 + w * y1
    return _as_output(out, x)


def _sample_values(values_at: Callable, positions: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(values_at(positions), dtype=float)
    except (TypeError, ValueError):
        values = None
    if values is None or values.shape != positions.shape:
        values = np.array([float(values_at(p)) for p in positions])
    return values


def interp_sinc(values_at: Callable, sampling: UniformSampling, x):
    """Truncated sinc series through the samples of ``values_at`` on ``sampling``.

    ``values_at`` may be vectorised (such as a :class:`FreeSpaceMap`) or a
    scalar callable.
    """
    if sampling.n == 0:
        raise ValueError("empty index_range")
    positions = sampling.positions()
    return sinc_from_values(_sample_values(values_at, positions), sampling, x)


def sinc_from_values(values, sampling: UniformSampling, x):
    """Same as :func:`interp_sinc` for precomputed sample values."""
    if sampling.n == 0:
        raise ValueError("empty index_range")
    values = np.asarray(values, dtype=float)
    if values.shape != (sampling.n,):
        raise ValueError(f"expected {sampling.n} sample values, got shape {values.shape}")
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    out = kernels.sinc_series(xq.ravel(), sampling.positions(), values, sampling.spacing).reshape(xq.shape)
    # return samples exactly at sample locations; sin(pi*k) is not exactly 0 in floating point
    lo, hi = sampling.index_range
    k = np.clip(np.round((xq - sampling.offset) / sampling.spacing), lo, hi)
    on_grid = k * sampling.spacing + sampling.offset == xq
    if np.any(on_grid):
        out[on_grid] = values[(k[on_grid] - lo).astype(np.int64)]
    return _as_output(out.reshape(np.shape(x)), x)


def _points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) array of points, got shape {pts.shape}")
    return pts


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1))


def _query_points(query):
    q = np.asarray(query, dtype=float)
    return q.reshape(1, 2) if q.ndim == 1 else _points(q), q.ndim == 1


class KNNEstimator:
    """Mean of the ``k`` nearest measurements; distance ties go to the lower index."""

    def __init__(self, points, values, k: int = 5):
        self.points = _points(points)
        self.values = np.asarray(values, dtype=float).ravel()
        if len(self.values) != len(self.points):
            raise ValueError("points and values differ in length")
        if not 1 <= k <= len(self.points):
            raise ValueError(f"k must be in [1, {len(self.points)}], got {k}")
        self.k = int(k)

    def predict(self, query):
        q, single = _query_points(query)
        order = np.argsort(_pairwise(q, self.points), axis=1, kind="stable")[:, : self.k]
        out = self.values[order].mean(axis=1)
        return float(out[0]) if single else out


def _to_db(values: np.ndarray) -> np.ndarray:
    if np.any(values <= 0):
        raise ValueError("dB mode needs strictly positive values")
    return 10.0 * np.log10(values)


class SimpleKriging:
    """Simple Kriging with exponential covariance ``sigma_s^2 exp(-r / delta_s)``.

    The prior mean is zero. With ``db=True`` the fit runs on
    ``10 log10(values)`` minus their sample mean and predictions are mapped
    back to linear power.
    """

    def __init__(self, points, values, sigma_s: float = 3.0, delta_s: float = 50.0, db: bool = False):
        if not (sigma_s > 0 and delta_s > 0):
            raise ValueError("sigma_s and delta_s must be positive")
        self.points = _points(points)
        values = np.asarray(values, dtype=float).ravel()
        if len(values) != len(self.points):
            raise ValueError("points and values differ in length")
        self.sigma_s = float(sigma_s)
        self.delta_s = float(delta_s)
        self.db = db
        self.shift = 0.0
        if db:
            values = _to_db(values)
            self.shift = float(values.mean())
            values = values - self.shift
        self.jitter = 1e-8 * self.sigma_s**2
        cov = self._cov(_pairwise(self.points, self.points))
        cov[np.diag_indices_from(cov)] += self.jitter
        try:
            factor = linalg.cho_factor(cov)
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("Kriging covariance is singular after jitter") from exc
        self.weights = linalg.cho_solve(factor, values)

    def _cov(self, r):
        return self.sigma_s**2 * np.exp(-r / self.delta_s)

    def predict(self, query):
        q, single = _query_points(query)
        out = self._cov(_pairwise(q, self.points)) @ self.weights
        if self.db:
            out = 10.0 ** ((out + self.shift) / 10.0)
        return float(out[0]) if single else out


class KernelRidge:
    """Kernel ridge regression solving ``(K + reg * N * I) a = y``.

    ``kernel="gaussian"`` uses ``exp(-r^2 / (2 w^2))``; ``kernel="inverse_sq"``
    uses ``1 / (r^2 + w^2)``, the reproducing kernel of the free-space map
    class with ``w`` playing the role of the source height.
    """

    def __init__(self, points, values, kernel_width: float = 10.0, reg: float = 1e-3, kernel: str = "gaussian"):
        if not (kernel_width > 0 and reg > 0):
            raise ValueError("kernel_width and reg must be positive")
        if kernel not in ("gaussian", "inverse_sq"):
            raise ValueError(f"unknown kernel {kernel!r}")
        self.points = _points(points)
        values = np.asarray(values, dtype=float).ravel()
        if len(values) != len(self.points):
            raise ValueError("points and values differ in length")
        self.kernel_width = float(kernel_width)
        self.reg = float(reg)
        self.kernel = kernel
        gram = self._k(_pairwise(self.points, self.points))
        gram[np.diag_indices_from(gram)] += self.reg * len(values)
        try:
            self.coef = linalg.solve(gram, values, assume_a="pos")
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("kernel ridge system is singular") from exc

    def _k(self, r):
        w = self.kernel_width
        if self.kernel == "gaussian":
            return np.exp(-(r**2) / (2 * w**2))
        return 1.0 / (r**2 + w**2)

    def predict(self, query):
        q, single = _query_points(query)
        out = self._k(_pairwise(q, self.points)) @ self.coef
        return float(out[0]) if single else out


def estimate_knn(points, values, k: int, query):
    return KNNEstimator(points, values, k).predict(query)


def estimate_kriging(points, values, sigma_s: float, delta_s: float, query, db: bool = False):
    return SimpleKriging(points, values, sigma_s, delta_s, db=db).predict(query)


def estimate_krr(points, values, kernel_width: float, reg: float, query, kernel: str = "gaussian"):
    return KernelRidge(points, values, kernel_width, reg, kernel).predict(query)
