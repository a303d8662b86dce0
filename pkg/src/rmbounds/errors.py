"""Reconstruction error metrics and closed-form error bounds for 1D maps.

Bounds for the nearest-neighbour (zeroth-order) and linear (first-order)
interpolators are affine in the proximity coefficient ``C = sum alpha/d^3``
for the Friis exponent. For other exponents they are expressed through the
derivative bound ``m`` and the per-metric slope factors below.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from rmbounds.interp import SampleSet, UniformSampling, sinc_from_values
from rmbounds.mapmodel import FreeSpaceMap, MappedRegion, proximity_coefficient
from rmbounds.spectral import (
    FRIIS_DERIVATIVE_CONSTANT,
    derivative_constant,
    require_friis,
    spectral_energy_above,
)

# error bound = factor * m * (sum D^2, sqrt(sum D^3), max D) with m the slope bound
ZEROTH_SLOPE_FACTORS = {"l1": 1 / 4, "l2": math.sqrt(1 / 12), "linf": 1 / 2}
FIRST_SLOPE_FACTORS = {"l1": 9 / 32, "l2": math.sqrt((16 * math.sqrt(2) - 13) / 96), "linf": 1 / 2}

_SLOPE_FACTORS = {"zeroth": ZEROTH_SLOPE_FACTORS, "first": FIRST_SLOPE_FACTORS}

# constants multiplying C for gamma = 2; written as product with the slope
# constant so both bound paths round identically
FRIIS_BOUND_CONSTANTS = {
    method: {k: FRIIS_DERIVATIVE_CONSTANT * f for k, f in factors.items()}
    for method, factors in _SLOPE_FACTORS.items()
}


@dataclass(frozen=True)
class ErrorReport:
    l1: float
    l2: float
    linf: float
    grid_points: int


@dataclass(frozen=True)
class BoundReport:
    l1_bound: float
    l2_bound: float
    linf_bound: float
    method: str
    prox: float

    def as_dict(self) -> dict:
        return asdict(self)


def _half_open_trapezoid(values: np.ndarray, h: float) -> float:
    # trapezoid over the grid, last cell closed with a left rectangle so that
    # a constant integrand is integrated exactly over [lo, hi)
    return h * (float(values.sum()) - 0.5 * values[0] + 0.5 * values[-1])


def error_metrics(true_map: FreeSpaceMap, estimate: Callable, region: MappedRegion, grid_points: int) -> ErrorReport:
    """L1, L2 and L-infinity norms of ``true_map - estimate`` on ``region``.

    Uses ``grid_points`` uniformly spaced points starting at ``region.lo``
    and stopping one step short of ``region.hi``.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    x = region.grid(grid_points)
    err = np.abs(np.asarray(true_map(x), dtype=float) - np.asarray(estimate(x), dtype=float))
    if not np.all(np.isfinite(err)):
        raise ValueError("non-finite error on the evaluation grid")
    h = region.length / grid_points
    return ErrorReport(
        l1=_half_open_trapezoid(err, h),
        l2=math.sqrt(_half_open_trapezoid(err**2, h)),
        linf=float(err.max()),
        grid_points=grid_points,
    )


def _deltas(deltas) -> np.ndarray:
    if isinstance(deltas, SampleSet):
        deltas = deltas.deltas
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    if d.size == 0 or np.any(~(d > 0)):
        raise ValueError("deltas must be a nonempty list of positive gaps")
    return d


def _assemble(coeffs: dict, scale: float, deltas: np.ndarray, method: str, prox: float) -> BoundReport:
    return BoundReport(
        l1_bound=coeffs["l1"] * scale * float(np.sum(deltas**2)),
        l2_bound=coeffs["l2"] * scale * math.sqrt(float(np.sum(deltas**3))),
        linf_bound=coeffs["linf"] * scale * float(deltas.max()),
        method=method,
        prox=prox,
    )


def friis_bounds(prox: float, deltas, method: str) -> BoundReport:
    """Friis-exponent bounds from the proximity coefficient ``prox`` alone."""
    if method not in FRIIS_BOUND_CONSTANTS:
        raise ValueError(f"method must be 'zeroth' or 'first', got {method!r}")
    return _assemble(FRIIS_BOUND_CONSTANTS[method], prox, _deltas(deltas), method, prox)


def general_bounds(fmap: FreeSpaceMap, deltas, method: str) -> BoundReport:
    """Bounds for any path-loss exponent via the derivative bound.

    ``prox`` holds the exponent-adjusted sum ``sum alpha / d^(gamma+1)``,
    which is the proximity coefficient when gamma = 2.
    """
    if method not in _SLOPE_FACTORS:
        raise ValueError(f"method must be 'zeroth' or 'first', got {method!r}")
    if fmap.dim != 1:
        raise ValueError("interpolation bounds need a map with dim=1")
    if np.any(fmap.d2s <= 0):
        raise ValueError("bounds are singular for a source on the mapped line")
    weighted = float(np.sum(fmap.alphas / fmap.ds ** (fmap.gamma + 1)))
    const = derivative_constant(fmap.gamma)
    coeffs = {k: const * f for k, f in _SLOPE_FACTORS[method].items()}
    return _assemble(coeffs, weighted, _deltas(deltas), method, weighted)


def _bounds(fmap: FreeSpaceMap, deltas, method: str) -> BoundReport:
    if fmap.dim != 1:
        raise ValueError("interpolation bounds need a map with dim=1")
    if fmap.gamma == 2.0:
        return friis_bounds(proximity_coefficient(fmap), deltas, method)
    return general_bounds(fmap, deltas, method)


def bound_zeroth(fmap: FreeSpaceMap, deltas) -> BoundReport:
    """Error bounds for nearest-neighbour interpolation with gaps ``deltas``."""
    return _bounds(fmap, deltas, "zeroth")


def bound_first(fmap: FreeSpaceMap, deltas) -> BoundReport:
    """Error bounds for linear interpolation with gaps ``deltas``."""
    return _bounds(fmap, deltas, "first")


def bound_sinc_avg(fmap: FreeSpaceMap, spacing: float, exact: bool = False) -> float:
    """Offset-averaged squared L2 error of sinc reconstruction at ``spacing``.

    The default returns the closed-form upper bound. ``exact=True`` returns
    the aliasing energy ``(2/pi) int_{pi/spacing}^inf |F|^2`` instead, which
    equals the offset average of the untruncated series over the whole line.
    """
    require_friis(fmap, "bound_sinc_avg")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if exact:
        return 2 / math.pi * spectral_energy_above(fmap, math.pi / spacing)
    dmin = float(fmap.ds.min())
    return (
        math.pi * fmap.n_sources * float(np.sum(fmap.alphas**2)) / dmin**3
        * math.exp(-2 * math.pi * dmin / spacing)
    )


def relative_error_bound(fmap: FreeSpaceMap, deltas) -> float:
    """Bound on ``||p - p_hat||_2^2 / ||p||_2^2`` for nearest-neighbour interpolation."""
    require_friis(fmap, "relative_error_bound")
    deltas = _deltas(deltas)
    prox = proximity_coefficient(fmap)
    energy = float(np.sum(fmap.alphas**2 / fmap.ds**3))
    return 9 / (128 * math.pi) * prox**2 / energy * float(np.sum(deltas**3))


def relative_error_bound_equal(n_sources: int, d: float, deltas) -> float:
    """:func:`relative_error_bound` when all sources share one ``alpha`` and ``d``."""
    deltas = _deltas(deltas)
    return n_sources * 9 / (128 * math.pi) * float(np.sum((deltas / d) ** 3))


@dataclass(frozen=True)
class SincError:
    """Measured offset-averaged squared L2 error of truncated sinc reconstruction."""

    mean: float
    per_offset: tuple[float, ...]
    residue: float

    @property
    def residue_ratio(self) -> float:
        return self.residue / self.mean if self.mean > 0 else math.inf


def _integration_grid(fmap: FreeSpaceMap, lo: float, hi: float, spacing: float) -> np.ndarray:
    coarse = spacing / 40
    pieces = [np.arange(lo, hi, coarse), [hi]]
    for xm, dm in zip(fmap.xs, fmap.ds):
        a, b = max(lo, xm - 50 * dm), min(hi, xm + 50 * dm)
        if a < b:
            step = min(coarse, dm / 20)
            pieces.append(np.arange(a, b, step))
    return np.unique(np.concatenate(pieces))


def truncation_residue(fmap: FreeSpaceMap, lo: float, hi: float) -> float:
    """Error energy a window ``[lo, hi]`` cannot see.

    Sums the map energy outside the window and the energy of the omitted
    series terms. By sinc orthogonality the latter is
    ``spacing * sum p(x_n)^2`` over the omitted samples, approximated here by
    the same outside integral.
    """

    def f(x):
        return fmap(x) ** 2

    outside = integrate.quad(f, -np.inf, lo, epsabs=0, epsrel=1e-10, limit=500)[0]
    outside += integrate.quad(f, hi, np.inf, epsabs=0, epsrel=1e-10, limit=500)[0]
    return 2 * outside


def sinc_avg_error(fmap: FreeSpaceMap, spacing: float, window: tuple[float, float], n_offsets: int = 20) -> SincError:
    """Average over ``n_offsets`` equispaced offsets of ``int_window (p - p_hat)^2``.

    Each offset uses every sample location inside ``window``; the squared
    error is integrated over the same window with Simpson's rule on a grid
    refined around each source.
    """
    if fmap.dim != 1:
        raise ValueError("sinc_avg_error needs a map with dim=1")
    if n_offsets < 1:
        raise ValueError("n_offsets must be >= 1")
    lo, hi = window
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    t = _integration_grid(fmap, lo, hi, spacing)
    p_t = fmap(t)
    errs = []
    for phi in np.arange(n_offsets) * (spacing / n_offsets):
        sampling = UniformSampling.covering(spacing, float(phi), lo, hi)
        values = fmap(sampling.positions())
        e2 = (p_t - sinc_from_values(values, sampling, t)) ** 2
        errs.append(float(integrate.simpson(e2, x=t)))
    return SincError(
        mean=float(np.mean(errs)),
        per_offset=tuple(errs),
        residue=truncation_residue(fmap, lo, hi),
    )
