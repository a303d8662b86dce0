"""Fourier transform of 1D maps, variability bounds and spectral energy bounds.

Everything spectral assumes the Friis exponent (gamma = 2); the derivative
bound is the only quantity here with a general-gamma form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from rmbounds.mapmodel import FreeSpaceMap, SourceParams, proximity_coefficient

# sup_u 2u/(u^2+1)^2, reached at u = 1/sqrt(3)
FRIIS_DERIVATIVE_CONSTANT = 3**1.5 / 8

# decay (relative) at which spectral integrals are truncated
_ENVELOPE_CUTOFF = 1e-15


def require_friis(fmap: FreeSpaceMap, what: str):
    if fmap.dim != 1:
        raise ValueError(f"{what} needs a map with dim=1")
    if fmap.gamma != 2.0:
        raise NotImplementedError(f"{what} is only available for gamma=2")


@dataclass(frozen=True)
class SpectrumBounds:
    mag_envelope_coeff: float
    dmin_map: float
    dmax_map: float
    hp_energy_coeff: float
    total_energy_lb: float


def spectrum_bounds(fmap: FreeSpaceMap) -> SpectrumBounds:
    require_friis(fmap, "spectrum_bounds")
    dmin, dmax = float(fmap.ds.min()), float(fmap.ds.max())
    return SpectrumBounds(
        mag_envelope_coeff=math.pi * float(fmap.alphas.sum()) / dmin,
        dmin_map=dmin,
        dmax_map=dmax,
        hp_energy_coeff=math.pi**2 * fmap.n_sources * float(np.sum(fmap.alphas**2)) / (2 * dmin**3),
        total_energy_lb=total_energy_lower_bound(fmap),
    )


def ft_closed_form(fmap: FreeSpaceMap, kappa):
    """``F(k) = pi * sum alpha_m/d_m * exp(-j k x_m) * exp(-d_m |k|)``."""
    require_friis(fmap, "ft_closed_form")
    k = np.asarray(kappa, dtype=float)
    kk = k.reshape(-1, 1)
    terms = (fmap.alphas / fmap.ds) * np.exp(-1j * kk * fmap.xs) * np.exp(-fmap.ds * np.abs(kk))
    out = math.pi * terms.sum(axis=1)
    return complex(out[0]) if k.ndim == 0 else out.reshape(k.shape)


def ft_numeric(fmap: FreeSpaceMap, kappa, half_width: float, n_points: int):
    """Composite-Simpson approximation of the Fourier integral over ``[-W, W]``.

    The neglected tails contribute at most ``2 * sum(alpha) / W`` (less for
    ``kappa != 0``, where they oscillate).
    """
    if fmap.dim != 1:
        raise ValueError("ft_numeric needs a map with dim=1")
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    if n_points < 1001 or n_points % 2 == 0:
        raise ValueError(f"n_points must be odd and >= 1001, got {n_points}")
    x = np.linspace(-half_width, half_width, n_points)
    p = fmap(x)
    k = np.asarray(kappa, dtype=float)
    out = np.array(
        [integrate.simpson(p * np.exp(-1j * kj * x), x=x) for kj in k.ravel()], dtype=complex
    )
    return complex(out[0]) if k.ndim == 0 else out.reshape(k.shape)


def derivative_constant(gamma: float) -> float:
    """``sup_u |d/du (u^2 + 1)^(-gamma/2)|``, i.e. the slope bound for alpha = d = 1.

    The supremum sits at ``u = 1/sqrt(gamma + 1)``. For gamma = 2 this
    evaluates to exactly ``FRIIS_DERIVATIVE_CONSTANT``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return gamma * (gamma + 1) ** ((gamma + 1) / 2) / (gamma + 2) ** ((gamma + 2) / 2)


def derivative_bound(fmap: FreeSpaceMap) -> float:
    """Upper bound on ``|p'(x)|`` over the whole line."""
    if np.any(fmap.d2s <= 0):
        raise ValueError("derivative bound is singular for a source on the mapped line")
    if fmap.gamma == 2.0:
        return FRIIS_DERIVATIVE_CONSTANT * proximity_coefficient(fmap)
    return general_derivative_bound(fmap)


def general_derivative_bound(fmap: FreeSpaceMap) -> float:
    """``derivative_constant(gamma) * sum alpha_m / d_m^(gamma+1)`` for any gamma."""
    weighted = float(np.sum(fmap.alphas / fmap.ds ** (fmap.gamma + 1)))
    return derivative_constant(fmap.gamma) * weighted


def var_bounds(p_at_x: float, delta: float, dmin: float) -> tuple[float, float]:
    """Range of values any map with ``p(x) = p_at_x`` can take at ``x + delta``."""
    if not p_at_x > 0:
        raise ValueError("p_at_x must be positive")
    if not dmin > 0:
        raise ValueError("dmin must be positive")
    if delta == 0:
        return p_at_x, p_at_x
    # (g-1)/(g+1) = (r/(g+1))^2 with r = 2 dmin/|delta|; avoids cancellation and overflow
    r = 2 * dmin / abs(delta)
    if math.isinf(r):
        return p_at_x, p_at_x
    g = math.hypot(1.0, r)
    return p_at_x * (r / (g + 1)) ** 2, p_at_x * ((g + 1) / r) ** 2


def var_bound_extremal_map(p_at_x: float, delta: float, dmin: float, which: str = "upper") -> FreeSpaceMap:
    """Single-source map with ``p(0) = p_at_x`` attaining a bound of :func:`var_bounds` at ``delta``."""
    if which not in ("upper", "lower"):
        raise ValueError("which must be 'upper' or 'lower'")
    if delta == 0:
        raise ValueError("delta must be nonzero")
    s = math.copysign(math.sqrt(delta**2 + 4 * dmin**2), delta)
    x_star = (delta + s) / 2 if which == "upper" else (delta - s) / 2
    alpha = p_at_x * (x_star**2 + dmin**2)
    return FreeSpaceMap((SourceParams(x=x_star, d2=dmin**2, alpha=alpha),), dmin=dmin)


def hp_energy_bound(fmap: FreeSpaceMap, B: float) -> float:
    """Upper bound on the spectral energy above ``B``."""
    require_friis(fmap, "hp_energy_bound")
    if B < 0:
        raise ValueError("B must be >= 0")
    dmin = float(fmap.ds.min())
    coeff = math.pi**2 * fmap.n_sources * float(np.sum(fmap.alphas**2)) / (2 * dmin**3)
    return coeff * math.exp(-2 * dmin * B)


def total_energy_lower_bound(fmap: FreeSpaceMap) -> float:
    """Lower bound on the one-sided spectral energy ``int_0^inf |F|^2``."""
    require_friis(fmap, "total_energy_lower_bound")
    return math.pi**2 / 2 * float(np.sum(fmap.alphas**2 / fmap.ds**3))


def hf_fraction_bound(fmap: FreeSpaceMap, B: float) -> float:
    """Bound on the fraction of spectral energy above ``B``, clamped to 1."""
    require_friis(fmap, "hf_fraction_bound")
    if B < 0:
        raise ValueError("B must be >= 0")
    dmin, dmax = float(fmap.ds.min()), float(fmap.ds.max())
    return min(1.0, fmap.n_sources * (dmax / dmin) ** 3 * math.exp(-2 * dmin * B))


def _kappa_grid(fmap: FreeSpaceMap, lo: float) -> np.ndarray:
    dmin = float(fmap.ds.min())
    hi = lo + math.log(1 / _ENVELOPE_CUTOFF) / (2 * dmin)
    n = 4001
    spread = float(np.ptp(fmap.xs))
    if spread > 0:
        # >= 32 points per period of the inter-source beat
        n = max(n, int(32 * (hi - lo) * spread / (2 * math.pi)))
    n = min(n, 2_000_001)
    return np.linspace(lo, hi, n | 1)


def spectral_energy_above(fmap: FreeSpaceMap, B: float) -> float:
    """``int_B^inf |F(k)|^2 dk`` by Simpson quadrature on the closed-form transform."""
    require_friis(fmap, "spectral_energy_above")
    k = _kappa_grid(fmap, float(B))
    return float(integrate.simpson(np.abs(ft_closed_form(fmap, k)) ** 2, x=k))


def spatial_energy(fmap: FreeSpaceMap) -> float:
    """``int |p(x)|^2 dx`` over the real line by adaptive quadrature."""
    if fmap.dim != 1:
        raise ValueError("spatial_energy needs a map with dim=1")
    cuts = np.unique(fmap.xs)

    def f(x):
        return fmap(x) ** 2

    total = integrate.quad(f, -np.inf, cuts[0], epsabs=0, epsrel=1e-12, limit=500)[0]
    total += integrate.quad(f, cuts[-1], np.inf, epsabs=0, epsrel=1e-12, limit=500)[0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=500)[0]
    return float(total)
