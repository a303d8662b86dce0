"""Multi-source free-space power maps restricted to a line or a plane.

A map is a superposition of Friis terms ``alpha / (|r - s|^2 + d^2)^(gamma/2)``
where ``s`` is the source position projected onto the mapped line/plane and
``d`` is the off-line (1D) or off-plane (2D) distance of the source.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from rmbounds import kernels

SPEED_OF_LIGHT = 299_792_458.0
_FOUR_PI = 4.0 * math.pi


def alpha_from_power(power: float, wavelength: float) -> float:
    """Friis numerator ``P (lambda / 4 pi)^2`` for isotropic antennas."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    if power < 0:
        raise ValueError(f"power must be non-negative, got {power!r}")
    return power * (wavelength / _FOUR_PI) ** 2


@dataclass(frozen=True)
class SourceParams:
    """One transmitter.

    ``x`` (and ``y`` for planar maps) is the projected position, ``d2`` the
    squared distance from the source to the mapped line/plane and ``alpha`` the
    Friis numerator. ``power`` is kept only when the source was specified by
    its transmit power.
    """

    x: float
    d2: float
    alpha: float
    y: float = 0.0
    power: float | None = None

    def __post_init__(self):
        if not self.d2 >= 0:
            raise ValueError(f"d2 must be >= 0, got {self.d2!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")
        if self.power is not None and self.power < 0:
            raise ValueError(f"power must be >= 0, got {self.power!r}")

    @property
    def d(self) -> float:
        return math.sqrt(self.d2)

    @classmethod
    def from_power(cls, x: float, d2: float, power: float, wavelength: float, y: float = 0.0):
        return cls(x=x, d2=d2, alpha=alpha_from_power(power, wavelength), y=y, power=power)


@dataclass(frozen=True)
class MappedRegion:
    """Half-open interval ``[lo, hi)``; ``ylo``/``yhi`` make it a rectangle."""

    lo: float
    hi: float
    ylo: float | None = None
    yhi: float | None = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty region: lo={self.lo!r} >= hi={self.hi!r}")
        if (self.ylo is None) != (self.yhi is None):
            raise ValueError("ylo and yhi must be given together")
        if self.ylo is not None and not self.ylo < self.yhi:
            raise ValueError(f"empty region: ylo={self.ylo!r} >= yhi={self.yhi!r}")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_planar(self) -> bool:
        return self.ylo is not None

    def grid(self, n: int) -> np.ndarray:
        """``n`` uniformly spaced points including ``lo`` and excluding ``hi``."""
        return self.lo + self.length * np.arange(n) / n


@dataclass(frozen=True)
class FreeSpaceMap:
    """Power map produced by ``len(sources)`` uncorrelated transmitters.

    Every source must sit at least ``dmin`` away from the mapped line/plane.
    """

    sources: tuple[SourceParams, ...]
    wavelength: float = 1.0
    gamma: float = 2.0
    dim: int = 1
    dmin: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if len(self.sources) < 1:
            raise ValueError("a map needs at least one source")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim!r}")
        if not self.dmin > 0:
            raise ValueError(f"dmin must be positive, got {self.dmin!r}")
        for k, s in enumerate(self.sources):
            if s.d < self.dmin:
                raise ValueError(
                    f"source {k} is {s.d:g} from the mapped region, closer than dmin={self.dmin:g}"
                )
            if s.power is not None:
                expected = alpha_from_power(s.power, self.wavelength)
                if not math.isclose(s.alpha, expected, rel_tol=1e-12, abs_tol=0.0):
                    raise ValueError(f"source {k}: alpha inconsistent with power and wavelength")

    @classmethod
    def from_arrays(cls, x, d, alpha, *, y=None, wavelength=1.0, gamma=2.0, dim=1, dmin=None):
        """Build a map from per-source positions, distances ``d`` (not squared) and alphas.

        ``dmin`` defaults to the smallest of ``d`` capped at 1.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = np.broadcast_to(np.asarray(d, dtype=float), x.shape)
        alpha = np.broadcast_to(np.asarray(alpha, dtype=float), x.shape)
        y = np.zeros_like(x) if y is None else np.broadcast_to(np.asarray(y, dtype=float), x.shape)
        if dmin is None:
            dmin = min(1.0, float(d.min()))
        sources = tuple(
            SourceParams(x=float(xi), d2=float(di) ** 2, alpha=float(ai), y=float(yi))
            for xi, di, ai, yi in zip(x, d, alpha, y)
        )
        return cls(sources, wavelength=wavelength, gamma=gamma, dim=dim, dmin=dmin)

    @cached_property
    def xs(self) -> np.ndarray:
        return np.array([s.x for s in self.sources])

    @cached_property
    def ys(self) -> np.ndarray:
        return np.array([s.y for s in self.sources])

    @cached_property
    def d2s(self) -> np.ndarray:
        return np.array([s.d2 for s in self.sources])

    @cached_property
    def ds(self) -> np.ndarray:
        return np.sqrt(self.d2s)

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array([s.alpha for s in self.sources])

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def __call__(self, x, y=None):
        if self.dim == 1:
            return eval_1d(self, x)
        return eval_2d(self, x, y)

    def with_gamma(self, gamma: float) -> "FreeSpaceMap":
        return FreeSpaceMap(self.sources, self.wavelength, gamma, self.dim, self.dmin)

    def scaled(self, factor: float) -> "FreeSpaceMap":
        """Scale every length (positions, distances, wavelength) by ``factor``; alphas unchanged."""
        sources = tuple(
            SourceParams(x=s.x * factor, d2=s.d2 * factor**2, alpha=s.alpha, y=s.y * factor)
            for s in self.sources
        )
        return FreeSpaceMap(sources, self.wavelength * factor, self.gamma, self.dim, self.dmin * factor)


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values[0])
    return values.reshape(np.shape(like))


def eval_1d(fmap: FreeSpaceMap, x):
    """Received power along the mapped line at ``x`` (scalar or array)."""
    if fmap.dim != 1:
        raise ValueError("eval_1d needs a map with dim=1")
    xa = np.asarray(x, dtype=float).ravel()
    vals = kernels.power_1d(xa, fmap.xs, fmap.d2s, fmap.alphas, float(fmap.gamma))
    return _scalar_or_array(vals, x)


def eval_1d_general(fmap: FreeSpaceMap, x):
    """Same as :func:`eval_1d` but always through the ``base**(gamma/2)`` form."""
    if fmap.dim != 1:
        raise ValueError("eval_1d_general needs a map with dim=1")
    xa = np.asarray(x, dtype=float).ravel()
    out = np.zeros_like(xa)
    half = 0.5 * fmap.gamma
    for xm, d2, a in zip(fmap.xs, fmap.d2s, fmap.alphas):
        u = xa - xm
        out += a / (u * u + d2) ** half
    return _scalar_or_array(out, x)


def eval_2d(fmap: FreeSpaceMap, x, y):
    """Received power on the mapped plane at ``(x, y)``."""
    if fmap.dim != 2:
        raise ValueError("eval_2d needs a map with dim=2")
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    vals = kernels.power_2d(
        xa.ravel(), ya.ravel(), fmap.xs, fmap.ys, fmap.d2s, fmap.alphas, float(fmap.gamma)
    )
    if xa.ndim == 0:
        return float(vals[0])
    return vals.reshape(xa.shape)


def deriv_1d(fmap: FreeSpaceMap, x):
    """Analytic ``dp/dx`` of a 1D Friis map (gamma = 2 only)."""
    if fmap.dim != 1:
        raise ValueError("deriv_1d needs a map with dim=1")
    if fmap.gamma != 2.0:
        raise NotImplementedError("analytic derivative only for gamma=2; use deriv_1d_fd")
    xa = np.asarray(x, dtype=float).ravel()
    vals = kernels.dpower_1d(xa, fmap.xs, fmap.d2s, fmap.alphas)
    return _scalar_or_array(vals, x)


def deriv_1d_fd(fmap: FreeSpaceMap, x, h: float = 1e-4):
    """Central finite-difference derivative; works for any gamma."""
    xa = np.asarray(x, dtype=float)
    return (eval_1d(fmap, xa + h) - eval_1d(fmap, xa - h)) / (2.0 * h)


def proximity_coefficient(fmap: FreeSpaceMap) -> float:
    """``sum alpha_m / d_m^3``."""
    if np.any(fmap.d2s <= 0):
        raise ValueError("proximity coefficient is singular for a source on the mapped region")
    return float(np.sum(fmap.alphas / fmap.ds**3))


def check_min_distance(fmap: FreeSpaceMap, region: MappedRegion, dmin: float) -> bool:
    """True iff every source stays at least ``dmin`` away from every point of ``region``."""
    if not dmin > 0:
        raise ValueError(f"dmin must be positive, got {dmin!r}")
    if fmap.dim == 1 or not region.is_planar:
        # the off-line distance already lower-bounds the 3D distance
        return bool(np.all(fmap.ds >= dmin))
    gx = np.maximum(0.0, np.maximum(region.lo - fmap.xs, fmap.xs - region.hi))
    gy = np.maximum(0.0, np.maximum(region.ylo - fmap.ys, fmap.ys - region.yhi))
    return bool(np.all(np.sqrt(gx**2 + gy**2 + fmap.d2s) >= dmin))


_MAP_KEYS = {"wavelength", "gamma", "dim", "dmin", "sources"}
_SOURCE_KEYS = {"x", "y", "d2", "alpha", "power_w"}


def map_from_dict(doc: dict) -> FreeSpaceMap:
    """Parse the JSON map description; unknown keys are rejected."""
    unknown = set(doc) - _MAP_KEYS
    if unknown:
        raise ValueError(f"unknown map keys: {sorted(unknown)}")
    if "sources" not in doc:
        raise ValueError("map description has no 'sources'")
    wavelength = float(doc.get("wavelength", 1.0))
    sources = []
    for k, src in enumerate(doc["sources"]):
        unknown = set(src) - _SOURCE_KEYS
        if unknown:
            raise ValueError(f"source {k}: unknown keys {sorted(unknown)}")
        if "x" not in src or "d2" not in src:
            raise ValueError(f"source {k}: 'x' and 'd2' are required")
        if ("alpha" in src) == ("power_w" in src):
            raise ValueError(f"source {k}: give exactly one of 'alpha' or 'power_w'")
        x, d2, y = float(src["x"]), float(src["d2"]), float(src.get("y", 0.0))
        if "alpha" in src:
            sources.append(SourceParams(x=x, d2=d2, alpha=float(src["alpha"]), y=y))
        else:
            sources.append(SourceParams.from_power(x, d2, float(src["power_w"]), wavelength, y=y))
    return FreeSpaceMap(
        tuple(sources),
        wavelength=wavelength,
        gamma=float(doc.get("gamma", 2.0)),
        dim=int(doc.get("dim", 1)),
        dmin=float(doc.get("dmin", 1.0)),
    )


def map_to_dict(fmap: FreeSpaceMap) -> dict:
    sources = []
    for s in fmap.sources:
        entry = {"x": s.x, "d2": s.d2}
        if fmap.dim == 2:
            entry["y"] = s.y
        if s.power is not None:
            entry["power_w"] = s.power
        else:
            entry["alpha"] = s.alpha
        sources.append(entry)
    return {
        "wavelength": fmap.wavelength,
        "gamma": fmap.gamma,
        "dim": fmap.dim,
        "dmin": fmap.dmin,
        "sources": sources,
    }


def load_map(path: str | Path) -> FreeSpaceMap:
    with open(path) as fh:
        return map_from_dict(json.load(fh))


def three_source_map() -> FreeSpaceMap:
    """Three-source example map: x=[1,5,8], d=[1,3,2], alpha=[1,3,3]."""
    return FreeSpaceMap.from_arrays([1.0, 5.0, 8.0], [1.0, 3.0, 2.0], [1.0, 3.0, 3.0])


def line_of_sources(x: Sequence[float], d: float, alpha: float, **kwargs) -> FreeSpaceMap:
    """Sources at positions ``x``, all at distance ``d`` with the same ``alpha``."""
    return FreeSpaceMap.from_arrays(x, d, alpha, **kwargs)
