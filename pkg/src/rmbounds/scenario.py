"""Synthetic urban scenes: free-space propagation with per-building blockage.

A scene is a rectangle ``[0, width) x [0, height)`` sampled on a grid of cell
centres. Buildings are axis-aligned boxes; every building crossed below its
roof by the straight transmitter-receiver segment attenuates that
transmitter's contribution by ``blockage_db``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rmbounds import kernels
from rmbounds.interp import KernelRidge, KNNEstimator, SimpleKriging
from rmbounds.mapmodel import SPEED_OF_LIGHT, alpha_from_power
from rmbounds.parallel import ordered_map

DEFAULT_FREQUENCY_HZ = 2.4e9

ESTIMATOR_DEFAULTS = {
    "knn": {"k": 5},
    "kriging": {"sigma_s": 3.0, "delta_s": 50.0},
    "krr": {"kernel_width": 10.0, "reg": 1e-3},
}


@dataclass(frozen=True)
class Building:
    x: float
    y: float
    w: float
    h: float
    height_m: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0 and self.height_m > 0):
            raise ValueError("building sizes must be positive")

    def contains(self, px, py):
        """Closed footprint test; walls count as indoors."""
        return (px >= self.x) & (px <= self.x + self.w) & (py >= self.y) & (py <= self.y + self.h)


@dataclass(frozen=True)
class Transmitter:
    x: float
    y: float
    power_w: float

    def __post_init__(self):
        if self.power_w < 0:
            raise ValueError("transmit power must be >= 0")


@dataclass(frozen=True)
class Scene2D:
    extent: tuple[float, float]
    buildings: tuple[Building, ...]
    transmitters: tuple[Transmitter, ...]
    rx_height: float = 2.0
    grid_spacing: float = 1.0
    blockage_db: float = 25.0
    frequency_hz: float = DEFAULT_FREQUENCY_HZ

    def __post_init__(self):
        width, height = self.extent
        if not (width > 0 and height > 0):
            raise ValueError("extent must be positive")
        if not self.grid_spacing > 0:
            raise ValueError("grid_spacing must be positive")
        if not self.frequency_hz > 0:
            raise ValueError("frequency_hz must be positive")
        if self.blockage_db < 0:
            raise ValueError("blockage_db must be >= 0")
        if not self.transmitters:
            raise ValueError("a scene needs at least one transmitter")
        object.__setattr__(self, "extent", (float(width), float(height)))
        object.__setattr__(self, "buildings", tuple(self.buildings))
        object.__setattr__(self, "transmitters", tuple(self.transmitters))
        for b in self.buildings:
            if b.x < 0 or b.y < 0 or b.x + b.w > width or b.y + b.h > height:
                raise ValueError(f"building {b} leaves the scene extent")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def grid_shape(self) -> tuple[int, int]:
        """Number of grid cells along x and y."""
        return (
            int(math.floor(self.extent[0] / self.grid_spacing + 1e-9)),
            int(math.floor(self.extent[1] / self.grid_spacing + 1e-9)),
        )

    def grid_points(self) -> np.ndarray:
        """Cell centres as an ``(nx * ny, 2)`` array, x varying slowest."""
        nx, ny = self.grid_shape
        gx = (np.arange(nx) + 0.5) * self.grid_spacing
        gy = (np.arange(ny) + 0.5) * self.grid_spacing
        xx, yy = np.meshgrid(gx, gy, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def indoor(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        mask = np.zeros(len(pts), dtype=bool)
        for b in self.buildings:
            mask |= b.contains(pts[:, 0], pts[:, 1])
        return mask

    def outdoor_mask(self) -> np.ndarray:
        """Outdoor flags on the grid, shaped ``grid_shape``."""
        return ~self.indoor(self.grid_points()).reshape(self.grid_shape)

    def box_array(self) -> np.ndarray:
        return np.array(
            [[b.x, b.y, b.x + b.w, b.y + b.h, b.height_m] for b in self.buildings], dtype=float
        ).reshape(-1, 5)


@dataclass(frozen=True)
class TrialConfig:
    subregion_size: float = 32.0
    n_measurements: int = 100
    n_trials: int = 50
    seed: int = 0
    max_redraws: int = 10_000

    def __post_init__(self):
        if not self.subregion_size > 0:
            raise ValueError("subregion_size must be positive")
        if self.n_measurements < 1 or self.n_trials < 1:
            raise ValueError("n_measurements and n_trials must be >= 1")


def _tx_positions(scene: Scene2D, tx_height: float) -> np.ndarray:
    if not tx_height > scene.rx_height:
        raise ValueError(f"tx_height {tx_height} must exceed rx_height {scene.rx_height}")
    return np.array([[t.x, t.y, tx_height] for t in scene.transmitters], dtype=float)


def blocked_counts(scene: Scene2D, tx_height: float, points) -> np.ndarray:
    """``(n_tx, n_points)`` count of buildings each segment crosses below the roof."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return kernels.blockage_counts(_tx_positions(scene, tx_height), pts, scene.rx_height, scene.box_array())


def scene_power_points(scene: Scene2D, tx_height: float, points) -> np.ndarray:
    """Received power in watts at each of ``points`` (all must be outdoors)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if np.any(scene.indoor(pts)):
        raise ValueError("scene power is only defined at outdoor points")
    tx = _tx_positions(scene, tx_height)
    counts = blocked_counts(scene, tx_height, pts)
    lam = scene.wavelength
    total = np.zeros(len(pts))
    for i, t in enumerate(scene.transmitters):
        r2 = (pts[:, 0] - tx[i, 0]) ** 2 + (pts[:, 1] - tx[i, 1]) ** 2 + (tx_height - scene.rx_height) ** 2
        loss = 10.0 ** (-scene.blockage_db * counts[i] / 10.0)
        total += alpha_from_power(t.power_w, lam) / r2 * loss
    return total


def scene_power(scene: Scene2D, tx_height: float, point) -> float:
    """Received power at one outdoor point."""
    return float(scene_power_points(scene, tx_height, np.asarray(point, dtype=float).reshape(1, 2))[0])


def manhattan_scene(blockage_db: float = 25.0) -> Scene2D:
    """Fixed 47 m x 56 m block layout with five street-level transmitters."""
    return load_scene(Path(__file__).with_name("data") / "manhattan.json", blockage_db=blockage_db)


def random_scene(
    seed: int,
    extent: tuple[float, float] = (47.0, 56.0),
    n_buildings: int = 8,
    n_transmitters: int = 5,
    size_range: tuple[float, float] = (5.0, 12.0),
    height_range: tuple[float, float] = (8.0, 40.0),
    power_w: float = 0.01,
    blockage_db: float = 25.0,
) -> Scene2D:
    """Seeded layout of non-overlapping buildings and outdoor transmitters."""
    rng = np.random.default_rng(seed)
    width, height = extent
    buildings: list[Building] = []
    for _ in range(1000 * n_buildings):
        if len(buildings) == n_buildings:
            break
        w, h = rng.uniform(*size_range, size=2)
        b = Building(
            float(rng.uniform(0, width - w)), float(rng.uniform(0, height - h)), float(w), float(h),
            float(rng.uniform(*height_range)),
        )
        # keep a one-metre street between buildings
        if all(
            b.x + b.w + 1 <= o.x or o.x + o.w + 1 <= b.x or b.y + b.h + 1 <= o.y or o.y + o.h + 1 <= b.y
            for o in buildings
        ):
            buildings.append(b)
    partial = Scene2D(extent, tuple(buildings), (Transmitter(0.0, 0.0, power_w),), blockage_db=blockage_db)
    txs: list[Transmitter] = []
    while len(txs) < n_transmitters:
        x, y = rng.uniform(0, width), rng.uniform(0, height)
        if not partial.indoor([[x, y]])[0]:
            txs.append(Transmitter(float(x), float(y), power_w))
    return Scene2D(extent, tuple(buildings), tuple(txs), blockage_db=blockage_db)


_SCENE_KEYS = {"extent", "buildings", "transmitters", "rx_height", "grid_spacing", "blockage_db", "frequency_hz"}
_BUILDING_KEYS = {"x", "y", "w", "h", "height_m"}
_TX_KEYS = {"x", "y", "power_w"}


def _check_keys(obj: dict, allowed: set, what: str, required: set | None = None):
    if not isinstance(obj, dict):
        raise ValueError(f"{what} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown {what} keys: {sorted(unknown)}")
    missing = (required if required is not None else allowed) - set(obj)
    if missing:
        raise ValueError(f"missing {what} keys: {sorted(missing)}")


def scene_from_dict(doc: dict, **overrides) -> Scene2D:
    _check_keys(doc, _SCENE_KEYS, "scene", required={"extent", "buildings", "transmitters"})
    buildings = []
    for b in doc["buildings"]:
        _check_keys(b, _BUILDING_KEYS, "building")
        buildings.append(Building(**{k: float(v) for k, v in b.items()}))
    txs = []
    for t in doc["transmitters"]:
        _check_keys(t, _TX_KEYS, "transmitter")
        txs.append(Transmitter(**{k: float(v) for k, v in t.items()}))
    extent = doc["extent"]
    if len(extent) != 2:
        raise ValueError("extent must be [width, height]")
    kwargs = {k: float(doc[k]) for k in ("rx_height", "grid_spacing", "blockage_db", "frequency_hz") if k in doc}
    kwargs.update(overrides)
    return Scene2D((float(extent[0]), float(extent[1])), tuple(buildings), tuple(txs), **kwargs)


def scene_to_dict(scene: Scene2D) -> dict:
    return {
        "extent": list(scene.extent),
        "buildings": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h, "height_m": b.height_m} for b in scene.buildings],
        "transmitters": [{"x": t.x, "y": t.y, "power_w": t.power_w} for t in scene.transmitters],
        "rx_height": scene.rx_height,
        "grid_spacing": scene.grid_spacing,
        "blockage_db": scene.blockage_db,
        "frequency_hz": scene.frequency_hz,
    }


def load_scene(path: str | Path, **overrides) -> Scene2D:
    with open(path) as fh:
        return scene_from_dict(json.load(fh), **overrides)


@dataclass(frozen=True)
class Draw:
    """One trial's geometry: evaluation points and the measured subset (flat grid indices)."""

    eval_idx: np.ndarray
    meas_idx: np.ndarray


@dataclass
class DrawSet:
    draws: list[Draw] = field(default_factory=list)
    n_redrawn: int = 0


def draw_trials(scene: Scene2D, trial: TrialConfig) -> DrawSet:
    """Sub-regions and measurement locations for every trial.

    Trial ``i`` draws from a generator seeded with ``(seed, i)``, so the
    draws do not depend on the transmitter height or the estimator. A
    sub-region with fewer outdoor points than ``n_measurements`` is redrawn
    and counted.
    """
    nx, ny = scene.grid_shape
    size = int(round(trial.subregion_size / scene.grid_spacing))
    if size > nx or size > ny:
        raise ValueError("sub-region does not fit in the scene")
    outdoor = scene.outdoor_mask()
    flat = np.arange(nx * ny).reshape(nx, ny)
    out = DrawSet()
    for i in range(trial.n_trials):
        rng = np.random.default_rng([trial.seed, i])
        for attempt in range(trial.max_redraws + 1):
            ix = int(rng.integers(0, nx - size + 1))
            iy = int(rng.integers(0, ny - size + 1))
            window = outdoor[ix : ix + size, iy : iy + size]
            idx = flat[ix : ix + size, iy : iy + size][window]
            if len(idx) >= trial.n_measurements:
                break
            out.n_redrawn += 1
        else:
            raise RuntimeError(f"trial {i}: no sub-region with {trial.n_measurements} outdoor points")
        meas = np.sort(rng.choice(idx, size=trial.n_measurements, replace=False))
        out.draws.append(Draw(eval_idx=idx, meas_idx=meas))
    return out


def _make_estimator(name: str, points, values, params: dict):
    if name == "knn":
        return KNNEstimator(points, values, **params)
    if name == "kriging":
        return SimpleKriging(points, values, **params)
    if name == "krr":
        return KernelRidge(points, values, **params)
    raise ValueError(f"unknown estimator {name!r}")


@dataclass(frozen=True)
class HeightResult:
    height_m: float
    estimator: str
    nmse: float
    nmse_median: float
    n_trials: int
    n_redrawn: int


def _grid_power(scene: Scene2D, tx_height: float) -> np.ndarray:
    """Power on every grid point; indoor points are NaN."""
    pts = scene.grid_points()
    outdoor = scene.outdoor_mask().ravel()
    power = np.full(len(pts), np.nan)
    power[outdoor] = scene_power_points(scene, tx_height, pts[outdoor])
    return power


def run_height_sweep(
    scene: Scene2D,
    heights,
    trial: TrialConfig,
    estimator: str,
    params: dict | None = None,
) -> list[HeightResult]:
    """NMSE of ``estimator`` at each transmitter height.

    ``nmse`` is the ratio of summed squared errors to summed squared powers
    over all trials; ``nmse_median`` is the median of per-trial ratios.
    """
    heights = [float(h) for h in heights]
    if not heights:
        raise ValueError("heights must be nonempty")
    if estimator not in ESTIMATOR_DEFAULTS:
        raise ValueError(f"unknown estimator {estimator!r}")
    kw = dict(ESTIMATOR_DEFAULTS[estimator], **(params or {}))
    draws = draw_trials(scene, trial)
    pts = scene.grid_points()

    def one_height(h: float) -> HeightResult:
        power = _grid_power(scene, h)
        err_sum = ref_sum = 0.0
        ratios = []
        for dr in draws.draws:
            model = _make_estimator(estimator, pts[dr.meas_idx], power[dr.meas_idx], kw)
            truth = power[dr.eval_idx]
            err = float(np.sum((truth - model.predict(pts[dr.eval_idx])) ** 2))
            ref = float(np.sum(truth**2))
            err_sum += err
            ref_sum += ref
            ratios.append(err / ref)
        return HeightResult(h, estimator, err_sum / ref_sum, float(np.median(ratios)), trial.n_trials, draws.n_redrawn)

    return ordered_map(one_height, heights)
