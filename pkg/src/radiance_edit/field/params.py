# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Voxel radiance field parameters, the random initialization distribution
and parameter interpolation between a source field and a fresh draw.
"""

from __future__ import annotations

import dataclasses
import math

from typing import Tuple

import numpy as np

GridDims = Tuple[int, int, int]

DEFAULT_BBOX = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


class DimensionError(ValueError):
    """Raised when grid dimensions, array lengths or interpolation weights are invalid"""

    pass


class NonFiniteError(ValueError):
    """Raised when a parameter array contains NaN or Inf"""

    pass


def check_dims(dims):
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3 or min(dims) <= 0:
        raise DimensionError(f"grid dimensions must be three positive integers, got {dims}")
    return dims


@dataclasses.dataclass(frozen=True)
class BoundingBox:
    lo: Tuple[float, float, float]
    hi: Tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3 or any(a >= b for a, b in zip(lo, hi)):
            raise DimensionError(f"invalid bounding box {lo} -> {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def default(cls):
        return cls(*DEFAULT_BBOX)

    @property
    def center(self):
        return np.array([(a + b) / 2.0 for a, b in zip(self.lo, self.hi)])

    @property
    def extent(self):
        return np.array([b - a for a, b in zip(self.lo, self.hi)])

    def as_tuple(self):
        return self.lo + self.hi


@dataclasses.dataclass(frozen=True, eq=False)
class FieldParams:
    """
    Flat parameter vector of a dense voxel radiance field.

    ``raw_density`` holds one pre-activation value per grid vertex and
    ``raw_color`` three, laid out in C order over (nx, ny, nz[, rgb]).
    Activations (softplus / sigmoid) are applied by the renderer, so every
    real value is a valid parameter. Gradients share this layout and type.
    """

    grid_dims: GridDims
    raw_density: np.ndarray
    raw_color: np.ndarray
    bbox: BoundingBox = dataclasses.field(default_factory=BoundingBox.default)

    def __post_init__(self):
        dims = check_dims(self.grid_dims)
        n = dims[0] * dims[1] * dims[2]
        density = np.ascontiguousarray(self.raw_density, dtype=np.float64).reshape(-1)
        color = np.ascontiguousarray(self.raw_color, dtype=np.float64).reshape(-1)
        if density.size != n:
            raise DimensionError(f"raw_density has {density.size} entries, grid {dims} needs {n}")
        if color.size != 3 * n:
            raise DimensionError(f"raw_color has {color.size} entries, grid {dims} needs {3 * n}")
        if not (np.isfinite(density).all() and np.isfinite(color).all()):
            raise NonFiniteError("field parameters must be finite")
        bbox = self.bbox if isinstance(self.bbox, BoundingBox) else BoundingBox(self.bbox[:3], self.bbox[3:])
        object.__setattr__(self, "grid_dims", dims)
        object.__setattr__(self, "raw_density", density)
        object.__setattr__(self, "raw_color", color)
        object.__setattr__(self, "bbox", bbox)

    @property
    def n_voxels(self):
        nx, ny, nz = self.grid_dims
        return nx * ny * nz

    @property
    def size(self):
        return 4 * self.n_voxels

    def density_grid(self):
        return self.raw_density.reshape(self.grid_dims)

    def color_grid(self):
        return self.raw_color.reshape(self.grid_dims + (3,))

    def flat(self):
        return np.concatenate([self.raw_density, self.raw_color])

    def with_flat(self, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.size,):
            raise DimensionError(f"flat vector has shape {vector.shape}, expected ({self.size},)")
        n = self.n_voxels
        return FieldParams(self.grid_dims, vector[:n], vector[n:], self.bbox)

    def zeros_like(self):
        return self.with_flat(np.zeros(self.size))

    def copy(self):
        return FieldParams(self.grid_dims, self.raw_density.copy(), self.raw_color.copy(), self.bbox)

    def check_compatible(self, other):
        if not isinstance(other, FieldParams) or other.grid_dims != self.grid_dims:
            other_dims = getattr(other, "grid_dims", None)
            raise DimensionError(f"field dimensions differ: {self.grid_dims} vs {other_dims}")

    def __add__(self, other):
        self.check_compatible(other)
        return self.with_flat(self.flat() + other.flat())

    def __sub__(self, other):
        self.check_compatible(other)
        return self.with_flat(self.flat() - other.flat())

    def __mul__(self, scale):
        return self.with_flat(self.flat() * float(scale))

    __rmul__ = __mul__

    def dot(self, other):
        self.check_compatible(other)
        return float(np.dot(self.flat(), other.flat()))

    def norm(self):
        return float(np.linalg.norm(self.flat()))

    def equals(self, other):
        """Bit-exact comparison of dims, bbox and both arrays"""
        return (
            isinstance(other, FieldParams)
            and other.grid_dims == self.grid_dims
            and other.bbox == self.bbox
            and np.array_equal(other.raw_density, self.raw_density)
            and np.array_equal(other.raw_color, self.raw_color)
        )

    def to_storage_precision(self):
        """Round every entry to float32 so that checkpoints reproduce it bit-exactly"""
        return FieldParams(
            self.grid_dims,
            self.raw_density.astype(np.float32).astype(np.float64),
            self.raw_color.astype(np.float32).astype(np.float64),
            self.bbox,
        )


@dataclasses.dataclass(frozen=True)
class InitDistribution:
    """Independent Gaussians per parameter group, the P(Theta_0) of a freshly initialized field"""

    density_mean: float = 0.0
    density_std: float = 0.1
    color_mean: float = 0.0
    color_std: float = 0.1

    def __post_init__(self):
        for name in ("density_mean", "density_std", "color_mean", "color_std"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.density_std <= 0 or self.color_std <= 0:
            raise ValueError(
                f"initialization std must be > 0, got density_std={self.density_std} color_std={self.color_std}"
            )

    def mean_vector(self, n_voxels):
        return np.concatenate([np.full(n_voxels, self.density_mean), np.full(3 * n_voxels, self.color_mean)])

    def std_vector(self, n_voxels):
        return np.concatenate([np.full(n_voxels, self.density_std), np.full(3 * n_voxels, self.color_std)])


def sample_init(dist, dims, seed, bbox=None):
    """
    Draw a fresh field from ``dist``; identical seeds give identical fields.

    Samples are rounded to float32, the checkpoint precision.
    """
    dims = check_dims(dims)
    n = dims[0] * dims[1] * dims[2]
    rng = np.random.default_rng(seed)
    density = rng.normal(dist.density_mean, dist.density_std, size=n)
    color = rng.normal(dist.color_mean, dist.color_std, size=3 * n)
    params = FieldParams(dims, density, color, bbox if bbox is not None else BoundingBox.default())
    return params.to_storage_precision()


def lerp_params(src, rand, eta):
    """Component-wise (1 - eta) * src + eta * rand"""
    src.check_compatible(rand)
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DimensionError(f"interpolation weight must lie in [0, 1], got {eta}")
    return src.with_flat((1.0 - eta) * src.flat() + eta * rand.flat())


def perturb(src, dist, eta, seed):
    """
    Interpolate the source parameters toward a fresh initialization.

    The base is always ``src`` itself, never a state updated by a probe run.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DimensionError(f"perturbation amount must lie in [0, 1], got {eta}")
    fresh = sample_init(dist, src.grid_dims, seed, src.bbox)
    return lerp_params(src, fresh, eta)


def perturbed_log_density(theta, src, dist, eta):
    """
    Log density of ``theta`` under the perturbation distribution of ``src``.

    Change of variables through the inverse map (theta - (1 - eta) src) / eta,
    whose Jacobian contributes -d log(eta).
    """
    src.check_compatible(theta)
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise DimensionError(f"density is defined for eta in (0, 1], got {eta}")
    n = src.n_voxels
    x = (theta.flat() - (1.0 - eta) * src.flat()) / eta
    mean = dist.mean_vector(n)
    std = dist.std_vector(n)
    z = (x - mean) / std
    log_init = -0.5 * np.sum(z**2) - np.sum(np.log(std)) - 0.5 * x.size * math.log(2.0 * math.pi)
    return float(log_init - x.size * math.log(eta))
