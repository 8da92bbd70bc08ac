# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Emission-absorption volume rendering of a dense voxel field with exact
reverse-mode gradients.

Every ray is marched with ``samples`` uniform steps of length
delta = (far - near) / samples, sampled at step midpoints. At each sample the
raw density/color are trilinearly interpolated and activated
(softplus / sigmoid); samples outside the bounding box are empty.
The backward pass walks the compositing recurrence with the stored
per-sample intermediates instead of a general autodiff tape.
"""

from __future__ import annotations

import dataclasses

from typing import Tuple

import numpy as np

from scipy.special import expit

from radiance_edit.field.params import FieldParams


@dataclasses.dataclass(frozen=True)
class RenderConfig:
    samples: int = 64
    background: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    near: float = 0.8
    far: float = 4.8

    def __post_init__(self):
        background = tuple(float(v) for v in self.background)
        if int(self.samples) < 2:
            raise ValueError(f"need at least 2 samples per ray, got {self.samples}")
        if not self.near < self.far:
            raise ValueError(f"near clip {self.near} must be smaller than far clip {self.far}")
        if len(background) != 3 or min(background) < 0.0 or max(background) > 1.0:
            raise ValueError(f"background must be an RGB triple in [0, 1], got {self.background}")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "background", background)

    @property
    def delta(self):
        return (self.far - self.near) / self.samples


@dataclasses.dataclass
class RenderTape:
    """Per-sample intermediates of one forward pass, consumed by :func:`backprop`"""

    params: FieldParams
    shape: Tuple[int, int]
    corner_index: np.ndarray  # (rays, samples, 8)
    corner_weight: np.ndarray  # (rays, samples, 8), zero outside the box
    inside: np.ndarray  # (rays, samples)
    raw_density: np.ndarray  # interpolated pre-activation density
    color: np.ndarray  # activated color (rays, samples, 3)
    weight: np.ndarray  # T_i * alpha_i
    transmittance_after: np.ndarray  # T_{i+1}
    transmittance_final: np.ndarray  # (rays,)
    delta: float
    background: np.ndarray
    image: np.ndarray


class ImageShapeError(ValueError):
    """Raised when an image or image gradient does not match the camera resolution"""

    pass


def softplus(x):
    return np.logaddexp(0.0, x)


def _corner_weights(params, points):
    """Trilinear corner indices and weights for sample points (rays, samples, 3)"""
    dims = np.array(params.grid_dims)
    lo = np.array(params.bbox.lo)
    hi = np.array(params.bbox.hi)
    inside = np.all((points >= lo) & (points <= hi), axis=-1)

    coords = np.clip((points - lo) / (hi - lo) * (dims - 1), 0.0, dims - 1)
    base = np.minimum(np.floor(coords).astype(np.int64), np.maximum(dims - 2, 0))
    frac = coords - base
    upper = np.minimum(base + 1, dims - 1)

    ny, nz = params.grid_dims[1], params.grid_dims[2]
    indices = []
    weights = []
    for cx in (0, 1):
        ix = upper[..., 0] if cx else base[..., 0]
        wx = frac[..., 0] if cx else 1.0 - frac[..., 0]
        for cy in (0, 1):
            iy = upper[..., 1] if cy else base[..., 1]
            wy = frac[..., 1] if cy else 1.0 - frac[..., 1]
            for cz in (0, 1):
                iz = upper[..., 2] if cz else base[..., 2]
                wz = frac[..., 2] if cz else 1.0 - frac[..., 2]
                indices.append((ix * ny + iy) * nz + iz)
                weights.append(wx * wy * wz)
    corner_index = np.stack(indices, axis=-1)
    corner_weight = np.stack(weights, axis=-1) * inside[..., None]
    return corner_index, corner_weight, inside


def render_with_tape(params, cam, cfg):
    origin, dirs = cam.rays()
    height, width = cam.height, cam.width
    delta = cfg.delta
    t = cfg.near + (np.arange(cfg.samples) + 0.5) * delta
    points = origin + dirs.reshape(-1, 1, 3) * t[None, :, None]

    corner_index, corner_weight, inside = _corner_weights(params, points)
    raw_density = np.sum(corner_weight * params.raw_density[corner_index], axis=-1)
    colors = params.raw_color.reshape(-1, 3)
    raw_color = np.sum(corner_weight[..., None] * colors[corner_index], axis=-2)

    sigma = np.where(inside, softplus(raw_density), 0.0)
    color = expit(raw_color)
    optical = sigma * delta
    cumulative = np.cumsum(optical, axis=1)
    transmittance_after = np.exp(-cumulative)
    alpha = -np.expm1(-optical)
    weight = np.exp(-(cumulative - optical)) * alpha
    transmittance_final = transmittance_after[:, -1]

    background = np.array(cfg.background)
    pixels = np.sum(weight[..., None] * color, axis=1) + transmittance_final[:, None] * background
    image = pixels.reshape(height, width, 3)
    tape = RenderTape(
        params=params,
        shape=(height, width),
        corner_index=corner_index,
        corner_weight=corner_weight,
        inside=inside,
        raw_density=raw_density,
        color=color,
        weight=weight,
        transmittance_after=transmittance_after,
        transmittance_final=transmittance_final,
        delta=delta,
        background=background,
        image=image,
    )
    return image, tape


def backprop(tape, image_grad):
    """Vector-Jacobian product image_grad^T (d image / d params), as a FieldParams-shaped gradient"""
    image_grad = np.asarray(image_grad, dtype=np.float64)
    if image_grad.shape != tape.shape + (3,):
        raise ImageShapeError(f"image gradient has shape {image_grad.shape}, expected {tape.shape + (3,)}")
    g = image_grad.reshape(-1, 3)

    d_color = tape.weight[..., None] * g[:, None, :]
    color_dot_g = np.sum(tape.color * g[:, None, :], axis=-1)
    weighted = tape.weight * color_dot_g
    later = np.cumsum(weighted[:, ::-1], axis=1)[:, ::-1] - weighted
    background_dot_g = g @ tape.background
    d_optical = tape.transmittance_after * color_dot_g - later - (tape.transmittance_final * background_dot_g)[:, None]
    d_raw_density = np.where(tape.inside, d_optical * tape.delta * expit(tape.raw_density), 0.0)
    d_raw_color = d_color * tape.color * (1.0 - tape.color)

    params = tape.params
    n = params.n_voxels
    index = tape.corner_index.reshape(-1)
    grad_density = np.bincount(index, weights=(tape.corner_weight * d_raw_density[..., None]).reshape(-1), minlength=n)
    grad_color = np.stack(
        [
            np.bincount(index, weights=(tape.corner_weight * d_raw_color[..., c, None]).reshape(-1), minlength=n)
            for c in range(3)
        ],
        axis=-1,
    )
    return FieldParams(params.grid_dims, grad_density, grad_color.reshape(-1), params.bbox)


def render(params, cam, cfg):
    image, _tape = render_with_tape(params, cam, cfg)
    return image


def apply_image_grad(params, cam, cfg, image_grad):
    _image, tape = render_with_tape(params, cam, cfg)
    return backprop(tape, image_grad)


def l2_pixel_loss(image, target):
    """0.5 * ||image - target||^2 and its image gradient"""
    diff = image - target
    return 0.5 * float(np.sum(diff * diff)), diff


def render_loss_grad(params, cam, cfg, pixel_loss, target):
    """
    Loss of the rendered image and its exact gradient with respect to every raw parameter.

    :arg pixel_loss: callable ``(image, target) -> (loss, d loss / d image)``
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (cam.height, cam.width, 3):
        raise ImageShapeError(f"target has shape {target.shape}, camera renders {(cam.height, cam.width, 3)}")
    image, tape = render_with_tape(params, cam, cfg)
    loss, image_grad = pixel_loss(image, target)
    return float(loss), backprop(tape, image_grad)


def mean_squared_error(image, target):
    return float(np.mean((np.asarray(image) - np.asarray(target)) ** 2))
