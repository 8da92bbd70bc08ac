# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Identity-preserving refinement.

The identity distance between two renders is

    lambda_l1 * mean|a - b| + lambda_p * (1 / L) sum_l mean|pyr_l(a) - pyr_l(b)|

with a Gaussian pyramid of L levels standing in for a learned perceptual
metric. During refinement the descent direction of this distance, taken
against the source field from one random ring camera, is added to the
distillation velocity; both lambdas decay linearly to zero at
``decay_end_fraction`` of the refinement steps and stay there.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from radiance_edit.distillation.history import LossHistory
from radiance_edit.distillation.sds import distillation_velocity
from radiance_edit.refine.pyramid import gaussian_pyramid, pyramid_vjp
from radiance_edit.render.volume import ImageShapeError, render, render_loss_grad


@dataclasses.dataclass(frozen=True)
class RefineConfig:
    lambda_l1: float = 300.0
    lambda_p: float = 30000.0
    refine_steps: int = 1000
    decay_end_fraction: float = 0.5
    pyramid_levels: int = 4
    ipg_cameras: int = 1

    def __post_init__(self):
        if self.lambda_l1 < 0 or self.lambda_p < 0:
            raise ValueError(f"identity weights must be non-negative, got {self.lambda_l1}, {self.lambda_p}")
        if int(self.refine_steps) < 0:
            raise ValueError(f"refine_steps must be non-negative, got {self.refine_steps}")
        if not 0.0 < self.decay_end_fraction <= 1.0:
            raise ValueError(f"decay_end_fraction must lie in (0, 1], got {self.decay_end_fraction}")
        if int(self.pyramid_levels) < 1:
            raise ValueError(f"need at least one pyramid level, got {self.pyramid_levels}")
        if int(self.ipg_cameras) < 1:
            raise ValueError(f"need at least one identity camera per step, got {self.ipg_cameras}")


@dataclasses.dataclass
class RefineDiagnostics:
    tau: int
    tau_refine: int
    monitor_loss: float
    identity_distance: float
    lambda_scale: float
    camera_indices: list
    sigmas: list
    edit_velocity: object
    ipg_velocity: object


def _check_pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ImageShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def identity_distance(a, b, cfg):
    a, b = _check_pair(a, b)
    distance = cfg.lambda_l1 * float(np.mean(np.abs(a - b)))
    if cfg.lambda_p > 0:
        pa = gaussian_pyramid(a, cfg.pyramid_levels).levels
        pb = gaussian_pyramid(b, cfg.pyramid_levels).levels
        perceptual = sum(float(np.mean(np.abs(la - lb))) for la, lb in zip(pa, pb)) / len(pa)
        distance += cfg.lambda_p * perceptual
    return distance


def identity_distance_grad(a, b, cfg):
    """Gradient of :func:`identity_distance` with respect to ``a``; sign(0) = 0 at ties"""
    a, b = _check_pair(a, b)
    grad = cfg.lambda_l1 * np.sign(a - b) / a.size
    if cfg.lambda_p > 0:
        pa = gaussian_pyramid(a, cfg.pyramid_levels).levels
        pb = gaussian_pyramid(b, cfg.pyramid_levels).levels
        level_grads = [cfg.lambda_p * np.sign(la - lb) / (la.size * len(pa)) for la, lb in zip(pa, pb)]
        grad = grad + pyramid_vjp(level_grads, a.shape[0], a.shape[1])
    return grad


def lambda_scale(tau_refine, cfg):
    horizon = cfg.decay_end_fraction * cfg.refine_steps
    if horizon <= 0:
        return 0.0
    return max(0.0, 1.0 - float(tau_refine) / horizon)


def _identity_terms(params, src, cam, render_cfg, refine_cfg, scale=1.0):
    reference = render(src, cam, render_cfg)

    def pixel_loss(image, target):
        return identity_distance(image, target, refine_cfg), scale * identity_distance_grad(image, target, refine_cfg)

    distance, grad = render_loss_grad(params, cam, render_cfg, pixel_loss, reference)
    return -1.0 * grad, distance


def ipg_grad(params, src, cam, render_cfg, refine_cfg, scale=1.0):
    """
    Identity-preserving direction: the negated gradient of the identity
    distance between renders of ``params`` and of ``src`` (held constant).
    Moving along it decreases the distance.
    """
    params.check_compatible(src)
    direction, _distance = _identity_terms(params, src, cam, render_cfg, refine_cfg, scale)
    return direction


def refine_step(params, src, prompt, cameras, step_cfg, render_cfg, refine_cfg, sched, tau, tau_refine, rng):
    """
    One Euler step along the distillation velocity plus the decayed identity direction.

    The distillation velocity consumes ``rng`` first, then the identity
    camera indices are drawn from it.
    """
    params.check_compatible(src)
    scale = lambda_scale(tau_refine, refine_cfg)
    edit_velocity, loss, sigmas = distillation_velocity(params, prompt, cameras, step_cfg, render_cfg, sched, tau, rng)
    camera_indices = [int(i) for i in rng.integers(len(cameras), size=int(refine_cfg.ipg_cameras))]

    ipg_total = params.zeros_like().flat()
    distance = 0.0
    for index in camera_indices:
        direction, cam_distance = _identity_terms(params, src, cameras[index], render_cfg, refine_cfg, scale)
        ipg_total += direction.flat()
        distance += cam_distance
    ipg_velocity = params.with_flat(ipg_total / len(camera_indices))
    distance /= len(camera_indices)

    updated = params + step_cfg.learning_rate * (edit_velocity + ipg_velocity)
    diagnostics = RefineDiagnostics(
        tau=int(tau),
        tau_refine=int(tau_refine),
        monitor_loss=loss,
        identity_distance=distance,
        lambda_scale=scale,
        camera_indices=camera_indices,
        sigmas=sigmas,
        edit_velocity=edit_velocity,
        ipg_velocity=ipg_velocity,
    )
    return updated, diagnostics


def run_refinement(
    params, src, prompt, cameras, step_cfg, render_cfg, refine_cfg, sched, start_tau=0, rng=None, logger=None
):
    """
    Refinement loop; the noise schedule continues from ``start_tau``.

    :rtype: (FieldParams, LossHistory of monitoring losses,
             LossHistory with monitor_loss / identity_distance / lambda_scale /
             sigma / ipg_camera columns)
    """
    rng = np.random.default_rng(step_cfg.seed) if rng is None else rng
    history = LossHistory()
    trace = LossHistory(columns=("monitor_loss", "identity_distance", "lambda_scale", "sigma", "ipg_camera"))
    for tau_refine in range(int(refine_cfg.refine_steps)):
        tau = int(start_tau) + tau_refine
        params, diag = refine_step(
            params, src, prompt, cameras, step_cfg, render_cfg, refine_cfg, sched, tau, tau_refine, rng
        )
        history.append(tau, diag.monitor_loss)
        # sigma averages the per-view draws; ipg_camera is the first identity camera
        trace.append(
            tau,
            monitor_loss=diag.monitor_loss,
            identity_distance=diag.identity_distance,
            lambda_scale=diag.lambda_scale,
            sigma=float(np.mean(diag.sigmas)),
            ipg_camera=diag.camera_indices[0],
        )
        if logger is not None:
            logger.debug(
                f"refine step {tau_refine} loss {diag.monitor_loss:.6g} identity {diag.identity_distance:.6g} "
                f"lambda_scale {diag.lambda_scale:.3f}"
            )
    return params, history, trace
