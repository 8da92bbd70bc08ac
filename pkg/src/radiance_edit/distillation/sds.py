# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Score distillation as a generative ODE over field parameters.

For every view the current render z is noised, denoised by the prompt's
oracle, and the ascent residual w(sigma) (D(z + n; sigma) - z) is pulled back
through the renderer's vector-Jacobian product. The per-view pullbacks are
averaged and integrated with an explicit Euler step,
theta <- theta + rate * velocity.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from radiance_edit.distillation.history import LossHistory
from radiance_edit.distillation.schedule import sample_sigma
from radiance_edit.oracle.denoiser import check_noise_level, denoise, OracleError
from radiance_edit.render.volume import backprop, render_with_tape

WEIGHTINGS = ("unit", "snr")


class ViewMismatchError(ValueError):
    """Raised when cameras and prompt views do not line up"""

    pass


@dataclasses.dataclass(frozen=True)
class StepConfig:
    learning_rate: float = 2.0
    weighting: str = "unit"
    noise_samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting '{self.weighting}', choose from {WEIGHTINGS}")
        if int(self.noise_samples) < 1:
            raise ValueError(f"need at least one noise sample per step, got {self.noise_samples}")


def sigma_weight(weighting, sigma, prior_std):
    if weighting == "unit":
        return 1.0
    return sigma**2 / (prior_std**2 + sigma**2)


def _sds_terms(prompt, view, z, sigma, rng, weighting="unit", samples=1):
    """Mean ascent residual and monitoring loss 0.5 ||D(z + n) - (z + n)||^2 over ``samples`` noise draws"""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != prompt.view(view).means.shape[1:]:
        raise OracleError(f"render shape {z.shape} does not match prompt view {view}")
    sigma = check_noise_level(sigma)
    w = sigma_weight(weighting, sigma, prompt.prior_std)
    residual = np.zeros_like(z)
    loss = 0.0
    for _ in range(samples):
        noisy = z + rng.normal(0.0, sigma, size=z.shape)
        denoised = denoise(prompt, view, noisy, sigma)
        residual += w * (denoised - z)
        loss += 0.5 * float(np.sum((denoised - noisy) ** 2))
    return residual / samples, loss / samples


def sds_image_residual(prompt, view, z, sigma, rng, weighting="unit", samples=1):
    residual, _loss = _sds_terms(prompt, view, z, sigma, rng, weighting, samples)
    return residual


def check_views(prompt, cameras):
    if len(cameras) != prompt.n_views:
        raise ViewMismatchError(f"{len(cameras)} cameras for a prompt with {prompt.n_views} views")
    for i, cam in enumerate(cameras):
        if cam.resolution != prompt.resolution:
            raise ViewMismatchError(f"camera {i} renders {cam.resolution}, prompt targets are {prompt.resolution}")


def distillation_velocity(params, prompt, cameras, step_cfg, render_cfg, sched, tau, rng):
    """
    View-averaged ascent direction and monitoring loss at step ``tau``.

    :rtype: (FieldParams velocity, float loss, list of sampled sigmas)
    """
    check_views(prompt, cameras)
    total = params.zeros_like().flat()
    loss = 0.0
    sigmas = []
    for view, cam in enumerate(cameras):
        z, tape = render_with_tape(params, cam, render_cfg)
        sigma = sample_sigma(sched, tau, rng)
        residual, view_loss = _sds_terms(
            prompt, view, z, sigma, rng, step_cfg.weighting, int(step_cfg.noise_samples)
        )
        total += backprop(tape, residual).flat()
        loss += view_loss
        sigmas.append(sigma)
    n = len(cameras)
    return params.with_flat(total / n), loss / n, sigmas


def mv_step(params, prompt, cameras, step_cfg, render_cfg, sched, tau, rng):
    velocity, loss, _sigmas = distillation_velocity(params, prompt, cameras, step_cfg, render_cfg, sched, tau, rng)
    return params + step_cfg.learning_rate * velocity, loss


def run_distillation(
    params, prompt, cameras, step_cfg, render_cfg, sched, steps, start_tau=0, rng=None, history=None, logger=None
):
    """
    Run ``steps`` multi-view Euler steps starting at schedule step ``start_tau``.

    Without an explicit ``rng`` the generator is seeded from ``step_cfg.seed``.
    """
    if int(steps) < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    rng = np.random.default_rng(step_cfg.seed) if rng is None else rng
    history = LossHistory() if history is None else history
    for tau in range(int(start_tau), int(start_tau) + int(steps)):
        params, loss = mv_step(params, prompt, cameras, step_cfg, render_cfg, sched, tau, rng)
        history.append(tau, loss)
        if logger is not None:
            logger.debug(f"distillation step {tau} loss {loss:.6g}")
    return params, history
