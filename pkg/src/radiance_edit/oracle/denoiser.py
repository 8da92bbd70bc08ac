# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Analytic, prompt- and view-conditioned denoisers.

A prompt is an isotropic Gaussian-mixture image prior per view,
sum_k w_k N(mu_k, s^2 I). Under additive noise N(0, sigma^2 I) the posterior
mean is available in closed form:

    D(y; sigma) = sum_k r_k(y) (s^2 y + sigma^2 mu_k) / (s^2 + sigma^2)

with responsibilities r_k(y) proportional to w_k N(y; mu_k, (s^2 + sigma^2) I).
It satisfies D(y; sigma) = y + sigma^2 grad_y log p_sigma(y).
"""

from __future__ import annotations

import dataclasses
import math

from typing import List, Sequence

import numpy as np

from scipy.special import logsumexp, softmax

from radiance_edit.field.params import FieldParams
from radiance_edit.render.volume import render

DEFAULT_PRIOR_STD = 0.05


class OracleError(ValueError):
    """Raised for unknown views, mismatched resolutions or invalid noise levels"""

    pass


def check_noise_level(sigma):
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma < 0.0:
        raise OracleError(f"noise level must be finite and non-negative, got {sigma}")
    return sigma


@dataclasses.dataclass(frozen=True, eq=False)
class ViewTargets:
    """Mixture components of one view: weights (K,) and target images (K, height, width, 3)"""

    weights: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim != 4 or means.shape[-1] != 3 or means.shape[0] != weights.size:
            raise OracleError(f"targets must be (K, height, width, 3) with K={weights.size}, got {means.shape}")
        if weights.size == 0 or np.any(weights <= 0) or not np.isfinite(weights).all():
            raise OracleError(f"mixture weights must be positive, got {weights}")
        object.__setattr__(self, "weights", weights / weights.sum())
        object.__setattr__(self, "means", means)

    @property
    def resolution(self):
        return self.means.shape[1], self.means.shape[2]

    @property
    def mixture_mean(self):
        return np.tensordot(self.weights, self.means, axes=1)


@dataclasses.dataclass(frozen=True, eq=False)
class PromptSpec:
    prompt_id: str
    views: List[ViewTargets]
    prior_std: float = DEFAULT_PRIOR_STD

    def __post_init__(self):
        if not self.prior_std > 0 or not math.isfinite(self.prior_std):
            raise OracleError(f"prior std must be > 0, got {self.prior_std}")
        if not self.views:
            raise OracleError("a prompt needs at least one view")
        resolutions = {v.resolution for v in self.views}
        if len(resolutions) != 1:
            raise OracleError(f"all views must share one resolution, got {sorted(resolutions)}")
        object.__setattr__(self, "views", list(self.views))

    @property
    def n_views(self):
        return len(self.views)

    @property
    def resolution(self):
        return self.views[0].resolution

    def view(self, index):
        if not 0 <= int(index) < len(self.views):
            raise OracleError(f"prompt '{self.prompt_id}' has no view {index} ({len(self.views)} views)")
        return self.views[int(index)]


def _checked_input(targets, y):
    y = np.asarray(y, dtype=np.float64)
    if y.shape != targets.means.shape[1:]:
        raise OracleError(f"image shape {y.shape} does not match prompt targets {targets.means.shape[1:]}")
    return y


def _log_joint(targets, y, variance):
    sq = np.sum((y[None] - targets.means) ** 2, axis=(1, 2, 3))
    return np.log(targets.weights) - sq / (2.0 * variance)


def responsibilities(prompt, view, y, sigma):
    targets = prompt.view(view)
    y = _checked_input(targets, y)
    sigma = check_noise_level(sigma)
    return softmax(_log_joint(targets, y, prompt.prior_std**2 + sigma**2))


def denoise(prompt, view, y, sigma):
    """Exact posterior mean E[x | y] for the view's mixture prior"""
    targets = prompt.view(view)
    y = _checked_input(targets, y)
    sigma = check_noise_level(sigma)
    if sigma == 0.0:
        return y.copy()
    s2 = prompt.prior_std**2
    variance = s2 + sigma**2
    weights = softmax(_log_joint(targets, y, variance))
    component_means = (s2 * y[None] + sigma**2 * targets.means) / variance
    return np.tensordot(weights, component_means, axes=1)


def mv_denoise(prompt, views, ys, sigma):
    if len(views) != len(ys):
        raise OracleError(f"{len(views)} views but {len(ys)} images")
    return [denoise(prompt, view, y, sigma) for view, y in zip(views, ys)]


def log_density(prompt, view, y, sigma):
    """log p_sigma(y) of the noise-smoothed mixture"""
    targets = prompt.view(view)
    y = _checked_input(targets, y)
    sigma = check_noise_level(sigma)
    variance = prompt.prior_std**2 + sigma**2
    return float(logsumexp(_log_joint(targets, y, variance)) - 0.5 * y.size * math.log(2.0 * math.pi * variance))


def score(prompt, view, y, sigma):
    """grad_y log p_sigma(y)"""
    targets = prompt.view(view)
    y = _checked_input(targets, y)
    sigma = check_noise_level(sigma)
    variance = prompt.prior_std**2 + sigma**2
    weights = softmax(_log_joint(targets, y, variance))
    return np.tensordot(weights, targets.means - y[None], axes=1) / variance


def make_prompt_from_field(target, cameras, cfg, s=DEFAULT_PRIOR_STD, weights=None, prompt_id="edit"):
    """
    Build a prompt whose per-view targets are renders of one or several target fields.

    :arg target: a :class:`FieldParams` or a sequence of them
    :arg weights: mixture weights, one per target field (normalized)
    """
    if not s > 0:
        raise OracleError(f"prior std must be > 0, got {s}")
    fields: Sequence[FieldParams] = [target] if isinstance(target, FieldParams) else list(target)
    if not fields:
        raise OracleError("need at least one target field")
    if weights is None:
        weights = np.ones(len(fields))
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(fields),):
        raise OracleError(f"{len(fields)} target fields but {weights.size} weights")
    views = [ViewTargets(weights, np.stack([render(field, cam, cfg) for field in fields])) for cam in cameras]
    return PromptSpec(prompt_id, views, float(s))
