# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Fit a field to target views by plain L2 render loss, optimized with Adam.
"""

from __future__ import annotations

import dataclasses

from typing import Optional

import numpy as np

from radiance_edit.distillation.history import LossHistory
from radiance_edit.field.params import NonFiniteError
from radiance_edit.render.volume import l2_pixel_loss, render_loss_grad


class NumericalError(RuntimeError):
    """Optimization did not converge or produced non-finite parameters"""

    pass


@dataclasses.dataclass(frozen=True)
class FitConfig:
    steps: int = 2000
    learning_rate: float = 0.05
    tolerance: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    target_checkpoint: Optional[str] = None

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ValueError(f"fit needs at least one step, got {self.steps}")
        if not self.learning_rate > 0:
            raise ValueError(f"fit learning rate must be positive, got {self.learning_rate}")
        if not self.tolerance > 0:
            raise ValueError(f"fit tolerance must be positive, got {self.tolerance}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")


@dataclasses.dataclass
class FitResult:
    params: object
    history: LossHistory
    converged: bool

    @property
    def final_mse(self):
        return float(self.history.losses[-1]) if len(self.history) else float("nan")


def views_loss_grad(params, cameras, targets, render_cfg):
    """Per-pixel MSE averaged over views, and the gradient of the mean 0.5 * squared error"""
    total = params.zeros_like().flat()
    sq = 0.0
    count = 0
    for cam, target in zip(cameras, targets):
        loss, grad = render_loss_grad(params, cam, render_cfg, l2_pixel_loss, target)
        total += grad.flat()
        sq += 2.0 * loss
        count += np.size(target)
    return sq / count, params.with_flat(total / len(cameras))


def fit_field(params, cameras, targets, render_cfg, fit_cfg, logger=None):
    """
    Adam on the raw parameters until the mean per-pixel MSE drops below
    ``fit_cfg.tolerance`` or ``fit_cfg.steps`` are spent.

    The history records the MSE before each update.
    """
    if len(cameras) != len(targets) or not cameras:
        raise ValueError(f"{len(cameras)} cameras for {len(targets)} target views")
    history = LossHistory()
    theta = params.flat()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    converged = False
    for step in range(int(fit_cfg.steps)):
        mse, grad = views_loss_grad(params.with_flat(theta), cameras, targets, render_cfg)
        if not np.isfinite(mse):
            raise NumericalError(f"fit loss became non-finite at step {step}")
        history.append(step, mse)
        if mse < fit_cfg.tolerance:
            converged = True
            break
        g = grad.flat()
        m = fit_cfg.beta1 * m + (1.0 - fit_cfg.beta1) * g
        v = fit_cfg.beta2 * v + (1.0 - fit_cfg.beta2) * g * g
        m_hat = m / (1.0 - fit_cfg.beta1 ** (step + 1))
        v_hat = v / (1.0 - fit_cfg.beta2 ** (step + 1))
        theta = theta - fit_cfg.learning_rate * m_hat / (np.sqrt(v_hat) + fit_cfg.epsilon)
        if logger is not None and step % 100 == 0:
            logger.debug(f"fit step {step} mse {mse:.6g}")
    try:
        fitted = params.with_flat(theta)
    except NonFiniteError as e:
        raise NumericalError(f"fit produced non-finite parameters: {e}") from e
    if logger is not None:
        level = logger.info if converged else logger.warning
        level(f"fit finished after {len(history)} evaluations, mse {history.losses[-1]:.6g}, converged={converged}")
    return FitResult(fitted, history, converged)
