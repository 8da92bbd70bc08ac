# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Adaptive selection of the perturbation amount eta.

A short burst of edit-prompt distillation is run from a copy of the source
field. The change between the mean of the last and the first ``window``
losses, delta_L, measures how readily the source moves toward the edit;
eta follows the inverted exponential decay

    eta = max(0, eta_max (1 - 2 ** (-(delta_L + delta_min) / delta_min)))

Loss magnitudes here are those of the monitoring loss, so delta_min is by
default rescaled to ``delta_min_scale`` standard deviations of the first
window; an absolute ``delta_min`` overrides it.
"""

from __future__ import annotations

import dataclasses
import math
import time

from typing import Optional

import numpy as np

from radiance_edit.distillation.history import LossHistory
from radiance_edit.distillation.sds import run_distillation
from radiance_edit.field.params import perturb

REFERENCE_DELTA_MIN = 1000.0
DEFAULT_ETA_MAX = 0.6


class ProbeError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class ProbeConfig:
    probe_steps: int = 50
    window: int = 10
    delta_min: Optional[float] = None
    delta_min_scale: float = 10.0
    eta_max: float = DEFAULT_ETA_MAX

    def __post_init__(self):
        if int(self.window) < 1 or int(self.probe_steps) < 2 * int(self.window):
            raise ProbeError(f"probe_steps ({self.probe_steps}) must be at least twice the window ({self.window})")
        if self.delta_min is not None and not self.delta_min > 0:
            raise ProbeError(f"delta_min must be positive, got {self.delta_min}")
        if not self.delta_min_scale > 0:
            raise ProbeError(f"delta_min_scale must be positive, got {self.delta_min_scale}")
        if not 0.0 < self.eta_max <= 1.0:
            raise ProbeError(f"eta_max must lie in (0, 1], got {self.eta_max}")

    def resolve_delta_min(self, history):
        if self.delta_min is not None:
            return float(self.delta_min)
        first = np.asarray(history)[: self.window]
        spread = float(np.std(first, ddof=1)) if first.size > 1 else 0.0
        # a perfectly flat window leaves the ratio undefined; fall back to its magnitude
        scale = spread if spread > 0 else max(abs(float(np.mean(first))), 1e-12)
        return self.delta_min_scale * scale


@dataclasses.dataclass
class ProbeReport:
    history: LossHistory
    delta_L: float
    eta: float
    delta_min: float
    duration_ms: float

    def to_dict(self):
        return {
            "history": [float(v) for v in self.history.losses],
            "delta_L": self.delta_L,
            "eta": self.eta,
            "delta_min": self.delta_min,
            "duration_ms": self.duration_ms,
        }


def _losses(history):
    return history.losses if isinstance(history, LossHistory) else np.asarray(history, dtype=np.float64)


def loss_decrease(history, window=10):
    """Mean of the last ``window`` losses minus mean of the first ``window`` (negative: loss went down)"""
    losses = _losses(history)
    if window < 1 or losses.size < 2 * window:
        raise ProbeError(f"history of {losses.size} losses is too short for window {window}")
    return float(np.mean(losses[-window:]) - np.mean(losses[:window]))


def determine_eta(delta_L, delta_min, eta_max):
    if not delta_min > 0:
        raise ProbeError(f"delta_min must be positive, got {delta_min}")
    if not 0.0 < eta_max <= 1.0:
        raise ProbeError(f"eta_max must lie in (0, 1], got {eta_max}")
    exponent = -(delta_L + delta_min) / delta_min
    # 2 ** exponent overflows for very negative delta_L, where the clamp yields 0 anyway
    if exponent > 1000.0:
        return 0.0
    return max(0.0, eta_max * (1.0 - math.pow(2.0, exponent)))


def probe_and_select(src, prompt, cameras, step_cfg, render_cfg, sched, probe_cfg, rng=None, logger=None):
    """
    Probe the loss landscape with the edit prompt and pick eta.

    The probe runs on a copy; its parameter updates are discarded and the
    caller's ``src`` is never modified.
    """
    started = time.perf_counter()
    if logger is not None:
        logger.info(f"*** Starting landscape probe ({probe_cfg.probe_steps} steps) ***")
    _probed, history = run_distillation(
        src.copy(), prompt, cameras, step_cfg, render_cfg, sched, probe_cfg.probe_steps, rng=rng, logger=logger
    )
    delta_L = loss_decrease(history, probe_cfg.window)
    delta_min = probe_cfg.resolve_delta_min(history.losses)
    eta = determine_eta(delta_L, delta_min, probe_cfg.eta_max)
    duration_ms = 1000.0 * (time.perf_counter() - started)
    if logger is not None:
        logger.info(f"probe delta_L={delta_L:.6g} delta_min={delta_min:.6g} eta={eta:.4f}")
    return ProbeReport(history, delta_L, eta, delta_min, duration_ms)


def perturb_and_revise_init(src, report, dist, seed):
    return perturb(src, dist, report.eta, seed)
