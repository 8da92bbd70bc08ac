# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Annealed noise-level distribution over optimization steps.

At step tau the noise fraction is drawn from U(f_min(tau), f_max(tau)); the
bounds move linearly from ``start`` to ``end`` over the first
``anneal_end_fraction * total_steps`` steps and stay at ``end`` afterwards.
Fractions map to pixel-unit noise levels by sigma = fraction * sigma_max.
"""

from __future__ import annotations

import dataclasses
import math

from typing import Tuple

DEFAULT_START = (0.75, 0.75)
DEFAULT_END = (0.02, 0.4)
DEFAULT_ANNEAL_END_FRACTION = 0.8
DEFAULT_SIGMA_MAX = 0.5


@dataclasses.dataclass(frozen=True)
class NoiseSchedule:
    total_steps: int = 1500
    start: Tuple[float, float] = DEFAULT_START
    end: Tuple[float, float] = DEFAULT_END
    anneal_end_fraction: float = DEFAULT_ANNEAL_END_FRACTION
    sigma_max: float = DEFAULT_SIGMA_MAX

    def __post_init__(self):
        start = tuple(float(v) for v in self.start)
        end = tuple(float(v) for v in self.end)
        for name, (lo, hi) in (("start", start), ("end", end)):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"{name} bounds must satisfy 0 <= f_min <= f_max <= 1, got {(lo, hi)}")
        if end[0] > start[0] or end[1] > start[1]:
            raise ValueError(f"schedule bounds must not increase over time: {start} -> {end}")
        if not 0.0 < self.anneal_end_fraction <= 1.0:
            raise ValueError(f"anneal_end_fraction must lie in (0, 1], got {self.anneal_end_fraction}")
        if int(self.total_steps) < 1:
            raise ValueError(f"total_steps must be positive, got {self.total_steps}")
        if not math.isfinite(self.sigma_max) or self.sigma_max < 0.0:
            raise ValueError(f"sigma_max must be finite and non-negative, got {self.sigma_max}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        object.__setattr__(self, "total_steps", int(self.total_steps))

    @classmethod
    def fixed(cls, lo=0.02, hi=0.98, total_steps=1500, sigma_max=DEFAULT_SIGMA_MAX):
        """Constant U(lo, hi) at every step, the schedule of plain score distillation"""
        return cls(total_steps=total_steps, start=(lo, hi), end=(lo, hi), sigma_max=sigma_max)

    @property
    def anneal_steps(self):
        return self.anneal_end_fraction * self.total_steps

    def progress(self, tau):
        return min(1.0, max(0.0, float(tau)) / self.anneal_steps)

    def bounds(self, tau):
        p = self.progress(tau)
        lo = (1.0 - p) * self.start[0] + p * self.end[0]
        hi = (1.0 - p) * self.start[1] + p * self.end[1]
        return lo, hi

    def sample_fraction(self, tau, rng):
        lo, hi = self.bounds(tau)
        return min(max(rng.uniform(lo, hi), lo), hi)


def sample_sigma(sched, tau, rng):
    return sched.sigma_max * sched.sample_fraction(tau, rng)
