# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Run configuration.

One JSON document configures fit, probe, edit and render runs:

  {
    "grid": [16, 16, 16],
    "init": {"density_mean": 0.0, "density_std": 0.1, "color_mean": 0.0, "color_std": 0.1},
    "render": {"samples": 64, "background": [1, 1, 1], "near": 0.8, "far": 4.8},
    "schedule": {"start": [0.75, 0.75], "end": [0.02, 0.4], "anneal_end_fraction": 0.8,
                 "sigma_max": 0.5, "fixed": false},
    "step": {"learning_rate": 2.0, "weighting": "unit", "noise_samples": 1},
    "probe": {"probe_steps": 50, "window": 10, "delta_min": null, "delta_min_scale": 10.0, "eta_max": 0.6},
    "refine": {"lambda_l1": 300.0, "lambda_p": 30000.0, "decay_end_fraction": 0.5,
               "pyramid_levels": 4, "ipg_cameras": 1},
    "ring": {"n_views": 4, "radius": 2.8, "elevation": 0.35, "resolution": 32},
    "fit": {"steps": 2000, "learning_rate": 0.05, "tolerance": 0.001, "target_checkpoint": null},
    "edit_steps": 1500,
    "refine_steps": 1000,
    "resolution_milestone": 0.5,
    "seed": 0,
    "eta": null,
    "skip_refine": false,
    "source_checkpoint": "source.pnrf",
    "prompt": "prompt.json",
    "output_dir": "run"
  }

Every key is optional; unknown keys are rejected. The ring section places the
fit and render cameras; edit, probe and verify use the prompt descriptor ring.
"""

from __future__ import annotations

import dataclasses

from typing import Optional, Tuple

from radiance_edit.distillation.schedule import NoiseSchedule
from radiance_edit.distillation.sds import StepConfig
from radiance_edit.field.params import check_dims, DimensionError, InitDistribution
from radiance_edit.load_config import ConfigError
from radiance_edit.oracle.descriptor import RingSpec
from radiance_edit.pipeline.fit import FitConfig
from radiance_edit.probe.eta import ProbeConfig, ProbeError
from radiance_edit.refine.ipg import RefineConfig
from radiance_edit.render.volume import RenderConfig

DEFAULT_EDIT_STEPS = 1500
DEFAULT_REFINE_STEPS = 1000
DEFAULT_MILESTONE = 0.5

_SECTIONS = ("grid", "init", "render", "schedule", "step", "probe", "refine", "ring", "fit")
_SCALARS = (
    "edit_steps",
    "refine_steps",
    "resolution_milestone",
    "seed",
    "eta",
    "skip_refine",
    "source_checkpoint",
    "prompt",
    "output_dir",
)


def _section(data, name, cls, exclude=()):
    values = data.get(name) or {}
    if not isinstance(values, dict):
        raise ConfigError(f"section '{name}' must be an object")
    known = {f.name for f in dataclasses.fields(cls)} - set(exclude)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown keys in section '{name}': {unknown}")
    return values


@dataclasses.dataclass(frozen=True)
class ScheduleOptions:
    start: Tuple[float, float] = (0.75, 0.75)
    end: Tuple[float, float] = (0.02, 0.4)
    anneal_end_fraction: float = 0.8
    sigma_max: float = 0.5
    fixed: bool = False
    fixed_bounds: Tuple[float, float] = (0.02, 0.98)

    def build(self, total_steps):
        if self.fixed:
            lo, hi = self.fixed_bounds
            return NoiseSchedule.fixed(lo, hi, total_steps=total_steps, sigma_max=self.sigma_max)
        return NoiseSchedule(total_steps, self.start, self.end, self.anneal_end_fraction, self.sigma_max)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    grid: Tuple[int, int, int] = (16, 16, 16)
    init: InitDistribution = dataclasses.field(default_factory=InitDistribution)
    render: RenderConfig = dataclasses.field(default_factory=RenderConfig)
    schedule: ScheduleOptions = dataclasses.field(default_factory=ScheduleOptions)
    step: StepConfig = dataclasses.field(default_factory=StepConfig)
    probe: ProbeConfig = dataclasses.field(default_factory=ProbeConfig)
    refine: RefineConfig = dataclasses.field(default_factory=RefineConfig)
    ring: RingSpec = dataclasses.field(default_factory=RingSpec)
    fit: FitConfig = dataclasses.field(default_factory=FitConfig)
    edit_steps: int = DEFAULT_EDIT_STEPS
    resolution_milestone: float = DEFAULT_MILESTONE
    seed: int = 0
    eta: Optional[float] = None
    skip_refine: bool = False
    source_checkpoint: Optional[str] = None
    prompt: Optional[str] = None
    output_dir: str = "run"

    @property
    def refine_steps(self):
        return self.refine.refine_steps

    def noise_schedule(self):
        """Annealing spans the edit steps; refinement keeps sampling at the final bounds"""
        return self.schedule.build(max(1, self.edit_steps))

    def milestone_step(self):
        return int(round(self.resolution_milestone * self.edit_steps))

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - set(_SECTIONS) - set(_SCALARS))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        try:
            edit_steps = int(data.get("edit_steps", DEFAULT_EDIT_STEPS))
            refine_steps = int(data.get("refine_steps", DEFAULT_REFINE_STEPS))
            milestone = float(data.get("resolution_milestone", DEFAULT_MILESTONE))
            if edit_steps < 0 or refine_steps < 0:
                raise ConfigError(f"step counts must be non-negative, got edit={edit_steps} refine={refine_steps}")
            if not 0.0 <= milestone <= 1.0:
                raise ConfigError(f"resolution_milestone must lie in [0, 1], got {milestone}")
            eta = data.get("eta")
            if eta is not None and not 0.0 <= float(eta) <= 1.0:
                raise ConfigError(f"eta must lie in [0, 1], got {eta}")

            ring = RingSpec(**_section(data, "ring", RingSpec))
            step_values = _section(data, "step", StepConfig, exclude=("seed",))
            refine_values = _section(data, "refine", RefineConfig, exclude=("refine_steps",))
            schedule_values = _section(data, "schedule", ScheduleOptions)
            for key in ("start", "end", "fixed_bounds"):
                if key in schedule_values:
                    schedule_values[key] = tuple(schedule_values[key])
            render_values = _section(data, "render", RenderConfig)
            config = cls(
                grid=check_dims(data.get("grid", (16, 16, 16))),
                init=InitDistribution(**_section(data, "init", InitDistribution)),
                render=RenderConfig(**render_values),
                schedule=ScheduleOptions(**schedule_values),
                step=StepConfig(seed=int(data.get("seed", 0)), **step_values),
                probe=ProbeConfig(**_section(data, "probe", ProbeConfig)),
                refine=RefineConfig(refine_steps=refine_steps, **refine_values),
                ring=ring,
                fit=FitConfig(**_section(data, "fit", FitConfig)),
                edit_steps=edit_steps,
                resolution_milestone=milestone,
                seed=int(data.get("seed", 0)),
                eta=None if eta is None else float(eta),
                skip_refine=bool(data.get("skip_refine", False)),
                source_checkpoint=data.get("source_checkpoint"),
                prompt=data.get("prompt"),
                output_dir=str(data.get("output_dir", "run")),
            )
            config.noise_schedule()
            config.ring.cameras()
            return config
        except ConfigError:
            raise
        except (TypeError, ValueError, DimensionError, ProbeError) as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    def to_dict(self):
        refine = dataclasses.asdict(self.refine)
        refine.pop("refine_steps")
        step = dataclasses.asdict(self.step)
        step.pop("seed")
        return {
            "grid": list(self.grid),
            "init": dataclasses.asdict(self.init),
            "render": dataclasses.asdict(self.render),
            "schedule": dataclasses.asdict(self.schedule),
            "step": step,
            "probe": dataclasses.asdict(self.probe),
            "refine": refine,
            "ring": dataclasses.asdict(self.ring),
            "fit": dataclasses.asdict(self.fit),
            "edit_steps": self.edit_steps,
            "refine_steps": self.refine_steps,
            "resolution_milestone": self.resolution_milestone,
            "seed": self.seed,
            "eta": self.eta,
            "skip_refine": self.skip_refine,
            "source_checkpoint": self.source_checkpoint,
            "prompt": self.prompt,
            "output_dir": self.output_dir,
        }


def apply_overrides(data, overrides):
    """Copy of ``data`` with the non-None command-line overrides set"""
    merged = dict(data)
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "fixed_schedule":
            if value:
                merged["schedule"] = dict(merged.get("schedule") or {}, fixed=True)
            continue
        merged[key] = value
    return merged
