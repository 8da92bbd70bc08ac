# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Prompt descriptors on disk: target checkpoints, mixture weights and the
camera ring the targets are rendered from. The JSON document looks like

  {
    "prompt_id": "object_moved",
    "prior_std": 0.05,
    "targets": [{"checkpoint": "target.pnrf", "weight": 1.0}],
    "ring": {"n_views": 4, "radius": 2.8, "elevation": 0.35, "fov": 0.698, "resolution": 32}
  }

Checkpoint paths are resolved relative to the descriptor file.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os

from typing import List, Optional

from radiance_edit.field.checkpoint import atomic_write_bytes, load_checkpoint
from radiance_edit.oracle.denoiser import DEFAULT_PRIOR_STD, make_prompt_from_field, OracleError
from radiance_edit.render.camera import DEFAULT_FOV, orbit_cameras


@dataclasses.dataclass(frozen=True)
class RingSpec:
    n_views: int = 4
    radius: float = 2.8
    elevation: float = 0.35
    fov: float = DEFAULT_FOV
    resolution: int = 32

    def cameras(self, center=(0.0, 0.0, 0.0), resolution=None):
        res = self.resolution if resolution is None else resolution
        return orbit_cameras(self.n_views, self.radius, self.elevation, res, center=center, fov=self.fov)


@dataclasses.dataclass(frozen=True)
class TargetRef:
    checkpoint: str
    weight: float = 1.0


@dataclasses.dataclass(frozen=True)
class PromptDescriptor:
    prompt_id: str
    targets: List[TargetRef]
    ring: RingSpec = dataclasses.field(default_factory=RingSpec)
    prior_std: float = DEFAULT_PRIOR_STD
    base_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, data, base_dir=None):
        try:
            targets = [TargetRef(str(t["checkpoint"]), float(t.get("weight", 1.0))) for t in data["targets"]]
            ring = RingSpec(**data.get("ring", {}))
            prompt_id = str(data["prompt_id"])
            prior_std = float(data.get("prior_std", DEFAULT_PRIOR_STD))
            ring.cameras()
        except (KeyError, TypeError, ValueError) as e:
            raise OracleError(f"invalid prompt descriptor: {e}") from e
        if not targets:
            raise OracleError("prompt descriptor lists no targets")
        total = math.fsum(t.weight for t in targets)
        if total <= 0 or any(t.weight <= 0 for t in targets):
            raise OracleError("prompt descriptor weights must be positive")
        targets = [TargetRef(t.checkpoint, t.weight / total) for t in targets]
        return cls(prompt_id, targets, ring, prior_std, base_dir)

    def to_dict(self):
        return {
            "prompt_id": self.prompt_id,
            "prior_std": self.prior_std,
            "targets": [dataclasses.asdict(t) for t in self.targets],
            "ring": dataclasses.asdict(self.ring),
        }

    def checkpoint_path(self, ref):
        if os.path.isabs(ref.checkpoint) or self.base_dir is None:
            return ref.checkpoint
        return os.path.join(self.base_dir, ref.checkpoint)

    def load_fields(self):
        return [load_checkpoint(self.checkpoint_path(t)) for t in self.targets]

    def build(self, render_cfg, resolution=None, fields=None):
        """
        Render the target checkpoints into a :class:`PromptSpec`.

        :rtype: (PromptSpec, list of Camera)
        """
        fields = self.load_fields() if fields is None else fields
        cameras = self.ring.cameras(center=tuple(fields[0].bbox.center), resolution=resolution)
        prompt = make_prompt_from_field(
            fields, cameras, render_cfg, self.prior_std, [t.weight for t in self.targets], self.prompt_id
        )
        return prompt, cameras


def load_descriptor(path):
    with open(path) as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise OracleError(f"prompt descriptor {path} is not valid JSON: {e}") from e
    return PromptDescriptor.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def save_descriptor(descriptor, path):
    atomic_write_bytes(path, json.dumps(descriptor.to_dict(), indent=2).encode("utf-8"))
