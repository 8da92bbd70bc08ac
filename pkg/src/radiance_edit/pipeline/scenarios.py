# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Procedural desk scenes and the built-in edit scenarios.

A scene is a union of signed-distance shapes. Raw density blends from an
empty value outside to a full value inside across a soft shell, and raw
color takes the logit of the color of the nearest shape.
"""

from __future__ import annotations

import dataclasses
import os

from typing import Tuple

import numpy as np

from scipy.special import expit, logit

from radiance_edit.field.checkpoint import save_checkpoint
from radiance_edit.field.params import BoundingBox, check_dims, FieldParams
from radiance_edit.oracle.descriptor import PromptDescriptor, RingSpec, save_descriptor, TargetRef

EMPTY_DENSITY = -6.0
FULL_DENSITY = 4.0
SHELL_WIDTH = 0.05

RED = (0.85, 0.15, 0.1)
BLUE = (0.1, 0.25, 0.85)
GREEN = (0.15, 0.7, 0.2)
GRAY = (0.55, 0.5, 0.45)


@dataclasses.dataclass(frozen=True)
class Sphere:
    center: Tuple[float, float, float]
    radius: float
    color: Tuple[float, float, float]

    def sdf(self, points):
        return np.linalg.norm(points - np.asarray(self.center), axis=-1) - self.radius


@dataclasses.dataclass(frozen=True)
class Box:
    center: Tuple[float, float, float]
    half_extent: Tuple[float, float, float]
    color: Tuple[float, float, float]

    def sdf(self, points):
        q = np.abs(points - np.asarray(self.center)) - np.asarray(self.half_extent)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside


def grid_points(dims, bbox):
    axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(bbox.lo, bbox.hi, dims)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def scene_field(shapes, dims=(16, 16, 16), bbox=None):
    dims = check_dims(dims)
    bbox = BoundingBox.default() if bbox is None else bbox
    points = grid_points(dims, bbox).reshape(-1, 3)
    distances = np.stack([shape.sdf(points) for shape in shapes], axis=-1)
    nearest = np.argmin(distances, axis=-1)
    sdf = distances[np.arange(points.shape[0]), nearest]
    density = EMPTY_DENSITY + (FULL_DENSITY - EMPTY_DENSITY) * expit(-sdf / SHELL_WIDTH)
    colors = np.clip(np.array([shape.color for shape in shapes]), 0.02, 0.98)
    raw_color = logit(colors[nearest])
    return FieldParams(dims, density, raw_color.reshape(-1), bbox).to_storage_precision()


DESK = Box((0.0, -0.55, 0.0), (0.8, 0.08, 0.5), GRAY)
SOURCE_SPHERE = Sphere((-0.35, -0.17, 0.0), 0.3, RED)


def _source_shapes():
    return [DESK, SOURCE_SPHERE]


def _color_change():
    return [DESK, dataclasses.replace(SOURCE_SPHERE, color=BLUE)]


def _object_added():
    return [DESK, SOURCE_SPHERE, Box((0.4, -0.27, 0.1), (0.2, 0.2, 0.2), GREEN)]


def _object_moved():
    return [DESK, dataclasses.replace(SOURCE_SPHERE, center=(0.35, -0.17, 0.0))]


SCENARIOS = {
    "color_change": _color_change,
    "object_added": _object_added,
    "object_moved": _object_moved,
}


def scenario_fields(name, dims=(16, 16, 16)):
    """(source, target) fields of a built-in scenario"""
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario '{name}', choose from {sorted(SCENARIOS)}")
    return scene_field(_source_shapes(), dims), scene_field(SCENARIOS[name](), dims)


def write_scenario(name, out_dir, dims=(16, 16, 16), ring=None, prior_std=None):
    """
    Write source.pnrf, target.pnrf and prompt.json for a scenario.

    :rtype: :obj:`dict` of artifact paths
    """
    source, target = scenario_fields(name, dims)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "source": os.path.join(out_dir, "source.pnrf"),
        "target": os.path.join(out_dir, "target.pnrf"),
        "prompt": os.path.join(out_dir, "prompt.json"),
    }
    save_checkpoint(source, paths["source"])
    save_checkpoint(target, paths["target"])
    descriptor = PromptDescriptor(name, [TargetRef("target.pnrf", 1.0)], ring or RingSpec())
    if prior_std is not None:
        descriptor = dataclasses.replace(descriptor, prior_std=float(prior_std))
    save_descriptor(descriptor, paths["prompt"])
    return paths
