# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Pinhole cameras and orbit rings around a field's bounding box
"""

from __future__ import annotations

import dataclasses
import math

from typing import Tuple

import numpy as np

Vec3 = Tuple[float, float, float]

DEFAULT_FOV = math.radians(40.0)


@dataclasses.dataclass(frozen=True)
class Camera:
    position: Vec3
    target: Vec3
    up: Vec3 = (0.0, 1.0, 0.0)
    fov: float = DEFAULT_FOV
    width: int = 32
    height: int = 32

    def __post_init__(self):
        position = tuple(float(v) for v in self.position)
        target = tuple(float(v) for v in self.target)
        up = tuple(float(v) for v in self.up)
        if not 0.0 < self.fov < math.pi:
            raise ValueError(f"vertical field of view must lie in (0, pi), got {self.fov}")
        if position == target:
            raise ValueError("camera position and look-at target coincide")
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError(f"image size must be at least 1x1, got {self.width}x{self.height}")
        forward = np.subtract(target, position)
        if np.linalg.norm(np.cross(forward, up)) == 0.0:
            raise ValueError("camera up vector is parallel to the viewing direction")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def resolution(self):
        return self.height, self.width

    def with_resolution(self, width, height):
        return dataclasses.replace(self, width=int(width), height=int(height))

    def rays(self):
        """
        Unit ray directions through every pixel center.

        :rtype: (origin (3,), directions (height, width, 3))
        """
        origin = np.array(self.position)
        forward = np.array(self.target) - origin
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.array(self.up))
        right /= np.linalg.norm(right)
        true_up = np.cross(right, forward)

        half_h = math.tan(self.fov / 2.0)
        half_w = half_h * self.width / self.height
        u = ((np.arange(self.width) + 0.5) / self.width * 2.0 - 1.0) * half_w
        v = (1.0 - (np.arange(self.height) + 0.5) / self.height * 2.0) * half_h
        dirs = forward[None, None, :] + u[None, :, None] * right[None, None, :] + v[:, None, None] * true_up[None, None, :]
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        return origin, dirs


def orbit_cameras(n, radius, elevation, resolution, center=(0.0, 0.0, 0.0), fov=DEFAULT_FOV):
    """
    ``n`` cameras evenly spaced in azimuth on a ring around ``center``.

    Azimuth 0 sits on the +z axis ("front"); ``elevation`` is in radians and
    ``resolution`` is either an int (square) or a (width, height) pair.
    """
    if int(n) < 1:
        raise ValueError(f"need at least one camera, got n={n}")
    if radius <= 0:
        raise ValueError(f"orbit radius must be positive, got {radius}")
    width, height = (resolution, resolution) if np.isscalar(resolution) else resolution
    center = np.asarray(center, dtype=np.float64)
    cameras = []
    for i in range(int(n)):
        azimuth = 2.0 * math.pi * i / int(n)
        offset = radius * np.array(
            [
                math.cos(elevation) * math.sin(azimuth),
                math.sin(elevation),
                math.cos(elevation) * math.cos(azimuth),
            ]
        )
        cameras.append(Camera(tuple(center + offset), tuple(center), fov=fov, width=width, height=height))
    return cameras


def azimuth_of(camera):
    offset = np.subtract(camera.position, camera.target)
    return math.atan2(offset[0], offset[2]) % (2.0 * math.pi)
