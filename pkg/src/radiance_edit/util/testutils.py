# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
    Small scenes to simplify testing
"""

import numpy as np

from radiance_edit.field.params import FieldParams
from radiance_edit.render.camera import Camera, orbit_cameras
from radiance_edit.render.volume import RenderConfig


def random_field(dims=(4, 4, 4), seed=0, scale=0.1, density_offset=0.0):
    """Raw parameters drawn from N(offset, scale^2), at full float64 precision"""
    rng = np.random.default_rng(seed)
    n = dims[0] * dims[1] * dims[2]
    return FieldParams(dims, density_offset + scale * rng.standard_normal(n), scale * rng.standard_normal(3 * n))


def constant_field(dims=(2, 2, 2), raw_density=0.0, raw_color=0.0):
    n = dims[0] * dims[1] * dims[2]
    color = np.broadcast_to(np.asarray(raw_color, dtype=np.float64), (n, 3))
    return FieldParams(dims, np.full(n, float(raw_density)), color.reshape(-1))


def front_camera(resolution=8, distance=2.8):
    return Camera((0.0, 0.0, distance), (0.0, 0.0, 0.0), width=resolution, height=resolution)


def small_ring(n_views=2, resolution=8, radius=2.8, elevation=0.35):
    return orbit_cameras(n_views, radius, elevation, resolution)


def coarse_render_config(samples=16, background=(1.0, 1.0, 1.0)):
    return RenderConfig(samples=samples, background=background)
