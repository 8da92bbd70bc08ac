# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Gaussian image pyramids as explicit linear operators.

Each reduction blurs with the binomial kernel [1, 4, 6, 4, 1] / 16
(edge-clamped) and keeps every other row/column, so level l has
max(1, floor(n / 2**l)) pixels per axis. Because every level is
A_h @ image @ A_w.T per channel, the vector-Jacobian product is the
transpose applied to the level gradient.
"""

from __future__ import annotations

import dataclasses
import functools

from typing import List

import numpy as np

BLUR_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _reduce_matrix(n):
    blur = np.zeros((n, n))
    for offset, k in zip(range(-2, 3), BLUR_KERNEL):
        cols = np.clip(np.arange(n) + offset, 0, n - 1)
        np.add.at(blur, (np.arange(n), cols), k)
    m = max(1, n // 2)
    return blur[2 * np.arange(m)]


@functools.lru_cache(maxsize=64)
def pyramid_operators(height, width, levels):
    """Row/column operators mapping the full-resolution image to every level"""
    if levels < 1:
        raise ValueError(f"need at least one pyramid level, got {levels}")
    ops = [(np.eye(height), np.eye(width))]
    for _ in range(1, levels):
        rows, cols = ops[-1]
        ops.append((_reduce_matrix(rows.shape[0]) @ rows, _reduce_matrix(cols.shape[0]) @ cols))
    return tuple(ops)


@dataclasses.dataclass
class PerceptualFeatures:
    levels: List[np.ndarray]

    def __len__(self):
        return len(self.levels)


def gaussian_pyramid(image, levels):
    image = np.asarray(image, dtype=np.float64)
    ops = pyramid_operators(image.shape[0], image.shape[1], int(levels))
    return PerceptualFeatures([np.einsum("ij,jkc,lk->ilc", rows, image, cols) for rows, cols in ops])


def pyramid_vjp(level_grads, height, width):
    ops = pyramid_operators(height, width, len(level_grads))
    grad = np.zeros((height, width, 3))
    for (rows, cols), g in zip(ops, level_grads):
        grad += np.einsum("ji,jkc,kl->ilc", rows, g, cols)
    return grad
