# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import io

import numpy as np

from PIL import Image as PILImage


def to_uint8(image):
    return np.round(np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def encode_png(image):
    """8-bit sRGB PNG bytes of an (height, width, 3) image, values clamped to [0, 1]"""
    buffer = io.BytesIO()
    PILImage.fromarray(to_uint8(image)).save(buffer, format="PNG")
    return buffer.getvalue()


def read_png(path):
    with PILImage.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
