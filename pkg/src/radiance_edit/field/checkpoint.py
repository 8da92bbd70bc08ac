# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
PNRF checkpoint files.

Layout, all little-endian: magic "PNRF", u32 version, u32 x 3 grid dims,
f64 x 6 bounding box (lo then hi), then float32 density and color arrays.
"""

import os
import struct
import tempfile

import numpy as np

from radiance_edit.field.params import BoundingBox, DimensionError, FieldParams, NonFiniteError

MAGIC = b"PNRF"
VERSION = 1
_HEADER = struct.Struct("<4sI3I6d")
_PAYLOAD_DTYPE = np.dtype("<f4")


class CheckpointError(Exception):
    """Base class for unreadable checkpoints"""

    code = 1


class CheckpointFormatError(CheckpointError):
    """The file does not start with the PNRF magic bytes"""

    code = 2


class CheckpointVersionError(CheckpointError):
    """The file was written with an unsupported format version"""

    code = 3


class CheckpointPayloadError(CheckpointError):
    """Header or parameter payload is truncated or inconsistent"""

    code = 4


def encode_checkpoint(params):
    header = _HEADER.pack(MAGIC, VERSION, *params.grid_dims, *params.bbox.as_tuple())
    payload = params.raw_density.astype(_PAYLOAD_DTYPE).tobytes() + params.raw_color.astype(_PAYLOAD_DTYPE).tobytes()
    return header + payload


def decode_checkpoint(blob):
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise CheckpointFormatError(f"bad magic bytes {blob[:len(MAGIC)]!r}, expected {MAGIC!r}")
    if len(blob) < _HEADER.size:
        raise CheckpointPayloadError(f"truncated header: {len(blob)} bytes, need {_HEADER.size}")
    _magic, version, nx, ny, nz, *bbox = _HEADER.unpack_from(blob)
    if version != VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {version}, expected {VERSION}")
    n = nx * ny * nz
    expected = _HEADER.size + 4 * n * _PAYLOAD_DTYPE.itemsize
    if n == 0 or len(blob) != expected:
        raise CheckpointPayloadError(f"payload holds {len(blob) - _HEADER.size} bytes, grid {(nx, ny, nz)} needs {expected - _HEADER.size}")
    values = np.frombuffer(blob, dtype=_PAYLOAD_DTYPE, offset=_HEADER.size).astype(np.float64)
    try:
        return FieldParams((nx, ny, nz), values[:n], values[n:], BoundingBox(bbox[:3], bbox[3:]))
    except (DimensionError, NonFiniteError) as e:
        raise CheckpointPayloadError(f"inconsistent checkpoint contents: {e}") from e


def atomic_write_bytes(path, blob):
    """Write to a temporary file in the target directory, then rename over ``path``"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def save_checkpoint(params, path):
    """
    Save field parameters.

    Values are stored as float32; fields already at storage precision
    (see :meth:`FieldParams.to_storage_precision`) round-trip bit-exactly.
    """
    atomic_write_bytes(path, encode_checkpoint(params))


def load_checkpoint(path):
    with open(path, "rb") as f:
        return decode_checkpoint(f.read())
