# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Publishes rendered views as PNG

"""
import os

from radiance_edit.pipeline.publishers.generic_publisher import ArtifactPublisher
from radiance_edit.render.image_io import encode_png


class PNGPublisher(ArtifactPublisher):
    def serialize(self, data):
        return encode_png(data)


def view_file_name(index):
    return f"view_{index:03d}.png"


def publish_views(images, out_dir, max_retries=2, retry_interval=1):
    """Write view_000.png, view_001.png, ... and return their paths"""
    paths = []
    for i, image in enumerate(images):
        config = {
            "output_file": os.path.join(out_dir, view_file_name(i)),
            "max_retries": max_retries,
            "retry_interval": retry_interval,
        }
        paths.append(PNGPublisher(config).publish(image))
    return paths
