# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Publishes loss and refinement traces as CSV

"""
from radiance_edit.distillation.history import LossHistory
from radiance_edit.pipeline.publishers.generic_publisher import ArtifactPublisher


class TracePublisher(ArtifactPublisher):
    def serialize(self, data):
        frame = data.to_frame() if isinstance(data, LossHistory) else data
        return frame.to_csv(index=False).encode("utf-8")
