# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Publishes run summaries, probe reports and oracle reports

"""
import json

from radiance_edit.pipeline.publishers.generic_publisher import ArtifactPublisher
from radiance_edit.verify.oracles import reports_to_frame


class JSONReportPublisher(ArtifactPublisher):
    def serialize(self, data):
        if hasattr(data, "to_dict"):
            data = data.to_dict()
        return (json.dumps(data, indent=2, sort_keys=True) + "\n").encode("utf-8")


class OracleReportPublisher(ArtifactPublisher):
    """One JSON record per line"""

    def serialize(self, data):
        frame = reports_to_frame(data)
        return frame.to_json(orient="records", lines=True).encode("utf-8")
