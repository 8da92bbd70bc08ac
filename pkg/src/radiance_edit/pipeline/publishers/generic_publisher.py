# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Generic artifact publisher

"""
import abc

from functools import partial

import structlog

from radiance_edit.field.checkpoint import atomic_write_bytes
from radiance_edit.util.retry_function import retry_wrapper

DEFAULT_MAX_RETRIES = 2
DEFAULT_RETRY_INTERVAL = 1


class ArtifactPublisher(metaclass=abc.ABCMeta):
    """
    Serialise one product and write it atomically to ``output_file``.

    Config keys: ``output_file`` (required), ``max_retries``, ``retry_interval``.
    """

    def __init__(self, config):
        if not config.get("output_file"):
            raise ValueError(f"{type(self).__name__} needs an output_file")
        self.output_file = config["output_file"]
        self.max_retries = config.get("max_retries", DEFAULT_MAX_RETRIES)
        self.retry_interval = config.get("retry_interval", DEFAULT_RETRY_INTERVAL)
        self.logger = structlog.getLogger("radiance_edit").bind(publisher=type(self).__name__)

    @abc.abstractmethod
    # this must be implemented by the inherited class
    def serialize(self, data):
        return None

    def publish(self, data):
        """
        Publish data

        :arg data: product accepted by :meth:`serialize`
        :rtype: :obj:`str` path written
        """
        self.logger.debug(f"publishing {self.output_file}")
        blob = self.serialize(data)
        retry_wrapper(
            partial(atomic_write_bytes, self.output_file, blob),
            self.max_retries,
            self.retry_interval,
            logger=self.logger,
        )
        return self.output_file
