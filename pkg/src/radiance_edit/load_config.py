# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Load a JSON run configuration
"""

import json
import time


class ConfigError(Exception):
    """Missing, unreadable or malformed configuration"""

    pass


def load(config_file, retries=0, timeout=0, logger=None):
    """
    Load a configuration document from file.

    :type config_file: :obj:`str`
    :arg config_file: path to a JSON document whose top level is an object
    :arg retries: attempts made when the file cannot be opened
    :arg timeout: seconds to sleep between attempts

    :rtype: :obj:`dict`
    """

    retries = max(1, retries)
    for i in range(retries):
        try:
            with open(config_file) as f:
                text = f.read()
            break
        except OSError:
            if logger is not None:
                logger.warning(f"config load of {config_file} failed, {retries - i - 1} retries left")
            if i < retries - 1:
                time.sleep(timeout)
    else:
        if logger is not None:
            logger.error(f"cannot load {config_file}")
        raise ConfigError(f"cannot read configuration file {config_file}")

    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{config_file} is not valid JSON: {e}") from e
    if not isinstance(config, dict):
        raise ConfigError(f"{config_file} must contain a JSON object, found {type(config).__name__}")
    return config
