# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import time


def _name_of(f):
    if hasattr(f, "__name__"):
        return f.__name__
    if hasattr(f, "func"):
        return f.func.__name__
    return "Unknown"


def retry_wrapper(f, max_retries=1, retry_interval=2, backoff=True, logger=None, retry_on=(OSError,)):
    """Call ``f`` and retry it up to ``max_retries`` times when it raises one of ``retry_on``.

    The sleep between attempts starts at ``retry_interval`` seconds and, with
    ``backoff``, is multiplied by ``retry_interval`` after every failure.
    Other exceptions propagate immediately.
    """
    time2sleep = retry_interval
    for i in range(max_retries + 1):
        try:
            return f()
        except retry_on as e:
            if i == max_retries:
                if logger is not None:
                    logger.error(f"{_name_of(f)} giving up with {e} after {i} retries")
                raise
            if logger is not None:
                logger.warning(f"{_name_of(f)} failed with {e} on try {i}/{max_retries}. Sleeping {time2sleep} seconds")
            time.sleep(time2sleep)
            if backoff:
                time2sleep *= retry_interval
