# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import json
import os

from unittest import mock

import pytest

from radiance_edit.load_config import ConfigError, load


def test_load(tmp_path):
    path = os.path.join(tmp_path, "run.json")
    with open(path, "w") as f:
        json.dump({"edit_steps": 10, "ring": {"n_views": 2}}, f)
    assert load(path) == {"edit_steps": 10, "ring": {"n_views": 2}}


@mock.patch("time.sleep")
def test_missing_file(sleep, tmp_path):
    logger = mock.MagicMock()
    with pytest.raises(ConfigError):
        load(os.path.join(tmp_path, "absent.json"), retries=3, timeout=1, logger=logger)
    assert sleep.call_count == 2
    assert logger.error.called


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", "3"])
def test_malformed(tmp_path, text):
    path = os.path.join(tmp_path, "bad.json")
    with open(path, "w") as f:
        f.write(text)
    with pytest.raises(ConfigError):
        load(path)
