# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Make sure radiance_edit is a valid python package
"""


def test_can_import():
    import radiance_edit  # noqa: F401
    import radiance_edit.pipeline.cli  # noqa: F401

    pass
