# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

from .about import __version__  # noqa: F401
