# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pandas as pd


class LossHistory:
    """Append-only record of per-step scalar losses"""

    def __init__(self, columns=("loss",)):
        self.columns = tuple(columns)
        self.steps = []
        self._values = {c: [] for c in self.columns}

    def append(self, step, loss=None, **values):
        if loss is not None:
            values["loss"] = loss
        if set(values) != set(self.columns):
            raise KeyError(f"expected values for {self.columns}, got {sorted(values)}")
        self.steps.append(int(step))
        for c in self.columns:
            self._values[c].append(float(values[c]))

    def __len__(self):
        return len(self.steps)

    @property
    def losses(self):
        return np.array(self._values[self.columns[0]])

    def column(self, name):
        return np.array(self._values[name])

    def to_frame(self):
        frame = pd.DataFrame({"step": self.steps})
        for c in self.columns:
            frame[c] = self._values[c]
        return frame
