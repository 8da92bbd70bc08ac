# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import pytest

from radiance_edit.load_config import ConfigError
from radiance_edit.pipeline.config import apply_overrides, RunConfig


def test_defaults():
    config = RunConfig.from_dict({})
    assert config.grid == (16, 16, 16)
    assert config.edit_steps == 1500
    assert config.refine_steps == 1000
    assert config.milestone_step() == 750
    assert config.ring.n_views == 4
    assert config.refine.lambda_l1 == 300.0
    assert config.refine.lambda_p == 30000.0
    assert config.probe.eta_max == 0.6
    assert config.eta is None
    sched = config.noise_schedule()
    assert sched.total_steps == 1500
    assert sched.bounds(0) == (0.75, 0.75)


def test_sections_are_applied():
    config = RunConfig.from_dict(
        {
            "grid": [4, 5, 6],
            "ring": {"n_views": 2, "resolution": 8},
            "step": {"learning_rate": 0.5},
            "refine": {"lambda_l1": 3.0},
            "refine_steps": 7,
            "edit_steps": 20,
            "seed": 11,
            "schedule": {"fixed": True},
        }
    )
    assert config.grid == (4, 5, 6)
    assert config.ring.n_views == 2
    assert config.step.seed == 11
    assert config.step.learning_rate == 0.5
    assert config.refine.refine_steps == 7
    assert config.refine.lambda_l1 == 3.0
    assert config.noise_schedule().bounds(19) == (0.02, 0.98)
    assert config.milestone_step() == 10


def test_round_trip_through_dict():
    config = RunConfig.from_dict({"edit_steps": 12, "probe": {"delta_min": 2.5}, "schedule": {"end": [0.1, 0.3]}})
    assert RunConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"ring": {"bogus": 1}},
        {"step": {"n_views": 3}},
        {"refine": {"refine_steps": 3}},
        {"edit_steps": -1},
        {"resolution_milestone": 1.5},
        {"eta": 2.0},
        {"grid": [0, 4, 4]},
        {"schedule": {"start": [0.8, 0.7]}},
        {"probe": {"probe_steps": 5}},
        {"ring": {"n_views": 0}},
        {"render": {"samples": 1}},
        {"step": {"weighting": "bogus"}},
        {"ring": 3},
    ],
)
def test_invalid_configurations(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_zero_edit_steps_still_builds_a_schedule():
    config = RunConfig.from_dict({"edit_steps": 0})
    assert config.noise_schedule().total_steps == 1
    assert config.milestone_step() == 0


def test_apply_overrides():
    data = {"eta": 0.1, "schedule": {"sigma_max": 0.4}}
    merged = apply_overrides(data, {"eta": 0.2, "seed": None, "fixed_schedule": True, "skip_refine": None})
    assert merged["eta"] == 0.2
    assert "seed" not in merged
    assert merged["schedule"] == {"sigma_max": 0.4, "fixed": True}
    assert data == {"eta": 0.1, "schedule": {"sigma_max": 0.4}}
    assert apply_overrides(data, {"fixed_schedule": False}) == data
