# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest
import structlog

from radiance_edit.distillation.history import LossHistory
from radiance_edit.distillation.schedule import NoiseSchedule
from radiance_edit.distillation.sds import (
    distillation_velocity,
    mv_step,
    run_distillation,
    sds_image_residual,
    sigma_weight,
    StepConfig,
    ViewMismatchError,
)
from radiance_edit.oracle.denoiser import make_prompt_from_field, PromptSpec, ViewTargets
from radiance_edit.render.camera import Camera
from radiance_edit.render.volume import render, RenderConfig
from radiance_edit.util import testutils as utils

CFG = RenderConfig(samples=16)
FIXED = NoiseSchedule.fixed(0.75, 0.75, total_steps=100, sigma_max=0.5)


def pixel_camera():
    return Camera((0.0, 0.0, 2.8), (0.0, 0.0, 0.0), width=1, height=1)


def gray_prompt(value, n_views=1, prior_std=0.05):
    means = np.full((1, 1, 1, 3), value)
    return PromptSpec("gray", [ViewTargets([1.0], means) for _ in range(n_views)], prior_std)


def test_step_config_validation():
    with pytest.raises(ValueError):
        StepConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        StepConfig(weighting="bogus")
    with pytest.raises(ValueError):
        StepConfig(noise_samples=0)


def test_sigma_weight():
    assert sigma_weight("unit", 0.3, 0.05) == 1.0
    assert sigma_weight("snr", 0.3, 0.1) == pytest.approx(0.09 / 0.1)


def test_residual_at_zero_noise_is_zero():
    prompt = gray_prompt(0.6)
    z = np.full((1, 1, 3), 0.2)
    residual = sds_image_residual(prompt, 0, z, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(residual, 0.0)


def test_residual_points_toward_target():
    prompt = gray_prompt(0.6)
    z = np.full((1, 1, 3), 0.2)
    residual = sds_image_residual(prompt, 0, z, 0.375, np.random.default_rng(0), samples=200)
    assert np.all(residual > 0.3)


def test_view_mismatch():
    prompt = gray_prompt(0.6, n_views=2)
    params = utils.constant_field()
    with pytest.raises(ViewMismatchError):
        distillation_velocity(params, prompt, [pixel_camera()], StepConfig(), CFG, FIXED, 0, np.random.default_rng(0))
    wide = pixel_camera().with_resolution(2, 2)
    with pytest.raises(ViewMismatchError):
        distillation_velocity(params, prompt, [wide, wide], StepConfig(), CFG, FIXED, 0, np.random.default_rng(0))


def test_mv_step_is_euler_update():
    params = utils.random_field(seed=3)
    cameras = utils.small_ring(2, resolution=4)
    prompt = make_prompt_from_field(utils.random_field(seed=4), cameras, CFG)
    step_cfg = StepConfig(learning_rate=0.7)
    sched = NoiseSchedule(total_steps=50)
    velocity, loss, sigmas = distillation_velocity(
        params, prompt, cameras, step_cfg, CFG, sched, 5, np.random.default_rng(11)
    )
    stepped, stepped_loss = mv_step(params, prompt, cameras, step_cfg, CFG, sched, 5, np.random.default_rng(11))
    assert stepped.equals(params + 0.7 * velocity)
    assert stepped_loss == loss
    assert len(sigmas) == 2


def test_velocity_is_view_average():
    params = utils.random_field(seed=3)
    cameras = utils.small_ring(2, resolution=4)
    prompt = make_prompt_from_field(utils.random_field(seed=4), cameras, CFG)
    step_cfg = StepConfig()
    both, _loss, _sigmas = distillation_velocity(
        params, prompt, cameras, step_cfg, CFG, FIXED, 0, np.random.default_rng(1)
    )
    rng = np.random.default_rng(1)
    parts = []
    for i, cam in enumerate(cameras):
        single = PromptSpec(prompt.prompt_id, [prompt.view(i)], prompt.prior_std)
        v, _l, _s = distillation_velocity(params, single, [cam], step_cfg, CFG, FIXED, 0, rng)
        parts.append(v.flat())
    np.testing.assert_allclose(both.flat(), 0.5 * (parts[0] + parts[1]), atol=1e-15)


def test_zero_steps_is_noop():
    params = utils.random_field()
    cameras = utils.small_ring(2, resolution=4)
    prompt = make_prompt_from_field(params, cameras, CFG)
    out, history = run_distillation(params, prompt, cameras, StepConfig(), CFG, FIXED, 0)
    assert out.equals(params)
    assert len(history) == 0


def test_run_is_deterministic_and_traced():
    params = utils.random_field(seed=1)
    cameras = utils.small_ring(2, resolution=4)
    prompt = make_prompt_from_field(utils.random_field(seed=2), cameras, CFG)
    step_cfg = StepConfig(seed=9)
    a, history_a = run_distillation(params, prompt, cameras, step_cfg, CFG, FIXED, 12)
    b, history_b = run_distillation(params, prompt, cameras, step_cfg, CFG, FIXED, 12)
    assert a.equals(b)
    np.testing.assert_array_equal(history_a.losses, history_b.losses)
    assert len(history_a) == 12
    assert history_a.to_frame()["step"].tolist() == list(range(12))


def test_history_continues_across_calls():
    params = utils.random_field(seed=1)
    cameras = utils.small_ring(2, resolution=4)
    prompt = make_prompt_from_field(utils.random_field(seed=2), cameras, CFG)
    rng = np.random.default_rng(0)
    history = LossHistory()
    params, history = run_distillation(params, prompt, cameras, StepConfig(), CFG, FIXED, 3, rng=rng, history=history)
    params, history = run_distillation(
        params, prompt, cameras, StepConfig(), CFG, FIXED, 2, start_tau=3, rng=rng, history=history
    )
    assert history.steps == [0, 1, 2, 3, 4]


def test_toy_field_converges_to_prompt_color():
    # opaque 2x2x2 block seen by one pixel: the rendered color is sigmoid of the raw color
    params = utils.constant_field((2, 2, 2), raw_density=10.0, raw_color=0.0)
    cam = pixel_camera()
    prompt = gray_prompt(0.6)
    final, _history = run_distillation(
        params,
        prompt,
        [cam],
        StepConfig(learning_rate=2.0),
        CFG,
        FIXED,
        500,
        logger=structlog.getLogger("test"),
    )
    np.testing.assert_allclose(render(final, cam, CFG), 0.6, atol=0.01)


def test_velocity_vanishes_in_expectation_at_target():
    params = utils.random_field((2, 2, 2), seed=6, scale=0.5)
    cam = pixel_camera()
    prompt = make_prompt_from_field(params, [cam], CFG)
    rng = np.random.default_rng(12)
    samples = np.stack(
        [distillation_velocity(params, prompt, [cam], StepConfig(), CFG, FIXED, 0, rng)[0].flat() for _ in range(10000)]
    )
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(len(samples))
    assert np.linalg.norm(mean) < 3.0 * np.linalg.norm(stderr)


def test_euler_steps_converge_as_rate_shrinks():
    # a near-zero prior std makes the residual (mu - z) up to ~1e-11 noise, so the run follows a smooth flow
    params = utils.random_field((2, 2, 2), seed=3, scale=0.5)
    cam = pixel_camera()
    prompt = gray_prompt(0.8, prior_std=1e-6)
    finals = []
    for rate, steps in ((1.0, 8), (0.5, 16), (0.25, 32)):
        final, _history = run_distillation(params, prompt, [cam], StepConfig(learning_rate=rate), CFG, FIXED, steps)
        finals.append(final.flat())
    coarse_gap = np.linalg.norm(finals[0] - finals[1])
    fine_gap = np.linalg.norm(finals[1] - finals[2])
    assert coarse_gap > 0.0
    assert fine_gap < 0.75 * coarse_gap
