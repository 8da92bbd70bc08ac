# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

from radiance_edit.distillation.schedule import NoiseSchedule
from radiance_edit.distillation.sds import mv_step, StepConfig
from radiance_edit.field.params import lerp_params
from radiance_edit.oracle.denoiser import make_prompt_from_field
from radiance_edit.refine.ipg import (
    identity_distance,
    identity_distance_grad,
    ipg_grad,
    lambda_scale,
    refine_step,
    RefineConfig,
    run_refinement,
)
from radiance_edit.render.camera import Camera
from radiance_edit.render.volume import ImageShapeError, render
from radiance_edit.util import testutils as utils
from radiance_edit.verify.oracles import finite_diff_grad, relative_error

CFG = utils.coarse_render_config(samples=16)
NOISELESS = NoiseSchedule(total_steps=100, sigma_max=0.0)


@pytest.fixture
def edit_setup():
    cameras = utils.small_ring(2, resolution=8)
    src = utils.random_field(seed=1)
    edited = lerp_params(src, utils.random_field(seed=5, scale=1.0), 0.3)
    prompt = make_prompt_from_field(utils.random_field(seed=2), cameras, CFG)
    return src, edited, prompt, cameras


def test_refine_config_validation():
    with pytest.raises(ValueError):
        RefineConfig(lambda_l1=-1.0)
    with pytest.raises(ValueError):
        RefineConfig(decay_end_fraction=0.0)
    with pytest.raises(ValueError):
        RefineConfig(ipg_cameras=0)
    with pytest.raises(ValueError):
        RefineConfig(pyramid_levels=0)


def test_identity_distance_basics():
    rng = np.random.default_rng(0)
    a = rng.uniform(size=(8, 8, 3))
    b = rng.uniform(size=(8, 8, 3))
    cfg = RefineConfig(lambda_l1=1.0, lambda_p=5.0)
    assert identity_distance(a, a, cfg) == 0.0
    assert identity_distance(a, b, cfg) == pytest.approx(identity_distance(b, a, cfg))
    assert identity_distance(a, b, cfg) > 0.0
    with pytest.raises(ImageShapeError):
        identity_distance(a, b[:4], cfg)


def test_identity_distance_of_constant_images():
    a = np.full((8, 8, 3), 0.5)
    b = np.full((8, 8, 3), 0.2)
    assert identity_distance(a, b, RefineConfig(lambda_l1=2.0, lambda_p=0.0)) == pytest.approx(0.6)
    assert identity_distance(a, b, RefineConfig(lambda_l1=2.0, lambda_p=1.0)) == pytest.approx(0.9)


def test_identity_gradient_matches_finite_differences_in_image():
    rng = np.random.default_rng(3)
    a = rng.uniform(size=(8, 8, 3))
    b = rng.uniform(size=(8, 8, 3))
    cfg = RefineConfig(lambda_l1=1.0, lambda_p=2.0, pyramid_levels=3)
    numeric = finite_diff_grad(lambda x: identity_distance(x, b, cfg), a, h=1e-7)
    np.testing.assert_allclose(identity_distance_grad(a, b, cfg).reshape(-1), numeric, atol=1e-6)


def test_lambda_scale_decays_linearly():
    cfg = RefineConfig(refine_steps=100, decay_end_fraction=0.5)
    assert lambda_scale(0, cfg) == 1.0
    assert lambda_scale(25, cfg) == pytest.approx(0.5)
    assert lambda_scale(50, cfg) == 0.0
    assert lambda_scale(80, cfg) == 0.0
    assert lambda_scale(0, RefineConfig(refine_steps=0)) == 0.0


def test_ipg_vanishes_at_source():
    src = utils.random_field(seed=1)
    direction = ipg_grad(src, src.copy(), utils.front_camera(8), CFG, RefineConfig())
    np.testing.assert_array_equal(direction.flat(), 0.0)


def test_ipg_is_descent_direction_of_identity_distance(edit_setup):
    src, edited, _prompt, _cameras = edit_setup
    cam = Camera((0.4, 0.8, 2.6), (0.0, 0.0, 0.0), width=8, height=8)
    cfg = RefineConfig(lambda_l1=1.0, lambda_p=1.0)
    reference = render(src, cam, CFG)

    def loss_fn(p):
        return identity_distance(render(p, cam, CFG), reference, cfg)

    coords = np.random.default_rng(7).choice(edited.size, size=50, replace=False)
    numeric = finite_diff_grad(loss_fn, edited, h=1e-6, coords=coords)
    direction = ipg_grad(edited, src, cam, CFG, cfg)
    assert relative_error(-direction.flat()[coords], numeric[coords]) < 1e-3


def test_step_is_sum_of_velocities(edit_setup):
    src, edited, prompt, cameras = edit_setup
    step_cfg = StepConfig(learning_rate=0.5)
    refine_cfg = RefineConfig(lambda_l1=3.0, lambda_p=30.0, refine_steps=10)
    sched = NoiseSchedule(total_steps=20)
    updated, diag = refine_step(
        edited, src, prompt, cameras, step_cfg, CFG, refine_cfg, sched, 12, 2, np.random.default_rng(0)
    )
    expected = edited + 0.5 * (diag.edit_velocity + diag.ipg_velocity)
    np.testing.assert_allclose(updated.flat(), expected.flat(), atol=1e-10)
    assert diag.lambda_scale == pytest.approx(0.6)
    assert len(diag.camera_indices) == 1
    direction = ipg_grad(edited, src, cameras[diag.camera_indices[0]], CFG, refine_cfg, scale=0.6)
    np.testing.assert_allclose(diag.ipg_velocity.flat(), direction.flat(), atol=1e-12)


@pytest.mark.parametrize(
    "refine_cfg, tau_refine",
    [(RefineConfig(lambda_l1=0.0, lambda_p=0.0, refine_steps=10), 0), (RefineConfig(refine_steps=10), 5)],
)
def test_without_identity_weight_step_is_plain_distillation(edit_setup, refine_cfg, tau_refine):
    src, edited, prompt, cameras = edit_setup
    step_cfg = StepConfig()
    sched = NoiseSchedule(total_steps=20)
    refined, diag = refine_step(
        edited, src, prompt, cameras, step_cfg, CFG, refine_cfg, sched, 3, tau_refine, np.random.default_rng(4)
    )
    plain, _loss = mv_step(edited, prompt, cameras, step_cfg, CFG, sched, 3, np.random.default_rng(4))
    assert refined.equals(plain)
    np.testing.assert_array_equal(diag.ipg_velocity.flat(), 0.0)


def test_noiseless_refinement_pulls_field_back_to_source():
    # with sigma_max = 0 the distillation velocity is zero, leaving the identity term alone
    cam = utils.front_camera(8)
    src = utils.random_field(seed=1)
    edited = lerp_params(src, utils.random_field(seed=5, scale=1.0), 0.3)
    prompt = make_prompt_from_field(utils.random_field(seed=2), [cam], CFG)
    refine_cfg = RefineConfig(lambda_l1=30.0, lambda_p=30.0, refine_steps=300, decay_end_fraction=1.0)
    refined, history, trace = run_refinement(
        edited, src, prompt, [cam], StepConfig(learning_rate=1.0), CFG, refine_cfg, NOISELESS
    )
    reference = render(src, cam, CFG)
    before = float(np.mean(np.abs(render(edited, cam, CFG) - reference)))
    after = float(np.mean(np.abs(render(refined, cam, CFG) - reference)))
    assert after < 0.02
    assert after < 0.5 * before
    distances = trace.column("identity_distance")
    assert np.mean(distances[-5:]) < 0.5 * distances[0]
    np.testing.assert_array_equal(history.losses, trace.column("monitor_loss"))


def test_zero_refine_steps_is_noop(edit_setup):
    src, edited, prompt, cameras = edit_setup
    out, history, trace = run_refinement(
        edited, src, prompt, cameras, StepConfig(), CFG, RefineConfig(refine_steps=0), NOISELESS
    )
    assert out.equals(edited)
    assert len(history) == 0
    assert len(trace) == 0


def test_refinement_trace_continues_schedule(edit_setup):
    src, edited, prompt, cameras = edit_setup
    refine_cfg = RefineConfig(lambda_l1=1.0, lambda_p=1.0, refine_steps=6)
    _out, history, trace = run_refinement(
        edited, src, prompt, cameras, StepConfig(), CFG, refine_cfg, NoiseSchedule(total_steps=20), start_tau=14
    )
    assert history.steps == list(range(14, 20))
    frame = trace.to_frame()
    assert list(frame.columns) == [
        "step",
        "monitor_loss",
        "identity_distance",
        "lambda_scale",
        "sigma",
        "ipg_camera",
    ]
    np.testing.assert_allclose(frame["lambda_scale"], np.maximum(0.0, 1.0 - np.arange(6) / 3.0))
    assert (frame["sigma"] > 0.0).all()
    assert (frame["sigma"] <= 0.75 * 0.5).all()
    assert frame["ipg_camera"].isin([0, 1]).all()
