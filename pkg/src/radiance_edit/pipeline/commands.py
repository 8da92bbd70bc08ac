# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

"""
Pipeline commands behind the command-line interface.

``cmd_edit`` runs the phases in the fixed order probe -> perturb -> edit ->
refine. Each phase draws from its own random stream spawned from the run
seed, so skipping the probe (an explicit ``eta``) leaves the streams of the
later phases unchanged.
"""

from __future__ import annotations

import dataclasses
import os
import time

from typing import Dict, Optional

import numpy as np

from radiance_edit.distillation.history import LossHistory
from radiance_edit.distillation.sds import run_distillation
from radiance_edit.field.checkpoint import load_checkpoint, save_checkpoint
from radiance_edit.field.params import DimensionError, NonFiniteError, perturb, sample_init
from radiance_edit.load_config import ConfigError
from radiance_edit.oracle.descriptor import load_descriptor, RingSpec
from radiance_edit.pipeline.fit import fit_field, NumericalError
from radiance_edit.pipeline.publishers.image_publisher import publish_views
from radiance_edit.pipeline.publishers.report_publisher import JSONReportPublisher, OracleReportPublisher
from radiance_edit.pipeline.publishers.trace_publisher import TracePublisher
from radiance_edit.pipeline.scenarios import write_scenario
from radiance_edit.probe.eta import probe_and_select
from radiance_edit.refine.ipg import identity_distance, run_refinement
from radiance_edit.render.camera import orbit_cameras
from radiance_edit.render.volume import l2_pixel_loss, mean_squared_error, render, render_loss_grad
from radiance_edit.verify.oracles import finite_diff_grad, mc_posterior_mean, OracleReport

PHASES = ("probe", "perturb", "edit", "refine")

SUMMARY_FILE = "summary.json"
PROBE_FILE = "probe.json"


def phase_seeds(seed):
    return dict(zip(PHASES, np.random.SeedSequence(int(seed)).spawn(len(PHASES))))


def half_resolution(resolution):
    return max(1, int(resolution) // 2)


def _require(path, what):
    if not path:
        raise ConfigError(f"no {what} configured")
    if not os.path.exists(path):
        raise ConfigError(f"{what} {path} does not exist")
    return path


def edit_target_mse(params, prompt, cameras, render_cfg):
    """Per-pixel MSE between renders and each view's target, averaged over views"""
    errors = [
        mean_squared_error(render(params, cam, render_cfg), prompt.view(i).mixture_mean) for i, cam in enumerate(cameras)
    ]
    return float(np.mean(errors))


def ring_identity_distance(params, src, cameras, render_cfg, refine_cfg):
    return float(
        np.mean(
            [
                identity_distance(render(params, cam, render_cfg), render(src, cam, render_cfg), refine_cfg)
                for cam in cameras
            ]
        )
    )


@dataclasses.dataclass
class EditInputs:
    source: object
    descriptor: object
    prompt: object
    cameras: list
    first_prompt: object
    first_cameras: list


def load_edit_inputs(config, logger=None):
    """
    Source field plus the edit prompt rendered at full resolution and at the
    first-phase resolution (half resolution unless the milestone is 0).
    """
    source = load_checkpoint(_require(config.source_checkpoint, "source checkpoint"))
    descriptor = load_descriptor(_require(config.prompt, "prompt descriptor"))
    fields = descriptor.load_fields()
    try:
        for field in fields:
            source.check_compatible(field)
    except DimensionError as e:
        raise ConfigError(f"source checkpoint does not match the prompt targets: {e}") from e
    if logger is not None and descriptor.ring != config.ring:
        logger.warning(f"ring section ignored, using the prompt descriptor ring {descriptor.ring}")
    prompt, cameras = descriptor.build(config.render, fields=fields)
    if config.milestone_step() > 0:
        first_prompt, first_cameras = descriptor.build(
            config.render, resolution=half_resolution(descriptor.ring.resolution), fields=fields
        )
    else:
        first_prompt, first_cameras = prompt, cameras
    if logger is not None:
        logger.info(
            f"loaded source {source.grid_dims} and prompt '{descriptor.prompt_id}' "
            f"with {prompt.n_views} views at {prompt.resolution}"
        )
    return EditInputs(source, descriptor, prompt, cameras, first_prompt, first_cameras)


@dataclasses.dataclass
class EditRun:
    probe: Optional[object]
    eta: float
    probe_skipped: bool
    source_checkpoint: str
    perturbed_checkpoint: str
    final_checkpoint: str
    edit_history: LossHistory
    refine_trace: Optional[LossHistory]
    final_params: object
    phases: list = dataclasses.field(default_factory=list)
    steps: Dict[str, int] = dataclasses.field(default_factory=dict)
    timings_ms: Dict[str, float] = dataclasses.field(default_factory=dict)
    metrics: Dict[str, float] = dataclasses.field(default_factory=dict)
    artifacts: Dict[str, object] = dataclasses.field(default_factory=dict)

    def to_summary(self, config):
        return {
            "status": "completed",
            "seed": config.seed,
            "eta": self.eta,
            "probe_skipped": self.probe_skipped,
            "probe": None if self.probe is None else self.probe.to_dict(),
            "phases": list(self.phases),
            "steps": dict(self.steps),
            "timings_ms": dict(self.timings_ms),
            "metrics": dict(self.metrics),
            "artifacts": dict(self.artifacts),
            "config": config.to_dict(),
        }


class _PhaseTimer:
    def __init__(self, timings, name, logger):
        self.timings = timings
        self.name = name
        self.logger = logger

    def __enter__(self):
        if self.logger is not None:
            self.logger.info(f"*** Starting {self.name} ***")
        self.started = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = 1000.0 * (time.perf_counter() - self.started)
        return False


def _write_failure(out_dir, config, phase, error, partial):
    summary = {"status": "failed", "failed_phase": phase, "error": str(error), "seed": config.seed}
    summary.update(partial)
    JSONReportPublisher({"output_file": os.path.join(out_dir, SUMMARY_FILE)}).publish(summary)


def cmd_probe(config, logger=None):
    """Run the landscape probe only and write probe.json"""
    inputs = load_edit_inputs(config, logger)
    seeds = phase_seeds(config.seed)
    report = probe_and_select(
        inputs.source,
        inputs.first_prompt,
        inputs.first_cameras,
        config.step,
        config.render,
        config.noise_schedule(),
        config.probe,
        rng=np.random.default_rng(seeds["probe"]),
        logger=logger,
    )
    os.makedirs(config.output_dir, exist_ok=True)
    JSONReportPublisher({"output_file": os.path.join(config.output_dir, PROBE_FILE)}).publish(report)
    return report


def cmd_edit(config, logger=None):
    """
    Probe, perturb, distill and refine; write checkpoints, orbit PNGs,
    CSV traces and summary.json to ``config.output_dir``.

    :rtype: :class:`EditRun`
    """
    inputs = load_edit_inputs(config, logger)
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    seeds = phase_seeds(config.seed)
    sched = config.noise_schedule()
    src = inputs.source
    timings = {}
    phases = []
    artifacts = {}
    phase = "probe"
    try:
        report = None
        if config.eta is None:
            with _PhaseTimer(timings, "probe", logger):
                report = probe_and_select(
                    src,
                    inputs.first_prompt,
                    inputs.first_cameras,
                    config.step,
                    config.render,
                    sched,
                    config.probe,
                    rng=np.random.default_rng(seeds["probe"]),
                    logger=logger,
                )
            artifacts["probe"] = JSONReportPublisher({"output_file": os.path.join(out_dir, PROBE_FILE)}).publish(report)
            phases.append("probe")
            eta = report.eta
        else:
            eta = float(config.eta)
            if logger is not None:
                logger.info(f"eta fixed at {eta}, probe skipped")

        phase = "perturb"
        with _PhaseTimer(timings, "perturb", logger):
            perturbed = perturb(src, config.init, eta, seeds["perturb"]).to_storage_precision()
            artifacts["perturbed"] = os.path.join(out_dir, "perturbed.pnrf")
            save_checkpoint(perturbed, artifacts["perturbed"])
        phases.append("perturb")

        phase = "edit"
        milestone = config.milestone_step()
        with _PhaseTimer(timings, "edit", logger):
            rng = np.random.default_rng(seeds["edit"])
            params, history = run_distillation(
                perturbed,
                inputs.first_prompt,
                inputs.first_cameras,
                config.step,
                config.render,
                sched,
                milestone,
                start_tau=0,
                rng=rng,
                logger=logger,
            )
            params, history = run_distillation(
                params,
                inputs.prompt,
                inputs.cameras,
                config.step,
                config.render,
                sched,
                config.edit_steps - milestone,
                start_tau=milestone,
                rng=rng,
                history=history,
                logger=logger,
            )
        phases.append("edit")
        artifacts["edit_trace"] = TracePublisher({"output_file": os.path.join(out_dir, "edit_trace.csv")}).publish(
            history
        )
        identity_after_edit = ring_identity_distance(params, src, inputs.cameras, config.render, config.refine)

        phase = "refine"
        trace = None
        refine_steps = 0
        if not config.skip_refine and config.refine_steps > 0:
            with _PhaseTimer(timings, "refine", logger):
                params, _refine_history, trace = run_refinement(
                    params,
                    src,
                    inputs.prompt,
                    inputs.cameras,
                    config.step,
                    config.render,
                    config.refine,
                    sched,
                    start_tau=config.edit_steps,
                    rng=np.random.default_rng(seeds["refine"]),
                    logger=logger,
                )
            phases.append("refine")
            refine_steps = config.refine_steps
            artifacts["refine_trace"] = TracePublisher(
                {"output_file": os.path.join(out_dir, "refine_trace.csv")}
            ).publish(trace)
        elif logger is not None:
            logger.info("refinement skipped")
    except (NonFiniteError, NumericalError) as e:
        if logger is not None:
            logger.exception(f"{phase} phase failed")
        _write_failure(out_dir, config, phase, e, {"phases": phases, "artifacts": artifacts, "timings_ms": timings})
        raise NumericalError(f"{phase} phase failed: {e}") from e

    final = params.to_storage_precision()
    artifacts["final"] = os.path.join(out_dir, "final.pnrf")
    save_checkpoint(final, artifacts["final"])
    artifacts["orbit"] = publish_views(
        [render(final, cam, config.render) for cam in inputs.cameras], os.path.join(out_dir, "orbit")
    )
    metrics = {
        "edit_target_mse": edit_target_mse(final, inputs.prompt, inputs.cameras, config.render),
        "identity_distance": ring_identity_distance(final, src, inputs.cameras, config.render, config.refine),
        "identity_distance_after_edit": identity_after_edit,
        "final_monitor_loss": float(history.losses[-1]) if len(history) else None,
    }
    run = EditRun(
        probe=report,
        eta=eta,
        probe_skipped=report is None,
        source_checkpoint=config.source_checkpoint,
        perturbed_checkpoint=artifacts["perturbed"],
        final_checkpoint=artifacts["final"],
        edit_history=history,
        refine_trace=trace,
        final_params=final,
        phases=phases,
        steps={
            "probe": 0 if report is None else config.probe.probe_steps,
            "edit": config.edit_steps,
            "edit_first_resolution": milestone,
            "refine": refine_steps,
        },
        timings_ms=timings,
        metrics=metrics,
        artifacts=artifacts,
    )
    artifacts["summary"] = os.path.join(out_dir, SUMMARY_FILE)
    JSONReportPublisher({"output_file": artifacts["summary"]}).publish(run.to_summary(config))
    if logger is not None:
        logger.info(
            f"edit finished: eta={eta:.4f} edit_target_mse={metrics['edit_target_mse']:.6g} "
            f"identity_distance={metrics['identity_distance']:.6g}"
        )
    return run


def fit_targets(config):
    """
    Cameras and target images for fitting: renders of ``fit.target_checkpoint``
    on the configured ring, or else the per-view targets of the prompt.
    """
    if config.fit.target_checkpoint:
        target = load_checkpoint(_require(config.fit.target_checkpoint, "fit target checkpoint"))
        cameras = config.ring.cameras(center=tuple(target.bbox.center))
        return cameras, [render(target, cam, config.render) for cam in cameras], target.bbox
    if config.prompt:
        descriptor = load_descriptor(_require(config.prompt, "prompt descriptor"))
        prompt, cameras = descriptor.build(config.render)
        bbox = descriptor.load_fields()[0].bbox
        return cameras, [prompt.view(i).mixture_mean for i in range(prompt.n_views)], bbox
    raise ConfigError("fit needs fit.target_checkpoint or a prompt descriptor")


def cmd_fit(config, logger=None):
    """
    Fit a fresh field to the target views and write fitted.pnrf.

    A non-converged fit still writes its checkpoint before raising
    :class:`NumericalError`.
    """
    cameras, targets, bbox = fit_targets(config)
    init = sample_init(config.init, config.grid, config.seed, bbox)
    result = fit_field(init, cameras, targets, config.render, config.fit, logger=logger)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "fitted.pnrf")
    save_checkpoint(result.params.to_storage_precision(), path)
    TracePublisher({"output_file": os.path.join(config.output_dir, "fit_trace.csv")}).publish(result.history)
    if not result.converged:
        raise NumericalError(
            f"fit did not reach mse {config.fit.tolerance} in {config.fit.steps} steps "
            f"(final {result.final_mse:.6g}); partial checkpoint written to {path}"
        )
    return path, result


def cmd_render(checkpoint, n_views, resolution, out_dir, render_cfg, ring=None, logger=None):
    """Render ``n_views`` orbit views of a checkpoint to view_000.png, view_001.png, ..."""
    ring = RingSpec() if ring is None else ring
    params = load_checkpoint(checkpoint)
    cameras = orbit_cameras(n_views, ring.radius, ring.elevation, resolution, tuple(params.bbox.center), ring.fov)
    paths = publish_views([render(params, cam, render_cfg) for cam in cameras], out_dir)
    if logger is not None:
        logger.info(f"rendered {len(paths)} views of {checkpoint} to {out_dir}")
    return paths


def cmd_scenario(name, out_dir, dims=(16, 16, 16), ring=None, logger=None):
    paths = write_scenario(name, out_dir, dims, ring)
    if logger is not None:
        logger.info(f"wrote scenario '{name}' to {out_dir}")
    return paths


def cmd_verify(config, samples=20000, n_coords=20, resolution=8, logger=None):
    """
    Check the source render gradient against finite differences and the
    prompt denoiser against importance sampling; write oracle_report.jsonl.
    """
    inputs = load_edit_inputs(config, logger)
    rng = np.random.default_rng(config.seed)
    cam = inputs.cameras[0].with_resolution(resolution, resolution)
    target = np.full((resolution, resolution, 3), 0.5)

    def loss_fn(p):
        return l2_pixel_loss(render(p, cam, config.render), target)[0]

    coords = rng.choice(inputs.source.size, size=min(int(n_coords), inputs.source.size), replace=False)
    _loss, analytic = render_loss_grad(inputs.source, cam, config.render, l2_pixel_loss, target)
    numeric = finite_diff_grad(loss_fn, inputs.source, 1e-4, coords)
    scale = float(np.max(np.abs(numeric[coords])))
    reports = [
        OracleReport(
            "render_grad",
            numeric[coords],
            np.zeros(len(coords)),
            len(coords),
            analytic.flat()[coords],
            k=0.0,
            abs_tol=1e-3 * scale + 1e-9,
        )
    ]

    small_prompt, small_cameras = inputs.descriptor.build(config.render, resolution=2)
    sigma = config.noise_schedule().bounds(0)[1] * config.noise_schedule().sigma_max
    y = render(inputs.source, small_cameras[0], config.render) + rng.normal(0.0, sigma, size=(2, 2, 3))
    reports.append(mc_posterior_mean(small_prompt, 0, y, sigma, int(samples), rng))

    os.makedirs(config.output_dir, exist_ok=True)
    OracleReportPublisher({"output_file": os.path.join(config.output_dir, "oracle_report.jsonl")}).publish(reports)
    if logger is not None:
        for r in reports:
            logger.info(f"oracle {r.name}: passed={r.passed}")
    return reports
