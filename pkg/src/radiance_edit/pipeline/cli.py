# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import argparse
import logging
import sys

import structlog

from radiance_edit.field.checkpoint import CheckpointError
from radiance_edit.field.params import NonFiniteError
from radiance_edit.load_config import ConfigError, load
from radiance_edit.oracle.denoiser import OracleError
from radiance_edit.pipeline import commands
from radiance_edit.pipeline.config import apply_overrides, RunConfig
from radiance_edit.pipeline.fit import NumericalError
from radiance_edit.pipeline.scenarios import SCENARIOS
from radiance_edit.render.volume import RenderConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_OVERRIDES = {
    "source": "source_checkpoint",
    "prompt": "prompt",
    "eta": "eta",
    "skip_refine": "skip_refine",
    "edit_steps": "edit_steps",
    "refine_steps": "refine_steps",
    "seed": "seed",
    "output_dir": "output_dir",
    "fixed_schedule": "fixed_schedule",
}


def configure_logging(verbose=False):
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(logging.DEBUG if verbose else logging.INFO),
        cache_logger_on_first_use=False,
    )


def build_config(args, logger=None):
    """Config file contents (if any) with the command-line overrides applied"""
    data = load(args.config, retries=2, timeout=1, logger=logger) if getattr(args, "config", None) else {}
    overrides = {}
    for option, key in _OVERRIDES.items():
        value = getattr(args, option, None)
        # store_true flags only override when given
        overrides[key] = value if value is not False else None
    data = apply_overrides(data, overrides)
    if getattr(args, "target", None):
        data["fit"] = dict(data.get("fit") or {}, target_checkpoint=args.target)
    return RunConfig.from_dict(data)


def _add_run_options(parser, edit=False):
    parser.add_argument("--config", metavar="<filename>", help="JSON run configuration")
    parser.add_argument("--source", metavar="<filename>", help="source checkpoint (.pnrf)")
    parser.add_argument("--prompt", metavar="<filename>", help="prompt descriptor (.json)")
    parser.add_argument("--seed", type=int, help="run seed")
    parser.add_argument("--output-dir", dest="output_dir", metavar="<dir>", help="directory for all artifacts")
    if edit:
        parser.add_argument("--eta", type=float, help="fixed perturbation amount; skips the landscape probe")
        parser.add_argument("--skip-refine", action="store_true", dest="skip_refine", help="omit refinement")
        parser.add_argument("--edit-steps", type=int, dest="edit_steps", help="number of distillation steps")
        parser.add_argument("--refine-steps", type=int, dest="refine_steps", help="number of refinement steps")
        parser.add_argument(
            "--fixed-schedule",
            action="store_true",
            dest="fixed_schedule",
            help="sample noise levels from a constant U(0.02, 0.98) instead of annealing",
        )


def get_arg_parser():
    """
    Parse command line options
    """

    description = "Edit voxel radiance fields by perturbation, score distillation and identity-preserving refinement"

    parser = argparse.ArgumentParser(description=description, formatter_class=argparse.RawTextHelpFormatter)
    parser.add_argument("--verbose", "-v", action="store_true", help="log every optimization step")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a fresh field to target views")
    _add_run_options(fit)
    fit.add_argument("--target", metavar="<filename>", help="checkpoint whose ring renders are the fit targets")

    probe = sub.add_parser("probe", help="run the loss-landscape probe and report eta")
    _add_run_options(probe)

    edit = sub.add_parser("edit", help="probe, perturb, distill and refine")
    _add_run_options(edit, edit=True)

    render = sub.add_parser("render", help="render orbit views of a checkpoint")
    render.add_argument("checkpoint", metavar="<filename>")
    render.add_argument("--config", metavar="<filename>", help="JSON run configuration (render and ring sections)")
    render.add_argument("--n-views", type=int, dest="n_views", default=8)
    render.add_argument("--resolution", type=int, default=32)
    render.add_argument("--out-dir", dest="out_dir", default="renders", metavar="<dir>")

    scenario = sub.add_parser("scenario", help="write a built-in edit scenario")
    scenario.add_argument("name", choices=sorted(SCENARIOS))
    scenario.add_argument("--out-dir", dest="out_dir", default=".", metavar="<dir>")
    scenario.add_argument("--grid", type=int, default=16, help="voxels per axis")

    verify = sub.add_parser("verify", help="check gradients and the denoiser against brute-force oracles")
    _add_run_options(verify)
    verify.add_argument("--samples", type=int, default=20000, help="importance samples for the denoiser check")

    return parser


def run(args, logger):
    if args.command == "scenario":
        commands.cmd_scenario(args.name, args.out_dir, (args.grid,) * 3, logger=logger)
        return EXIT_OK
    if args.command == "render":
        config = build_config(args, logger) if args.config else RunConfig(render=RenderConfig())
        commands.cmd_render(
            args.checkpoint, args.n_views, args.resolution, args.out_dir, config.render, config.ring, logger=logger
        )
        return EXIT_OK

    config = build_config(args, logger)
    if args.command == "fit":
        commands.cmd_fit(config, logger=logger)
    elif args.command == "probe":
        report = commands.cmd_probe(config, logger=logger)
        logger.info(f"selected eta {report.eta:.4f}")
    elif args.command == "edit":
        commands.cmd_edit(config, logger=logger)
    elif args.command == "verify":
        reports = commands.cmd_verify(config, samples=args.samples, logger=logger)
        if not all(r.passed for r in reports):
            raise NumericalError("oracle checks failed, see oracle_report.jsonl")
    return EXIT_OK


def main(argv=None):
    parser = get_arg_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    logger = structlog.getLogger("radiance_edit").bind(command=args.command)

    try:
        return run(args, logger)
    except (ConfigError, OracleError) as e:
        logger.exception(f"configuration error: {e}")
        return EXIT_CONFIG
    except (NumericalError, NonFiniteError) as e:
        logger.exception(f"numerical failure: {e}")
        return EXIT_NUMERICAL
    except (CheckpointError, OSError) as e:
        logger.exception(f"I/O failure: {e}")
        return EXIT_IO


############################################################
#
# S T A R T U P
#
############################################################

if __name__ == "__main__":
    sys.exit(main())
