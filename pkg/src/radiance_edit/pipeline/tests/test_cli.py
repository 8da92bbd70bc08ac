# SPDX-FileCopyrightText: 2026 radiance-edit contributors
# SPDX-License-Identifier: Apache-2.0

import json
import os

import pytest

from radiance_edit.pipeline import cli


@pytest.fixture
def scene_dir(tmp_path):
    out = os.path.join(tmp_path, "scene")
    assert cli.main(["scenario", "color_change", "--out-dir", out, "--grid", "4"]) == cli.EXIT_OK
    return out


@pytest.fixture
def config_file(tmp_path, scene_dir):
    path = os.path.join(tmp_path, "run.json")
    data = {
        "grid": [4, 4, 4],
        "render": {"samples": 16},
        "ring": {"n_views": 4, "resolution": 4},
        "edit_steps": 4,
        "refine_steps": 2,
        "probe": {"probe_steps": 4, "window": 2},
        "fit": {"steps": 2000},
        "source_checkpoint": os.path.join(scene_dir, "source.pnrf"),
        "prompt": os.path.join(scene_dir, "prompt.json"),
        "output_dir": os.path.join(tmp_path, "run"),
    }
    with open(path, "w") as f:
        json.dump(data, f)
    return path


def test_scenario_command(scene_dir):
    assert sorted(os.listdir(scene_dir)) == ["prompt.json", "source.pnrf", "target.pnrf"]


def test_build_config_overrides(config_file, tmp_path):
    parser = cli.get_arg_parser()
    args = parser.parse_args(
        ["edit", "--config", config_file, "--eta", "0.25", "--seed", "4", "--fixed-schedule", "--edit-steps", "8"]
    )
    config = cli.build_config(args)
    assert config.eta == 0.25
    assert config.seed == 4
    assert config.edit_steps == 8
    assert config.schedule.fixed
    assert not config.skip_refine
    assert config.refine_steps == 2


def test_build_config_fit_target(config_file, scene_dir):
    target = os.path.join(scene_dir, "target.pnrf")
    args = cli.get_arg_parser().parse_args(["fit", "--config", config_file, "--target", target])
    assert cli.build_config(args).fit.target_checkpoint == target


def test_edit_command(config_file, tmp_path):
    out_dir = os.path.join(tmp_path, "cli_run")
    code = cli.main(["edit", "--config", config_file, "--eta", "0.2", "--skip-refine", "--output-dir", out_dir])
    assert code == cli.EXIT_OK
    with open(os.path.join(out_dir, "summary.json")) as f:
        summary = json.load(f)
    assert summary["phases"] == ["perturb", "edit"]
    assert summary["eta"] == 0.2


def test_probe_and_render_commands(config_file, tmp_path, scene_dir):
    assert cli.main(["probe", "--config", config_file]) == cli.EXIT_OK
    assert os.path.exists(os.path.join(tmp_path, "run", "probe.json"))
    out_dir = os.path.join(tmp_path, "renders")
    source = os.path.join(scene_dir, "source.pnrf")
    code = cli.main(["render", source, "--n-views", "3", "--resolution", "4", "--out-dir", out_dir])
    assert code == cli.EXIT_OK
    assert len(os.listdir(out_dir)) == 3


def test_config_errors_exit_2(tmp_path, config_file):
    assert cli.main(["edit", "--config", os.path.join(tmp_path, "absent.json")]) == cli.EXIT_CONFIG
    bad = os.path.join(tmp_path, "bad.json")
    with open(bad, "w") as f:
        json.dump({"edit_steps": 4, "bogus": True}, f)
    assert cli.main(["edit", "--config", bad]) == cli.EXIT_CONFIG
    assert cli.main(["edit", "--config", config_file, "--eta", "1.5"]) == cli.EXIT_CONFIG


def test_numerical_failure_exits_3(config_file, tmp_path, scene_dir):
    bad_fit = os.path.join(tmp_path, "fit.json")
    with open(config_file) as f:
        data = json.load(f)
    data["fit"] = {"steps": 1, "tolerance": 1e-12}
    with open(bad_fit, "w") as f:
        json.dump(data, f)
    target = os.path.join(scene_dir, "target.pnrf")
    assert cli.main(["fit", "--config", bad_fit, "--target", target]) == cli.EXIT_NUMERICAL


def test_io_errors_exit_4(tmp_path):
    assert cli.main(["render", os.path.join(tmp_path, "absent.pnrf")]) == cli.EXIT_IO
    broken = os.path.join(tmp_path, "broken.pnrf")
    with open(broken, "wb") as f:
        f.write(b"NOPE" + bytes(80))
    assert cli.main(["render", broken]) == cli.EXIT_IO


def test_verbose_flag_is_accepted(scene_dir):
    source = os.path.join(scene_dir, "source.pnrf")
    out_dir = os.path.join(scene_dir, "views")
    assert cli.main(["-v", "render", source, "--n-views", "1", "--resolution", "2", "--out-dir", out_dir]) == 0


def test_malformed_prompt_exits_2(tmp_path, scene_dir):
    prompt = os.path.join(tmp_path, "prompt.json")
    with open(prompt, "w") as f:
        f.write("{not json")
    source = os.path.join(scene_dir, "source.pnrf")
    out_dir = os.path.join(tmp_path, "run")
    code = cli.main(["probe", "--source", source, "--prompt", prompt, "--output-dir", out_dir])
    assert code == cli.EXIT_CONFIG


def test_empty_prompt_ring_exits_2(tmp_path, scene_dir):
    with open(os.path.join(scene_dir, "prompt.json")) as f:
        data = json.load(f)
    data["ring"]["n_views"] = 0
    prompt = os.path.join(scene_dir, "no_views.json")
    with open(prompt, "w") as f:
        json.dump(data, f)
    source = os.path.join(scene_dir, "source.pnrf")
    code = cli.main(["probe", "--source", source, "--prompt", prompt, "--output-dir", os.path.join(tmp_path, "run")])
    assert code == cli.EXIT_CONFIG


def test_mismatched_source_exits_2(tmp_path, scene_dir):
    other = os.path.join(tmp_path, "other")
    assert cli.main(["scenario", "color_change", "--out-dir", other, "--grid", "5"]) == cli.EXIT_OK
    source = os.path.join(other, "source.pnrf")
    prompt = os.path.join(scene_dir, "prompt.json")
    code = cli.main(["probe", "--source", source, "--prompt", prompt, "--output-dir", os.path.join(tmp_path, "run")])
    assert code == cli.EXIT_CONFIG


def test_non_finite_checkpoint_exits_4(tmp_path, scene_dir):
    with open(os.path.join(scene_dir, "source.pnrf"), "rb") as f:
        blob = bytearray(f.read())
    # first density value follows the 68-byte header
    blob[68:72] = b"\x00\x00\xc0\x7f"
    broken = os.path.join(tmp_path, "nan.pnrf")
    with open(broken, "wb") as f:
        f.write(bytes(blob))
    assert cli.main(["render", broken, "--n-views", "1", "--resolution", "2"]) == cli.EXIT_IO
