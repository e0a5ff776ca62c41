"""
Integration tests for the command-line driver.
Commands run in-process through ``run`` with a container built from test settings.
"""

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest
from dishka import Container

from src.domain.entities.dsm_grid import DsmGrid
from src.infrastructure.adapters.inbound.cli.app import run
from src.infrastructure.adapters.outbound.raster.file_raster_repository import FileRasterRepositoryAdapter
from tests.helpers import wave_heights

FAST = ["--n-queries", "300"]


def read_json(path: Path) -> Dict[str, Any]:
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    return tmp_path / "run"


@pytest.fixture
def save(raster_repository: FileRasterRepositoryAdapter, tmp_path: Path):
    """Write a grid under the test directory and return its path."""

    def writer(grid: DsmGrid, name: str) -> str:
        path = str(tmp_path / "inputs" / name)
        raster_repository.write(grid, path)
        return path

    return writer


@pytest.mark.integration
class TestCliParsing:
    """Argument handling."""

    @pytest.mark.parametrize("verb", ["register", "graph", "solve", "fuse", "eval", "synth"])
    def test_help(self, verb: str, container: Container) -> None:
        with pytest.raises(SystemExit) as exc_info:
            run([verb, "--help"], container)

        assert exc_info.value.code == 0

    @pytest.mark.error_handling
    def test_usage_error_exits_with_input_code(self, container: Container) -> None:
        with pytest.raises(SystemExit) as exc_info:
            run(["synth", "--rows", "many"], container)

        assert exc_info.value.code == 1

    @pytest.mark.error_handling
    def test_unknown_verb(self, container: Container) -> None:
        with pytest.raises(SystemExit) as exc_info:
            run(["align"], container)

        assert exc_info.value.code == 1

    def test_global_options_after_verb(self, container: Container, out_dir: Path) -> None:
        code = run(["synth", "--rows", "1", "--cols", "1", "--tile-size", "16", "--out", str(out_dir)], container)

        assert code == 0
        assert (out_dir / "ground_truth.json").is_file()


@pytest.mark.integration
class TestRegisterCommand:
    """register verb."""

    def test_self_registration(self, container: Container, save, wave_grid: DsmGrid, out_dir: Path) -> None:
        path = save(wave_grid, "wave.dsmg")

        code = run(["--out", str(out_dir), "register", path, path, *FAST], container)

        report = read_json(out_dir / "registration.json")
        assert code == 0
        assert report["err"] <= 1e-6
        np.testing.assert_allclose(report["translation"], [0.0, 0.0, 0.0], atol=1e-6)
        assert report["moving"] == path

    def test_iteration_cap_exits_with_not_converged_code(self, container: Container, save, make_grid,
                                                         out_dir: Path) -> None:
        reference = save(make_grid(wave_heights(64, 64)), "reference.dsmg")
        moving = save(make_grid(wave_heights(64, 64) + 2.0, grid_id=1), "lifted.dsmg")

        code = run(["--out", str(out_dir), "register", moving, reference, *FAST, "--max-iterations", "1"], container)

        report = read_json(out_dir / "registration.json")
        assert code == 4
        assert report["converged"] is False
        assert report["iterations"] == 1

    @pytest.mark.error_handling
    def test_disjoint_rasters_exit_with_registration_code(self, container: Container, save, make_grid,
                                                          out_dir: Path) -> None:
        near = save(make_grid(wave_heights(32, 32)), "near.dsmg")
        far = save(make_grid(wave_heights(32, 32), x0=10_000.0), "far.dsmg")

        code = run(["--out", str(out_dir), "register", near, far, *FAST], container)

        assert code == 2
        assert "error" in read_json(out_dir / "error.json")

    @pytest.mark.error_handling
    def test_missing_input(self, container: Container, tmp_path: Path, out_dir: Path,
                           capsys: pytest.CaptureFixture) -> None:
        missing = str(tmp_path / "absent.dsmg")

        code = run(["--out", str(out_dir), "register", missing, missing], container)

        assert code == 1
        assert read_json(out_dir / "error.json")["error"]["code"] == "RASTER_IO_ERROR"
        assert capsys.readouterr().err.startswith("error: ")


@pytest.mark.integration
class TestGraphAndSolveCommands:
    """graph and solve verbs."""

    @pytest.fixture
    def tiles(self, save, make_grid) -> list:
        heights = wave_heights(64, 128)
        return [
            save(make_grid(heights[:, :64], grid_id=0), "a.dsmg"),
            save(make_grid(heights[:, 32:96], x0=32.0), "b.dsmg"),
            save(make_grid(heights[:, 64:], x0=64.0), "c.dsmg"),
        ]

    def test_graph_writes_edges(self, container: Container, tiles: list, out_dir: Path) -> None:
        code = run(["--out", str(out_dir), "graph", *tiles, *FAST], container)

        graph = read_json(out_dir / "scene_graph.json")
        assert code == 0
        assert [vertex["path"] for vertex in graph["vertices"]] == tiles
        assert {(edge["i"], edge["j"]) for edge in graph["edges"]} == {(0, 1), (1, 2)}

    @pytest.mark.parametrize("solver", ["average", "greedy"])
    def test_solve_from_graph_file(self, solver: str, container: Container, tiles: list, out_dir: Path) -> None:
        run(["--out", str(out_dir), "graph", *tiles, *FAST], container)

        code = run(["--out", str(out_dir), "solve", "--graph", str(out_dir / "scene_graph.json"),
                    "--solver", solver], container)

        poses = read_json(out_dir / "poses.json")
        assert code == 0
        assert poses["solver"] == solver
        assert [pose["id"] for pose in poses["poses"]] == [0, 1, 2]
        for pose in poses["poses"]:
            np.testing.assert_allclose(pose["translation"], [0.0, 0.0, 0.0], atol=1e-5)

    @pytest.mark.error_handling
    def test_disconnected_collection(self, container: Container, save, make_grid, out_dir: Path) -> None:
        near = save(make_grid(wave_heights(32, 32)), "near.dsmg")
        far = save(make_grid(wave_heights(32, 32), x0=10_000.0), "far.dsmg")

        code = run(["--out", str(out_dir), "graph", near, far, *FAST], container)

        assert code == 3
        error = read_json(out_dir / "error.json")["error"]
        assert error["code"] == "DISCONNECTED_GRAPH"

    @pytest.mark.error_handling
    def test_single_raster(self, container: Container, save, wave_grid: DsmGrid, out_dir: Path) -> None:
        code = run(["--out", str(out_dir), "solve", save(wave_grid, "only.dsmg")], container)

        assert code == 3


@pytest.mark.integration
class TestFuseAndEvalCommands:
    """fuse and eval verbs."""

    def test_reference_offset(self, container: Container, save, make_grid, out_dir: Path) -> None:
        heights = wave_heights(48, 48)
        subject = save(make_grid(heights + 3.0), "subject.dsmg")
        reference = save(make_grid(heights), "reference.dsmg")

        code = run(["--out", str(out_dir), "eval", "--fused", subject, "--reference", reference], container)

        metrics = read_json(out_dir / "metrics.json")
        assert code == 0
        assert metrics["rmse_tau"] == pytest.approx(3.0)
        assert metrics["inlier_ratio"] == 1.0

    def test_error_map_and_profile(self, container: Container, save, make_grid, out_dir: Path) -> None:
        heights = wave_heights(32, 32)
        subject = save(make_grid(heights + 1.0), "subject.asc")
        reference = save(make_grid(heights), "reference.asc")

        code = run(["--out", str(out_dir), "eval", "--fused", subject, "--reference", reference, "--error-map",
                    "--profile", "0,5,20,5", "--format", "ascii"], container)

        metrics = read_json(out_dir / "metrics.json")
        assert code == 0
        assert (out_dir / "error_map.asc").is_file()
        assert metrics["profile"]["distances"][0] == 0.0

    def test_fuse_writes_rasters(self, container: Container, save, make_grid, out_dir: Path) -> None:
        first = save(make_grid(np.full((10, 20), 1.0)), "first.dsmg")
        second = save(make_grid(np.full((10, 20), 3.0), x0=10.0), "second.dsmg")

        code = run(["--out", str(out_dir), "fuse", first, second], container)

        result = read_json(out_dir / "fuse.json")
        assert code == 0
        assert (result["width"], result["height"], result["n_inputs"]) == (30, 10, 2)
        assert Path(result["fused"]).is_file()
        assert Path(result["contributors"]).is_file()

    @pytest.mark.error_handling
    def test_invalid_config_file(self, container: Container, save, wave_grid: DsmGrid, tmp_path: Path,
                                 out_dir: Path) -> None:
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tau": -1.0}), encoding="utf-8")
        path = save(wave_grid, "wave.dsmg")

        code = run(["--config", str(config), "--out", str(out_dir), "eval", "--fused", path, "--reference", path],
                   container)

        assert code == 1
        assert read_json(out_dir / "error.json")["error"]["code"] == "INVALID_CONFIGURATION"

    def test_flags_override_config_file(self, container: Container, save, make_grid, tmp_path: Path,
                                        out_dir: Path) -> None:
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tau": 1.0}), encoding="utf-8")
        heights = wave_heights(16, 16)
        subject = save(make_grid(heights + 2.0), "subject.dsmg")
        reference = save(make_grid(heights), "reference.dsmg")

        code = run(["--config", str(config), "--out", str(out_dir), "eval", "--fused", subject,
                    "--reference", reference, "--tau", "5"], container)

        assert code == 0
        assert read_json(out_dir / "metrics.json")["tau"] == 5.0


@pytest.mark.integration
class TestSynthCommand:
    """synth verb."""

    ARGS = ["--rows", "2", "--cols", "2", "--tile-size", "32", "--max-rotation", "1", "--max-shift-px", "2",
            "--noise-sigma", "0.05", "--seed", "21"]

    def test_deterministic_files(self, container: Container, tmp_path: Path) -> None:
        run(["--out", str(tmp_path / "first"), "synth", *self.ARGS], container)
        run(["--out", str(tmp_path / "second"), "synth", *self.ARGS], container)

        for name in ("tile_00.dsmg", "tile_03.dsmg", "truth.dsmg", "ground_truth.json"):
            first = (tmp_path / "first" / name).read_bytes()
            second = (tmp_path / "second" / name).read_bytes()
            if name.endswith(".json"):
                first = first.replace(b"first", b"second")
            assert first == second

    def test_ground_truth_contents(self, container: Container, out_dir: Path) -> None:
        code = run(["--out", str(out_dir), "synth", *self.ARGS, "--format", "ascii"], container)

        truth = read_json(out_dir / "ground_truth.json")
        assert code == 0
        assert truth["seed"] == 21
        assert [tile["id"] for tile in truth["tiles"]] == [0, 1, 2, 3]
        assert all(Path(tile["path"]).suffix == ".asc" for tile in truth["tiles"])
        assert Path(truth["truth"]).is_file()


@pytest.mark.integration
@pytest.mark.acceptance
@pytest.mark.slow
class TestPipelineAcceptance:
    """synth -> graph -> solve -> fuse -> eval on a 3x3 mosaic."""

    def test_full_pipeline_recovers_truth(self, container: Container, tmp_path: Path) -> None:
        out = tmp_path / "pipeline"
        base = ["--out", str(out), "--seed", "5"]
        assert run([*base, "synth", "--rows", "3", "--cols", "3", "--tile-size", "96", "--max-rotation", "1",
                    "--max-shift-px", "3", "--max-shift-m", "1"], container) == 0
        truth = read_json(out / "ground_truth.json")
        tiles = [tile["path"] for tile in truth["tiles"]]

        assert run([*base, "eval", *tiles], container) == 0
        unregistered_pairwise = read_json(out / "metrics.json")
        assert run([*base, "fuse", *tiles], container) == 0
        assert run([*base, "eval", "--fused", str(out / "fused.dsmg"), "--reference", truth["truth"],
                    "--align-first"], container) == 0
        unregistered_fused = read_json(out / "metrics.json")

        assert run([*base, "graph", *tiles], container) == 0
        assert run([*base, "solve", "--graph", str(out / "scene_graph.json")], container) == 0
        assert run([*base, "eval", *tiles, "--poses", str(out / "poses.json"),
                    "--graph", str(out / "scene_graph.json")], container) == 0
        pairwise = read_json(out / "metrics.json")
        assert run([*base, "fuse", *tiles, "--poses", str(out / "poses.json")], container) == 0
        assert run([*base, "eval", "--fused", str(out / "fused.dsmg"), "--reference", truth["truth"],
                    "--align-first"], container) == 0
        fused = read_json(out / "metrics.json")

        assert pairwise["mean_pairwise_rmse_tau"] <= 0.5 * unregistered_pairwise["mean_pairwise_rmse_tau"]
        assert all(pair["tree_hops"] is not None for pair in pairwise["pairs"])
        assert fused["rmse_tau"] <= 0.5 * unregistered_fused["rmse_tau"]
        assert fused["inlier_ratio"] > 0.95
