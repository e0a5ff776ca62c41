"""
Command-line driver of the registration pipeline.

Verbs: register, graph, solve, fuse, eval, synth. Stages exchange only files,
so a full run is ``synth -> graph -> solve -> fuse -> eval``.
"""

import argparse
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from dishka import Container

from src.application.dtos.pipeline_config import PipelineConfig, load_config_file
from src.application.dtos.registration_dtos import GlobalPosesDTO, SceneGraphDTO
from src.application.use_cases.build_graph_use_case import BuildGraphRequest
from src.application.use_cases.evaluate_use_case import EvaluateRequest
from src.application.use_cases.fuse_use_case import FuseRequest
from src.application.use_cases.register_pair_use_case import RegisterPairRequest
from src.application.use_cases.solve_poses_use_case import SolvePosesRequest
from src.application.use_cases.synthesize_use_case import SynthesizeRequest
from src.domain.ports.inbound.services.registration_service_port import RegistrationServicePort
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.infrastructure.config.settings import Settings
from src.infrastructure.di.container import create_dishka_container
from src.infrastructure.logging.config import LoggingConfig, get_logger

from .exception_handlers import EXIT_INPUT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, handle_cli_exception
from .stage_files import read_stage_file, write_stage_file

logger = get_logger(__name__, component="cli")

REPORT_FILE = "registration.json"
GRAPH_FILE = "scene_graph.json"
POSES_FILE = "poses.json"
FUSE_FILE = "fuse.json"
METRICS_FILE = "metrics.json"
GROUND_TRUTH_FILE = "ground_truth.json"


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code, not argparse's default 2."""

    def error(self, message: str) -> None:
        self.print_usage()
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _profile(value: str) -> List[float]:
    parts = value.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected x0,y0,x1,y1")
    try:
        return [float(part) for part in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {value!r}") from None


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    """Options accepted before or after the verb."""
    default = argparse.SUPPRESS if suppress else None
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, default=default, help="pipeline configuration JSON")
    parser.add_argument("--seed", type=int, default=default, help="random seed (query sampling, synthesis)")
    parser.add_argument("--threads", type=int, default=default, help="worker thread cap")
    parser.add_argument("--out", type=Path, default=default, help="output directory")
    parser.add_argument(
        "--log-level", default=default,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level",
    )
    parser.add_argument("--json-logs", action="store_true", default=default, help="emit JSON log lines")
    return parser


def _icp_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("registration")
    group.add_argument("--n-queries", type=int, help="query points sampled from the moving raster")
    group.add_argument("--max-iterations", type=int, help="DSM-ICP iteration cap")
    group.add_argument("--trim-fraction", type=float, help="share of worst correspondences dropped")
    group.add_argument("--reject", type=float, dest="correspondence_reject", help="max correspondence distance, m")
    group.add_argument("--max-ring-radius", type=int, help="ring scan limit around nodata anchors, px")


def _graph_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--overlap-threshold", type=float, help="register pairs whose overlap exceeds this")


def _metric_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", type=float, help="inlier threshold, m")
    parser.add_argument("--sampling", choices=["bilinear", "nearest"], help="co-location sampling")


def _format_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=["ascii", "dsmg"], help="output raster format")


def build_parser() -> argparse.ArgumentParser:
    common = _global_options(suppress=True)
    parser = CliParser(
        prog="dsmreg",
        description="Memory-bounded DSM registration: pairwise DSM-ICP, scene graphs, "
                    "motion averaging, fusion and RMSE_tau evaluation.",
        parents=[_global_options(suppress=False)],
    )
    verbs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    register = verbs.add_parser("register", parents=[common], help="register one raster onto another")
    register.add_argument("moving", help="raster moved onto the reference")
    register.add_argument("reference", help="reference raster")
    _icp_options(register)

    graph = verbs.add_parser("graph", parents=[common], help="build the scene graph of a raster collection")
    graph.add_argument("rasters", nargs="*", help="input rasters; vertex ids follow this order")
    _graph_options(graph)
    _icp_options(graph)

    solve = verbs.add_parser("solve", parents=[common], help="solve global poses")
    solve.add_argument("rasters", nargs="*", help="input rasters, when no --graph is given")
    solve.add_argument("--graph", type=Path, help=f"scene graph JSON ({GRAPH_FILE})")
    solve.add_argument("--solver", choices=["average", "greedy"], help="motion averaging or greedy spanning tree")
    solve.add_argument("--anchor", type=int, help="vertex fixed to the identity pose")
    _graph_options(solve)
    _icp_options(solve)

    fuse = verbs.add_parser("fuse", parents=[common], help="fuse posed rasters")
    fuse.add_argument("rasters", nargs="*", help="input rasters, in pose-id order")
    fuse.add_argument("--poses", type=Path, help=f"global poses JSON ({POSES_FILE}); identity when omitted")
    fuse.add_argument("--target-gsd", type=float, help="fused GSD, m; finest input when omitted")
    _format_option(fuse)

    evaluate = verbs.add_parser("eval", parents=[common], help="RMSE_tau evaluation")
    evaluate.add_argument("rasters", nargs="*", help="posed rasters, in pose-id order")
    evaluate.add_argument("--poses", type=Path, help="global poses JSON; identity when omitted")
    evaluate.add_argument("--fused", type=Path, help="raster compared against --reference")
    evaluate.add_argument("--reference", type=Path, help="reference raster, e.g. the synthetic truth")
    evaluate.add_argument("--align-first", action="store_true", help="register the subject onto the reference first")
    evaluate.add_argument("--error-map", action="store_true", help="write the signed difference raster")
    evaluate.add_argument("--profile", type=_profile, metavar="X0,Y0,X1,Y1", help="sample a height profile")
    evaluate.add_argument("--graph", type=Path, help="scene graph JSON; annotates pairs with spanning-tree hops")
    _metric_options(evaluate)
    _icp_options(evaluate)
    _format_option(evaluate)

    synth = verbs.add_parser("synth", parents=[common], help="generate a synthetic mosaic with known poses")
    synth.add_argument("--rows", type=int, help="tile rows")
    synth.add_argument("--cols", type=int, help="tile columns")
    synth.add_argument("--tile-size", type=int, help="tile width and height, px")
    synth.add_argument("--overlap", type=float, help="fraction shared with each neighbor")
    synth.add_argument("--gsd", type=float, help="meters per pixel")
    synth.add_argument("--amplitude", type=float, help="diamond-square displacement range, m")
    synth.add_argument("--roughness", type=float, help="diamond-square roughness in (0, 1)")
    synth.add_argument("--slope", type=float, help="RMS terrain gradient the relief is rescaled to, m/m")
    synth.add_argument("--max-rotation", type=float, dest="max_rotation_deg", help="rotation bound, degrees")
    synth.add_argument("--max-shift-px", type=float, help="horizontal shift bound, px")
    synth.add_argument("--max-shift-m", type=float, help="vertical shift bound, m")
    synth.add_argument("--nodata-fraction", type=float, help="share of each tile punched out")
    synth.add_argument("--noise-sigma", type=float, help="Gaussian height noise, m")
    _format_option(synth)
    return parser


_ICP_KEYS = ("n_queries", "max_iterations", "trim_fraction", "correspondence_reject", "max_ring_radius")
_SYNTH_KEYS = (
    "rows", "cols", "tile_size", "overlap", "gsd", "amplitude", "roughness", "slope", "max_rotation_deg",
    "max_shift_px", "max_shift_m", "nodata_fraction", "noise_sigma",
)
_TOP_KEYS = (
    "seed", "threads", "overlap_threshold", "tau", "sampling", "solver", "anchor", "target_gsd", "format",
)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args)
    overrides: Dict[str, Any] = {key: values.get(key) for key in _TOP_KEYS}
    overrides["out_dir"] = values.get("out")
    overrides["icp"] = {key: values[key] for key in _ICP_KEYS if values.get(key) is not None}
    overrides["synth"] = {key: values[key] for key in _SYNTH_KEYS if values.get(key) is not None}
    return {key: value for key, value in overrides.items() if value not in (None, {})}


def resolve_config(args: argparse.Namespace, app_settings: Settings) -> PipelineConfig:
    """Settings, then the ``--config`` file, then command-line flags."""
    config = PipelineConfig.from_settings(app_settings)
    if getattr(args, "config", None) is not None:
        config = config.merged(load_config_file(args.config))
    return config.merged(_overrides(args))


def _inputs(args: argparse.Namespace, config: PipelineConfig) -> List[str]:
    return list(getattr(args, "rasters", None) or config.inputs)


def cmd_register(args: argparse.Namespace, config: PipelineConfig, service: RegistrationServicePort, **_: Any) -> int:
    report = service.register_pair(RegisterPairRequest(
        moving_path=args.moving,
        reference_path=args.reference,
        params=config.icp_params(),
    ))
    write_stage_file(config.out_dir / REPORT_FILE, report)
    if not report.converged:
        logger.warning(
            "DSM-ICP stopped at the iteration cap after %d iterations", report.iterations,
            extra={"operation": "register"},
        )
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _build_graph(config: PipelineConfig, service: RegistrationServicePort, paths: Sequence[str]) -> SceneGraphDTO:
    graph = service.build_graph(BuildGraphRequest(
        paths=list(paths),
        overlap_threshold=config.overlap_threshold,
        params=config.icp_params(),
        threads=config.threads,
    ))
    write_stage_file(config.out_dir / GRAPH_FILE, graph)
    return graph


def cmd_graph(args: argparse.Namespace, config: PipelineConfig, service: RegistrationServicePort, **_: Any) -> int:
    _build_graph(config, service, _inputs(args, config))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, config: PipelineConfig, service: RegistrationServicePort, **_: Any) -> int:
    if args.graph is not None:
        graph = read_stage_file(args.graph, SceneGraphDTO)
    else:
        graph = _build_graph(config, service, _inputs(args, config))
    poses = service.solve_poses(SolvePosesRequest(graph=graph, solver=config.solver, anchor=config.anchor))
    write_stage_file(config.out_dir / POSES_FILE, poses)
    return EXIT_OK


def _read_poses(path: Optional[Path]) -> Optional[GlobalPosesDTO]:
    return read_stage_file(path, GlobalPosesDTO) if path is not None else None


def cmd_fuse(
    args: argparse.Namespace,
    config: PipelineConfig,
    service: RegistrationServicePort,
    repository: RasterRepository
) -> int:
    extension = repository.extension(config.format)
    result = service.fuse(FuseRequest(
        paths=_inputs(args, config),
        poses=_read_poses(args.poses),
        output_path=str(config.out_dir / f"fused{extension}"),
        contributors_path=str(config.out_dir / f"contributors{extension}"),
        target_gsd=config.target_gsd,
        iterations=config.resample_iterations,
        fmt=config.format,
    ))
    write_stage_file(config.out_dir / FUSE_FILE, result)
    return EXIT_OK


def cmd_eval(
    args: argparse.Namespace,
    config: PipelineConfig,
    service: RegistrationServicePort,
    repository: RasterRepository
) -> int:
    error_map_path = None
    if args.error_map:
        error_map_path = str(config.out_dir / f"error_map{repository.extension(config.format)}")
    metrics = service.evaluate(EvaluateRequest(
        paths=_inputs(args, config),
        poses=_read_poses(args.poses),
        subject_path=str(args.fused) if args.fused else None,
        reference_path=str(args.reference) if args.reference else None,
        cfg=config.metric_config(),
        align_first=args.align_first,
        params=config.icp_params(),
        error_map_path=error_map_path,
        profile=tuple(args.profile) if args.profile else None,
        graph=read_stage_file(args.graph, SceneGraphDTO) if args.graph else None,
        fmt=config.format,
    ))
    write_stage_file(config.out_dir / METRICS_FILE, metrics)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, config: PipelineConfig, service: RegistrationServicePort, **_: Any) -> int:
    truth = service.synthesize(SynthesizeRequest(
        spec=config.synth.to_spec(config.seed),
        out_dir=config.out_dir,
        fmt=config.format,
    ))
    write_stage_file(config.out_dir / GROUND_TRUTH_FILE, truth)
    return EXIT_OK


COMMANDS: Dict[str, Callable[..., int]] = {
    "register": cmd_register,
    "graph": cmd_graph,
    "solve": cmd_solve,
    "fuse": cmd_fuse,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def run(argv: Optional[Sequence[str]] = None, container: Optional[Container] = None) -> int:
    """Parse ``argv``, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    container = container or create_dishka_container()
    app_settings = container.get(Settings)

    LoggingConfig(
        app_settings.app.app_name,
        args.log_level or app_settings.app.log_level,
        app_settings.app.log_dir,
    ).setup_logging(use_json_format=bool(args.json_logs) or app_settings.app.json_logs)

    out_dir: Optional[Path] = args.out or app_settings.app.out_dir
    try:
        config = resolve_config(args, app_settings)
        out_dir = config.out_dir
        logger.info(
            "Running %s", args.command,
            extra={"operation": args.command, "seed": config.seed, "threads": config.threads},
        )
        return COMMANDS[args.command](
            args,
            config,
            service=container.get(RegistrationServicePort),
            repository=container.get(RasterRepository),
        )
    except Exception as error:
        return handle_cli_exception(error, out_dir)
