"""
Pipeline configuration loaded from the ``--config`` JSON file.

Precedence: command-line flags over file values over environment settings.
"""

import json
from pathlib import Path
from typing import Any, ClassVar, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.domain.entities.value_objects import IcpParams, MetricConfig
from src.domain.exceptions import InvalidConfigurationError, ParseError, RasterIOError
from src.domain.services.terrain import DEFAULT_SLOPE, MosaicSpec
from src.infrastructure.config.settings import Settings


class IcpConfig(BaseModel):
    """DSM-ICP parameters."""

    model_config: ClassVar[ConfigDict] = ConfigDict(extra='forbid')

    n_queries: int = Field(2065, ge=3)
    max_iterations: int = Field(50, ge=1)
    rel_tol: float = Field(1e-6, gt=0)
    abs_tol: float = Field(1e-4, gt=0)
    trim_fraction: float = Field(0.1, ge=0, lt=1)
    correspondence_reject: float = Field(10.0, gt=0)
    max_ring_radius: int = Field(64, ge=1)


class SynthSpecDTO(BaseModel):
    """Synthetic mosaic layout, terrain and perturbation ranges."""

    model_config: ClassVar[ConfigDict] = ConfigDict(extra='forbid')

    rows: int = Field(1, ge=1, le=64)
    cols: int = Field(2, ge=1, le=64)
    tile_size: int = Field(64, ge=4, le=8192)
    overlap: float = Field(0.5, ge=0, lt=1, description="Fraction shared with each rook neighbor")
    gsd: float = Field(1.0, gt=0)
    amplitude: float = Field(40.0, ge=0, description="Diamond-square displacement range, meters")
    roughness: float = Field(0.55, gt=0, lt=1)
    slope: Optional[float] = Field(DEFAULT_SLOPE, gt=0, description="RMS terrain gradient, m/m; null keeps raw relief")
    max_rotation_deg: float = Field(0.0, ge=0, le=45)
    max_shift_px: float = Field(0.0, ge=0)
    max_shift_m: float = Field(0.0, ge=0)
    nodata_fraction: float = Field(0.0, ge=0, lt=1)
    noise_sigma: float = Field(0.0, ge=0)
    origin: Tuple[float, float] = (0.0, 0.0)

    def to_spec(self, seed: int) -> MosaicSpec:
        return MosaicSpec(**self.model_dump(), seed=seed)


class PipelineConfig(BaseModel):
    """Every tunable of the pipeline; unknown keys are rejected."""

    model_config: ClassVar[ConfigDict] = ConfigDict(extra='forbid', validate_assignment=True)

    inputs: List[str] = Field(default_factory=list, description="Input raster paths")
    overlap_threshold: float = Field(0.05, ge=0, lt=1)
    icp: IcpConfig = Field(default_factory=IcpConfig)
    tau: float = Field(10.0, gt=0)
    sampling: Literal["bilinear", "nearest"] = "bilinear"
    anchor: int = Field(0, ge=0)
    solver: Literal["average", "greedy"] = "average"
    target_gsd: Optional[float] = Field(None, gt=0)
    resample_iterations: int = Field(6, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    threads: int = Field(1, ge=1, le=256)
    out_dir: Path = Path("out")
    format: Optional[Literal["ascii", "dsmg"]] = Field(None, description="Output raster format")
    synth: SynthSpecDTO = Field(default_factory=SynthSpecDTO)

    @classmethod
    def from_settings(cls, settings: Settings) -> 'PipelineConfig':
        """Defaults taken from environment settings."""
        return cls(
            overlap_threshold=settings.graph.overlap_threshold,
            icp=IcpConfig(**settings.icp.model_dump(), max_ring_radius=settings.search.max_ring_radius),
            tau=settings.metric.tau,
            sampling=settings.metric.sampling,
            anchor=settings.solver.anchor,
            solver=settings.solver.solver,
            target_gsd=settings.fusion.target_gsd,
            resample_iterations=settings.fusion.resample_iterations,
            seed=settings.app.seed,
            threads=settings.app.threads,
            out_dir=settings.app.out_dir,
            format=settings.raster.default_format,
        )

    def merged(self, overrides: Dict[str, Any]) -> 'PipelineConfig':
        """
        Copy with ``overrides`` applied; nested sections merge key by key.

        Raises:
            InvalidConfigurationError: the result fails validation
        """
        data = _deep_merge(self.model_dump(), {k: v for k, v in overrides.items() if v is not None})
        try:
            return PipelineConfig.model_validate(data)
        except ValidationError as error:
            raise _configuration_error(error) from error

    def icp_params(self) -> IcpParams:
        return IcpParams(**self.icp.model_dump(), seed=self.seed, threads=self.threads)

    def metric_config(self) -> MetricConfig:
        return MetricConfig(tau=self.tau, sampling=self.sampling)


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _configuration_error(error: ValidationError) -> InvalidConfigurationError:
    errors = [
        {"field": ".".join(str(part) for part in item["loc"]), "message": item["msg"]}
        for item in error.errors()
    ]
    return InvalidConfigurationError("Invalid pipeline configuration", errors)


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Raw JSON object of a configuration file.

    Raises:
        RasterIOError: the file cannot be read
        ParseError: the file is not a JSON object
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise RasterIOError(str(path), "read", error) from error
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(str(path), error.msg, line=error.lineno) from error
    if not isinstance(data, dict):
        raise ParseError(str(path), "configuration must be a JSON object")
    return data
