from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RasterSettings(BaseSettings):
    """Raster I/O configuration settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_RASTER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    world_file_anchor: Literal["center", "corner"] = Field(
        default="center",
        description="Whether world-file origins anchor the center or the outer corner of pixel (0, 0)"
    )
    band_rows: int = Field(
        default=256,
        gt=0,
        description="Rows per band when streaming rasters"
    )
    default_format: Literal["ascii", "dsmg"] = Field(
        default="dsmg",
        description="Format used when an output path has no recognised extension"
    )


class SearchSettings(BaseSettings):
    """Nearest-neighbor search settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_SEARCH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    max_ring_radius: int = Field(
        default=64,
        ge=1,
        description="Largest ring radius, in pixels, scanned around a nodata anchor"
    )


class IcpSettings(BaseSettings):
    """DSM-ICP defaults."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_ICP_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    n_queries: int = Field(default=2065, ge=3, description="Query points per ICP run")
    max_iterations: int = Field(default=50, ge=1, description="Iteration cap")
    rel_tol: float = Field(default=1e-6, gt=0, description="Relative residual-change tolerance")
    abs_tol: float = Field(default=1e-4, gt=0, description="Pose-delta tolerance")
    trim_fraction: float = Field(default=0.1, ge=0, lt=1, description="Share of worst residuals dropped")
    correspondence_reject: float = Field(default=10.0, gt=0, description="Maximum correspondence distance, meters")


class GraphSettings(BaseSettings):
    """Scene-graph construction settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_GRAPH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    overlap_threshold: float = Field(
        default=0.05,
        ge=0,
        lt=1,
        description="Pairs with an overlap score above this are registered"
    )


class SolverSettings(BaseSettings):
    """Global pose solver settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_SOLVER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    solver: Literal["average", "greedy"] = Field(default="average", description="Global pose solver")
    anchor: int = Field(default=0, ge=0, description="Vertex whose pose is the identity")


class MetricSettings(BaseSettings):
    """Evaluation settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_METRIC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    tau: float = Field(default=10.0, gt=0, description="Inlier threshold, meters")
    sampling: Literal["bilinear", "nearest"] = Field(default="bilinear", description="Co-location sampling")


class FusionSettings(BaseSettings):
    """Fusion settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_FUSION_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    target_gsd: Optional[float] = Field(default=None, gt=0, description="Fused GSD; finest input when unset")
    resample_iterations: int = Field(default=6, ge=1, description="Fixed-point iterations of the inverse mapping")


class AppSettings(BaseSettings):
    """Application configuration settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    app_name: str = Field(
        default="dsm-registration",
        description="Application name"
    )
    app_version: str = Field(
        default="1.0.0",
        description="Application version"
    )
    log_level: str = Field(
        default="INFO",
        description="Logging level"
    )
    json_logs: bool = Field(
        default=False,
        description="Emit structured JSON log lines instead of colored text"
    )
    log_dir: Optional[Path] = Field(
        default=None,
        description="Directory for the rotating log file; console only when unset"
    )
    threads: int = Field(
        default=1,
        ge=1,
        description="Worker threads for pairwise registration and NN batches"
    )
    seed: int = Field(
        default=0,
        ge=0,
        description="Default random seed"
    )
    out_dir: Path = Field(
        default=Path("out"),
        description="Default output directory"
    )


class Settings(BaseSettings):
    """Combined application settings."""

    model_config = SettingsConfigDict(
        env_prefix="DSMREG_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

    # Nested settings
    app: AppSettings = Field(default_factory=AppSettings)
    raster: RasterSettings = Field(default_factory=RasterSettings)
    search: SearchSettings = Field(default_factory=SearchSettings)
    icp: IcpSettings = Field(default_factory=IcpSettings)
    graph: GraphSettings = Field(default_factory=GraphSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    metric: MetricSettings = Field(default_factory=MetricSettings)
    fusion: FusionSettings = Field(default_factory=FusionSettings)


# Global settings instance
settings = Settings()
