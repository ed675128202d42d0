from __future__ import annotations
import psutil
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_threads() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RECONNECT2D_", env_file=".env", extra="ignore")

    # Core
    threads: int = Field(default_factory=_default_threads, ge=1, description="Cap on internal parallelism and sweep workers.")
    output_root: str = Field(default="./runs", description="Parent directory for runs without an explicit out.dir.")

    # Stepping
    max_halvings: int = Field(default=12, ge=0, description="CFL halvings tried before a step is declared failed.")
    cfl: float = Field(default=0.5, gt=0, le=1)

    # Logging
    log_level: str = Field(default="INFO")
    json_logs: bool = Field(default=False)

    # Metrics
    metrics_file: str = Field(default="metrics.prom", description="Prometheus text dump written into each run directory.")


def load_settings() -> Settings:
    return Settings()
