"""Configuration management for Holonomy Lab."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI settings, overridable through ``HOLONOMY_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="HOLONOMY_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # Parallelism
    threads: int = 1

    # Tolerances
    structure_tol: float = 1e-9
    holonomy_tol: float = 1e-6
    leakage_tol: float = 1e-8
    rank_rtol: float = 1e-8

    # Discretization
    fd_step: float = 1e-5
    holonomy_steps: int = 4096
    stokes_steps: int = 400
    closure_rounds: int = 10

    # Optics
    fock_cutoff: int = 40
    r_max: float = 2.0

    log_level: str = "WARNING"


settings = Settings()
