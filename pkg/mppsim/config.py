"""
Application configuration management using pydantic-settings.

This module loads environment variables (prefix ``MPPSIM_``) and an optional
.env file and provides type-safe configuration throughout the simulator.
Per-run experiment parameters live in YAML run files instead; see
``mppsim.schemas.experiment.RunConfigFile``.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Process-wide settings loaded from environment variables.

    Automatically loads from .env file in the working directory.
    All values can be overridden by environment variables.
    """

    # Results store
    results_database_url: str = "sqlite:///mppsim_runs.db"
    persist_runs: bool = False

    # Logging
    log_level: str = "INFO"
    debug: bool = False  # echo SQL from the results store

    # Experiment defaults
    desk_repetitions: int = 1000
    default_seed: int = 0
    output_dir: str = "."

    model_config = SettingsConfigDict(
        env_prefix="MPPSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )


# Global settings instance
# This will be instantiated once when the module is imported
settings = Settings()
