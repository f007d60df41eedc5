from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from chp_power.core.config.constants import OracleConstants, SolverConstants


class Settings(BaseSettings):
    """Application settings."""

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Log level: DEBUG, INFO, WARNING, ERROR, CRITICAL")
    LOG_FORMAT: str = Field(default="console", description="Log format: json, console")
    LOG_FILE: Optional[str] = Field(default=None, description="Optional path mirroring stderr logs")

    # Numerics
    TOLERANCE: float = Field(
        default=SolverConstants.DEFAULT_TOLERANCE,
        gt=0,
        description="Absolute comparison tolerance, scaled by magnitude",
    )
    PRICE_SCAN_EPSILON: float = Field(
        default=SolverConstants.PRICE_SCAN_EPSILON,
        gt=0,
        description="Offset around each price kink in the uplift minimality scan",
    )

    # Enumeration bounds
    DISPATCH_ORACLE_MAX_UNITS: int = Field(
        default=SolverConstants.DISPATCH_ORACLE_MAX_UNITS,
        ge=1,
        description="Largest available fleet the dispatch oracle enumerates",
    )
    COALITION_ENUMERATION_LIMIT: int = Field(
        default=SolverConstants.COALITION_ENUMERATION_LIMIT,
        ge=1,
        description="Largest C(n, size) coalition_stats agrees to enumerate",
    )

    # Best-response oracles
    ORACLE_MAX_GRID_POINTS: int = Field(
        default=OracleConstants.MAX_GRID_POINTS,
        ge=2,
        description="Cap on uniform samples of the single-generator oracle",
    )
    CHECK_ORACLE_GRID_POINTS: int = Field(
        default=OracleConstants.CHECK_GRID_POINTS,
        ge=2,
        description="Uniform samples per oracle call inside the check suites",
    )
    PAIR_ORACLE_GRID_POINTS: int = Field(
        default=OracleConstants.PAIR_GRID_POINTS,
        ge=2,
        description="Uniform samples per axis of the pair oracle",
    )

    # Experiments
    DEFAULT_SEED: int = Field(default=42, description="Seed of the randomized suites")
    DEFAULT_TRIALS: Optional[int] = Field(
        default=None,
        ge=1,
        description="Instances for every randomized suite; unset keeps each suite's own count",
    )
    SWEEP_WORKERS: int = Field(default=1, ge=1, description="Worker processes used by sweep")

    @field_validator("LOG_LEVEL")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """Accept log levels in any case."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {v}")
        return level

    @field_validator("LOG_FORMAT")
    @classmethod
    def normalize_log_format(cls, v: str) -> str:
        fmt = v.lower()
        if fmt not in {"json", "console"}:
            raise ValueError(f"unknown log format: {v}")
        return fmt

    model_config = SettingsConfigDict(
        env_prefix="CHP_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


# Create settings instance
settings = Settings()
