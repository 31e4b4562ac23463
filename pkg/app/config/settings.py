"""Application configuration settings."""

from typing import Optional
from pydantic_settings import BaseSettings
from pydantic import Field


class SieveConfig(BaseSettings):
    """Arithmetic-function sieve configuration."""

    memory_ceiling_bytes: int = Field(
        default=8 * 1024**3,
        description="Largest sieve footprint (stored arrays plus build scratch) in bytes"
    )
    method: str = Field(
        default="vectorized",
        description="Sieve construction method: vectorized or linear"
    )

    class Config:
        env_prefix = "SIEVE_"
        env_file = ".env"
        extra = "ignore"


class CacheConfig(BaseSettings):
    """Sieve cache file configuration."""

    dir: Optional[str] = Field(
        default=None,
        description="Default directory for sieve cache files (TOTIENT_CACHE_DIR)"
    )

    class Config:
        env_prefix = "TOTIENT_CACHE_"
        env_file = ".env"
        extra = "ignore"


class ImageConfig(BaseSettings):
    """Totient image construction configuration."""

    refined_preimage_bound: bool = Field(
        default=True,
        description="Use the Rosser-Schoenfeld fixed point instead of 2x^2"
    )
    workers: int = Field(default=4, description="Threads marking image bits")
    chunk_size: int = Field(
        default=1 << 22,
        description="Preimage entries handed to one worker at a time"
    )

    class Config:
        env_prefix = "IMAGE_"


class NumericsConfig(BaseSettings):
    """Numerical tolerances and sizes."""

    bisection_epsilon: float = Field(
        default=1e-6,
        description="Bracket (eps, 1 - eps) for the exponent equation"
    )
    polish_threshold: float = Field(
        default=1e-3,
        description="Bracket width at which bisection hands over to Newton"
    )
    max_iterations: int = Field(default=200, description="Root finder iteration cap")
    default_tolerance: float = Field(default=1e-12, description="Default root tolerance")
    quadrature_steps: int = Field(
        default=64,
        description="Quadrature panels per Abel segment"
    )
    wallis_terms: int = Field(default=10**6, description="Wallis product factors")
    branch_grid_points: int = Field(
        default=10**4,
        description="Grid points used to scan the exponent branches"
    )
    real_digits: int = Field(
        default=15,
        description="Significant digits for serialized reals"
    )

    class Config:
        env_prefix = "NUMERICS_"


class MonitoringConfig(BaseSettings):
    """Logging configuration."""

    log_level: str = Field(default="WARNING", description="Log level")
    log_format: str = Field(default="json", description="Log format: json or console")

    class Config:
        env_prefix = "MONITORING_"
        env_file = ".env"
        extra = "ignore"


class Settings(BaseSettings):
    """Main application settings."""

    app_name: str = "totient-gaps"
    app_version: str = "1.0.0"

    # Sub-configurations
    sieve: SieveConfig = Field(default_factory=SieveConfig)
    cache: CacheConfig = Field(default_factory=CacheConfig)
    image: ImageConfig = Field(default_factory=ImageConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    monitoring: MonitoringConfig = Field(default_factory=MonitoringConfig)

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"  # Ignore extra fields


# Global settings instance
settings = Settings()
