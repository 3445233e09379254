"""Configuration loader from environment variables."""

from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .models import SecurityParams, SyncConfig


class Settings(BaseSettings):
    """Process-level settings loaded from ``QKDSIM_*`` environment variables."""

    # Logging
    log: str = "INFO"
    log_format: Literal["auto", "console", "json"] = "auto"

    # Runner
    out_dir: str = "runs"
    jobs: int = Field(default=1, ge=1)
    default_seed: int = Field(default=0, ge=0)

    # Post-processing defaults
    abort_qber: float = Field(default=0.11, gt=0.0, le=0.5)
    security_s: int = Field(default=10, ge=1)
    security_l: int = Field(default=10, ge=1)
    # None sizes the Cascade verification hash from s
    verify_hash_bits: Optional[int] = Field(default=None, ge=1, le=256)
    # Wegman-Carter tags live in GF(2^64)
    mac_bits: Literal[64] = 64

    # Synchronization defaults
    sync_window: int = Field(default=1000, ge=100)
    sync_search_range: int = Field(default=16, ge=0)

    model_config = SettingsConfigDict(
        env_prefix="QKDSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    def get_security_params(self) -> SecurityParams:
        """Get SecurityParams from settings."""
        return SecurityParams(
            s=self.security_s,
            l=self.security_l,
            abort_qber=self.abort_qber,
            verify_hash_bits=self.verify_hash_bits,
        )

    def get_sync_config(self) -> SyncConfig:
        """Get SyncConfig from settings."""
        return SyncConfig(window=self.sync_window, search_range=self.sync_search_range)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global settings instance.

    Returns:
        Settings instance
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reload_settings() -> Settings:
    """Reload settings from environment.

    Returns:
        New Settings instance
    """
    global _settings
    _settings = Settings()
    return _settings
