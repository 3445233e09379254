"""Unit tests for configuration loading."""

import pytest
from pydantic import ValidationError

from src.qkdsim.config import Settings, get_settings, reload_settings
from src.qkdsim.models import SecurityParams, SyncConfig


class TestSettings:
    """Test Settings configuration."""
    
    def test_settings_defaults(self, monkeypatch):
        """Test Settings with default values."""
        for key in ("QKDSIM_LOG", "QKDSIM_JOBS", "QKDSIM_OUT_DIR", "QKDSIM_ABORT_QBER"):
            monkeypatch.delenv(key, raising=False)
        settings = Settings(_env_file=None)
        
        assert settings.log == "INFO"
        assert settings.log_format == "auto"
        assert settings.out_dir == "runs"
        assert settings.jobs == 1
        assert settings.abort_qber == 0.11
        assert settings.mac_bits == 64
    
    def test_settings_from_env(self, mock_env_vars):
        """Test Settings loading from QKDSIM_ environment variables."""
        settings = Settings(_env_file=None)
        
        assert settings.log == "DEBUG"
        assert settings.log_format == "json"
        assert settings.out_dir == mock_env_vars["QKDSIM_OUT_DIR"]
        assert settings.default_seed == 7
    
    def test_settings_from_env_file(self, temp_env_file):
        """Test Settings loading from a .env file."""
        settings = Settings(_env_file=temp_env_file)
        
        assert settings.log == "DEBUG"
        assert settings.jobs == 2
        assert settings.abort_qber == 0.08
    
    def test_settings_get_security_params(self):
        """Test getting SecurityParams from Settings."""
        settings = Settings(_env_file=None, security_s=12, security_l=20, abort_qber=0.05)
        
        params = settings.get_security_params()
        
        assert isinstance(params, SecurityParams)
        assert params.s == 12
        assert params.l == 20
        assert params.abort_qber == 0.05
    
    def test_verify_hash_bits_optional(self, monkeypatch):
        """Test that the verification hash width is derived unless set."""
        monkeypatch.delenv("QKDSIM_VERIFY_HASH_BITS", raising=False)
        assert Settings(_env_file=None).get_security_params().verify_hash_bits is None
        
        monkeypatch.setenv("QKDSIM_VERIFY_HASH_BITS", "40")
        assert Settings(_env_file=None).get_security_params().verify_hash_bits == 40
    
    def test_settings_get_sync_config(self):
        """Test getting SyncConfig from Settings."""
        settings = Settings(_env_file=None, sync_window=500, sync_search_range=4)
        
        sync = settings.get_sync_config()
        
        assert isinstance(sync, SyncConfig)
        assert sync.window == 500
        assert sync.search_range == 4
    
    def test_settings_reject_bad_values(self):
        """Test that out-of-range settings fail validation."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, jobs=0)
        with pytest.raises(ValidationError):
            Settings(_env_file=None, abort_qber=0.6)
        with pytest.raises(ValidationError):
            Settings(_env_file=None, log_format="xml")
    
    def test_settings_extra_env_ignored(self, monkeypatch):
        """Test that unknown QKDSIM_ variables are ignored."""
        monkeypatch.setenv("QKDSIM_NOT_A_SETTING", "1")
        
        settings = Settings(_env_file=None)
        assert not hasattr(settings, "not_a_setting")


class TestGetSettings:
    """Test the global settings accessor."""
    
    def test_get_settings_is_cached(self):
        """Test that get_settings returns one instance until reloaded."""
        first = get_settings()
        
        assert get_settings() is first
    
    def test_reload_settings_picks_up_environment(self, fresh_settings):
        """Test that reload_settings rebuilds from the environment."""
        assert fresh_settings.default_seed == 7
        assert get_settings() is fresh_settings
        
        reloaded = reload_settings()
        assert reloaded is not fresh_settings
        assert reloaded.log == "DEBUG"
