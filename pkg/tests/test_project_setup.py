"""Tests for the project shell: packaging, logging and the environment template."""

import importlib
import io
import json
import sys
from pathlib import Path

import pytest
import structlog

from config.logging_config import configure_logging, get_logger
from src.qkdsim.config import Settings

PACKAGES = ["photonics", "protocols", "attacks", "postproc", "qnrc", "netsim", "syncctl",
            "orchestration", "monitoring", "cli"]


class TestPackaging:
    """Test the package layout and manifest."""
    
    @pytest.mark.parametrize("package", PACKAGES)
    def test_subpackage_importable(self, package):
        """Test that every simulator layer imports on its own."""
        module = importlib.import_module(f"src.qkdsim.{package}")
        
        assert Path(module.__file__).name == "__init__.py"
    
    def test_console_script(self):
        """Test that the manifest exposes the qkdsim command."""
        content = Path("pyproject.toml").read_text()
        
        assert 'qkdsim = "qkdsim.cli.main:main"' in content
    
    def test_markers_registered(self):
        """Test that the slow and integration markers are declared."""
        content = Path("pyproject.toml").read_text()
        
        assert '"slow:' in content
        assert '"integration:' in content


class TestLoggingConfiguration:
    """Test structlog setup."""
    
    @pytest.mark.parametrize("fmt", ["auto", "console", "json"])
    def test_formats(self, fmt):
        """Test that every renderer choice configures cleanly."""
        configure_logging(log_level="DEBUG", fmt=fmt)
        
        get_logger(__name__).info("format_checked", fmt=fmt)
    
    def test_json_logs_go_to_stderr(self, capsys):
        """Test that structured logs never land on stdout."""
        configure_logging(log_level="INFO", fmt="json")
        get_logger(__name__).info("stderr_only", key="value")
        
        captured = capsys.readouterr()
        assert "stderr_only" not in captured.out
        assert '"event": "stderr_only"' in captured.err
    
    def test_level_filters(self, capsys):
        """Test that events below the configured level are dropped."""
        configure_logging(log_level="WARNING", fmt="json")
        logger = get_logger(__name__)
        
        logger.info("quiet")
        logger.warning("loud", qber=0.12)
        
        lines = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
        assert [entry["event"] for entry in lines] == ["loud"]
        assert lines[0]["level"] == "warning"
        assert lines[0]["qber"] == 0.12
        assert "timestamp" in lines[0]
    
    def test_unknown_level_falls_back_to_info(self, capsys):
        """Test that an unrecognised level name behaves like INFO."""
        configure_logging(log_level="CHATTY", fmt="json")
        logger = get_logger(__name__)
        
        logger.debug("hidden")
        logger.info("shown")
        
        err = capsys.readouterr().err
        assert "shown" in err
        assert "hidden" not in err
    
    def test_follows_swapped_stderr(self, monkeypatch):
        """Test that loggers write to the current sys.stderr."""
        configure_logging(log_level="INFO", fmt="json")
        buffer = io.StringIO()
        monkeypatch.setattr(sys, "stderr", buffer)
        
        get_logger(__name__).info("swapped")
        
        assert '"event": "swapped"' in buffer.getvalue()
    
    def test_contextvars_are_merged(self, capsys):
        """Test that contextvars bound by the runner appear in log lines."""
        configure_logging(log_level="INFO", fmt="json")
        structlog.contextvars.bind_contextvars(run="abc123")
        try:
            get_logger(__name__).info("with_run")
        finally:
            structlog.contextvars.clear_contextvars()
        
        assert '"run": "abc123"' in capsys.readouterr().err


class TestEnvironmentTemplate:
    """Test .env.example against the settings model."""
    
    def test_every_setting_documented(self):
        """Test that each configurable setting appears in the template."""
        content = Path(".env.example").read_text()
        
        for name in Settings.model_fields:
            if name == "mac_bits":
                continue
            assert f"QKDSIM_{name.upper()}=" in content, name
    
    def test_template_matches_defaults(self, monkeypatch):
        """Test that loading the template reproduces the built-in defaults."""
        for name in Settings.model_fields:
            monkeypatch.delenv(f"QKDSIM_{name.upper()}", raising=False)
        
        from_template = Settings(_env_file=".env.example")
        
        assert from_template.model_dump() == Settings(_env_file=None).model_dump()
