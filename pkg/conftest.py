"""Shared pytest fixtures live in config.test_config."""

pytest_plugins = ["config.test_config"]
