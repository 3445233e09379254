"""Test suite for AI Agent System."""
