"""Run metrics."""

from .metrics import SimulationMetrics

__all__ = ["SimulationMetrics"]
