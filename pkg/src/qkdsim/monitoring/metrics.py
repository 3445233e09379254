"""Per-run simulation metrics."""

from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest
from prometheus_client import disable_created_metrics

disable_created_metrics()

QBER_BUCKETS = (0.005, 0.01, 0.02, 0.03, 0.05, 0.08, 0.11, 0.15, 0.25, 0.5, 1.0)


class SimulationMetrics:
    """Collect session, distillation and transport metrics of one run.

    Each instance owns its registry so runs never share counters.
    """

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()
        self.sessions = Counter(
            "qkdsim_sessions", "QKD sessions by protocol and outcome",
            ["protocol", "outcome"], registry=self.registry,
        )
        self.secret_bits = Counter(
            "qkdsim_secret_bits", "Distilled secret key bits", ["protocol"],
            registry=self.registry,
        )
        self.transports = Counter(
            "qkdsim_transport_requests", "Key-transport requests by outcome", ["outcome"],
            registry=self.registry,
        )
        self.sync_transitions = Counter(
            "qkdsim_sync_transitions", "Frame-synchronization transitions", ["to"],
            registry=self.registry,
        )
        self.qber = Histogram(
            "qkdsim_qber", "Estimated QBER of completed test samples", buckets=QBER_BUCKETS,
            registry=self.registry,
        )

    def record_session(self, protocol: str, outcome: str, secret_bits: int = 0,
                       qber: Optional[float] = None) -> None:
        self.sessions.labels(protocol=protocol, outcome=outcome).inc()
        if secret_bits:
            self.secret_bits.labels(protocol=protocol).inc(secret_bits)
        if qber is not None:
            self.qber.observe(qber)

    def record_transport(self, outcome: str) -> None:
        self.transports.labels(outcome=outcome).inc()

    def record_transition(self, to: str) -> None:
        self.sync_transitions.labels(to=to).inc()

    def render(self) -> str:
        """Prometheus text exposition of this run's registry."""
        return generate_latest(self.registry).decode("utf-8")
