"""Transport request processing over a provisioned network."""

from typing import List, Optional, Sequence

import numpy as np
import structlog

from ..errors import NoKeyError, NoPathError
from ..models import PathPolicy, TransportRequest
from ..monitoring.metrics import SimulationMetrics
from ..postproc.authentication import TAG_COST_BITS
from ..randomness import derive_seed
from .graph import TrustedNetwork
from .routing import find_path
from .transport import DeliveryReport, SecretPayload, Tamper, hop_transport

logger = structlog.get_logger(__name__)


class TransportOrchestrator:
    """Run transport requests in order, one delivery report each."""

    def __init__(self, network: TrustedNetwork, seed: int = 0,
                 metrics: Optional[SimulationMetrics] = None):
        """Initialize the orchestrator.

        Args:
            network: Provisioned trusted network
            seed: Master seed; request i draws its payload from derive_seed(seed, i)
            metrics: Run metrics
        """
        self.network = network
        self.seed = seed
        self.metrics = metrics
        self.processed = 0

    def process_request(self, request: TransportRequest,
                        tamper: Optional[Tamper] = None) -> DeliveryReport:
        """Route and deliver one request; routing failures become reports."""
        index = self.processed
        self.processed += 1
        request_id = f"r{index}"
        rng = np.random.default_rng(derive_seed(self.seed, index))
        payload = SecretPayload.from_rng(rng, request.n_bytes)
        policy = PathPolicy(required_bits=payload.n_bits + TAG_COST_BITS)
        try:
            path = find_path(self.network, request.src, request.dst, policy)
            report = hop_transport(payload, path, self.network, request_id, tamper)
        except (NoPathError, NoKeyError) as e:
            report = DeliveryReport(request_id=request_id, src=request.src, dst=request.dst,
                                    outcome=e.code, n_bytes=request.n_bytes, error=e.to_dict())
            logger.warning("transport_refused", request=request_id, code=e.code, reason=e.message)
        if self.metrics is not None:
            self.metrics.record_transport(report.outcome)
        return report

    def process(self, requests: Sequence[TransportRequest]) -> List[DeliveryReport]:
        return [self.process_request(request) for request in requests]
