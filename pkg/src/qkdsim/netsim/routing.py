"""Path finding over the trusted-repeater graph."""

from typing import List, Optional

import networkx as nx
import structlog

from ..errors import ConfigurationError, NoKeyError, NoPathError
from ..models import PathPolicy
from .graph import TrustedNetwork

logger = structlog.get_logger(__name__)


def find_path(network: TrustedNetwork, src: str, dst: str,
              policy: Optional[PathPolicy] = None) -> List[str]:
    """Minimum-hop path from ``src`` to ``dst``.

    Among minimum-hop paths the one with the largest bottleneck of free key
    wins; remaining ties go to the lexicographically smallest node sequence.
    Links whose guard is open are not used.

    Raises:
        ConfigurationError: src equals dst or an endpoint is unknown
        NoPathError: The endpoints are not connected
        NoKeyError: The chosen path cannot pay ``policy.required_bits`` on every link
    """
    if src == dst:
        raise ConfigurationError("src and dst must differ")
    for node in (src, dst):
        if node not in network.graph:
            raise ConfigurationError(f"unknown node {node!r}")
    policy = policy or PathPolicy()
    try:
        candidates = [list(p) for p in nx.all_shortest_paths(network.usable_graph(), src, dst)]
    except nx.NetworkXNoPath as e:
        raise NoPathError(f"no path from {src} to {dst}", details={"src": src, "dst": dst}) from e

    ranked = sorted(candidates, key=lambda p: (-network.bottleneck(p), p))
    path = ranked[0]
    bottleneck = network.bottleneck(path)
    if policy.required_bits is not None and bottleneck < policy.required_bits:
        raise NoKeyError(
            f"path {'-'.join(path)} can pay {bottleneck} bits, needs {policy.required_bits}",
            details={"path": path, "bottleneck": bottleneck, "needed": policy.required_bits},
        )
    logger.debug("path_found", src=src, dst=dst, path=path, bottleneck=bottleneck,
                 candidates=len(candidates))
    return path
