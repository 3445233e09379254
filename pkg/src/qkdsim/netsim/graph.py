"""Trusted-repeater network: topology, per-link key stores and node observations."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from ..errors import ConfigurationError
from ..models import LinkConfig, NetworkConfig
from ..randomness import derive_seed, random_bits
from .guard import LinkGuard
from .keystore import KeyStore


@dataclass
class NodeObservation:
    """Plaintext a node held while relaying a payload."""

    node: str
    request_id: str
    payload: bytes


@dataclass
class WireRecord:
    """Ciphertext seen on a link by a passive wiretapper."""

    link_id: str
    request_id: str
    ciphertext: bytes


class TrustedNetwork:
    """Graph of nodes joined by QKD links, each link holding a key store per end.

    Quantum-plane code only ever hands distilled bits to :meth:`deposit`;
    transport reads stores through reservations.
    """

    def __init__(self, config: NetworkConfig, guard: Optional[LinkGuard] = None,
                 seed: int = 0):
        """Initialize the network.

        Args:
            config: Validated node and link list
            guard: Circuit breaker shared by all links
            seed: Master seed for bootstrap secrets
        """
        self.config = config
        self.guard = guard or LinkGuard()
        self.graph = nx.Graph()
        self.graph.add_nodes_from(config.nodes)
        self.links: Dict[str, LinkConfig] = {}
        self.stores: Dict[str, Dict[str, KeyStore]] = {}
        self.bootstrap: Dict[str, np.ndarray] = {}
        self.flagged: Dict[str, str] = {}
        self.transcript: List[NodeObservation] = []
        self.wire: List[WireRecord] = []
        for index, link in enumerate(config.links):
            self.graph.add_edge(link.a, link.b, link_id=link.link_id)
            self.links[link.link_id] = link
            self.stores[link.link_id] = {
                link.a: KeyStore(link.link_id, link.a),
                link.b: KeyStore(link.link_id, link.b),
            }
            rng = np.random.default_rng(derive_seed(derive_seed(seed, index), 0))
            self.bootstrap[link.link_id] = random_bits(rng, link.bootstrap_bits)

    @property
    def nodes(self) -> List[str]:
        return list(self.config.nodes)

    def link_between(self, u: str, v: str) -> LinkConfig:
        """Link joining two adjacent nodes.

        Raises:
            ConfigurationError: Nodes are not adjacent
        """
        if not self.graph.has_edge(u, v):
            raise ConfigurationError(f"no link between {u!r} and {v!r}")
        return self.links[self.graph.edges[u, v]["link_id"]]

    def store(self, link_id: str, node: str) -> KeyStore:
        return self.stores[link_id][node]

    def deposit(self, link_id: str, bits_a: np.ndarray, bits_b: np.ndarray, ref: str = "") -> int:
        """Push a distilled key pair into both end stores of a link."""
        link = self.links[link_id]
        self.stores[link_id][link.a].deposit(bits_a, ref)
        return self.stores[link_id][link.b].deposit(bits_b, ref)

    def free_bits(self, link_id: str) -> int:
        """Bits both ends of a link can still reserve."""
        return min(s.free for s in self.stores[link_id].values())

    def bottleneck(self, path: List[str]) -> int:
        return min(self.free_bits(self.link_between(u, v).link_id) for u, v in zip(path, path[1:]))

    def usable_graph(self) -> nx.Graph:
        """View of the graph without links whose breaker is open."""
        return nx.subgraph_view(
            self.graph,
            filter_edge=lambda u, v: not self.guard.is_open(self.graph.edges[u, v]["link_id"]),
        )

    def observe(self, node: str, request_id: str, payload: bytes) -> None:
        self.transcript.append(NodeObservation(node, request_id, payload))

    def tap(self, link_id: str, request_id: str, ciphertext: bytes) -> None:
        self.wire.append(WireRecord(link_id, request_id, ciphertext))

    def ledger(self) -> Dict[str, Tuple[int, int, int, int]]:
        """(produced, consumed_otp, consumed_auth, available) per link and end."""
        return {
            f"{link_id}@{node}": (s.produced, s.consumed_otp, s.consumed_auth, s.available)
            for link_id, ends in sorted(self.stores.items())
            for node, s in sorted(ends.items())
        }
