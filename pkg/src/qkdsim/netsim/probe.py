"""What a compromised trusted node learns."""

from typing import Dict

from .graph import TrustedNetwork


def compromise_probe(network: TrustedNetwork, node: str) -> Dict[str, bytes]:
    """Every payload that passed through ``node`` in plaintext, by request id.

    Relays decrypt before re-encrypting, so a node on a path holds the full
    secret; a node on no path yields nothing.
    """
    return {obs.request_id: obs.payload for obs in network.transcript if obs.node == node}
