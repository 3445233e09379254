"""Trusted-repeater networks: key stores, routing, hop-by-hop transport and switching."""

from .graph import NodeObservation, TrustedNetwork, WireRecord
from .guard import LinkGuard
from .keystore import AuditEntry, KeyStore, Reservation
from .orchestrator import TransportOrchestrator
from .probe import compromise_probe
from .provisioning import LinkProvision, RateCurve, expected_secret_bits, provision_links
from .routing import find_path
from .switching import passive_switch_session
from .transport import DeliveryReport, SecretPayload, TransportMessage, hop_transport

__all__ = [
    "AuditEntry",
    "DeliveryReport",
    "KeyStore",
    "LinkGuard",
    "LinkProvision",
    "NodeObservation",
    "RateCurve",
    "Reservation",
    "SecretPayload",
    "TransportMessage",
    "TransportOrchestrator",
    "TrustedNetwork",
    "WireRecord",
    "compromise_probe",
    "expected_secret_bits",
    "find_path",
    "hop_transport",
    "passive_switch_session",
    "provision_links",
]
