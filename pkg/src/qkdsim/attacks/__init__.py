"""Channel-replacement adversaries: intercept-resend, photon-number splitting and USD."""

from .analysis import eve_bit_accuracy
from .base import Attack, AttackRegistry, EveRecord, build_attack, registry
from .intercept_resend import InterceptResendAttack, intercept_resend
from .pns import PNSAttack, PNSPolicy, pns_transform
from .usd import (
    UsdSequentialAttack,
    kept_fraction,
    matched_resend_scale,
    usd_sequential,
    usd_success_probability,
)

__all__ = [
    "Attack",
    "AttackRegistry",
    "EveRecord",
    "InterceptResendAttack",
    "PNSAttack",
    "PNSPolicy",
    "UsdSequentialAttack",
    "build_attack",
    "eve_bit_accuracy",
    "intercept_resend",
    "kept_fraction",
    "matched_resend_scale",
    "pns_transform",
    "registry",
    "usd_sequential",
    "usd_success_probability",
]
