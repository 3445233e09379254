"""Scenario files: JSON documents validated into one model per run kind."""

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import Field, TypeAdapter, ValidationError, field_validator

from ..config import get_settings
from ..errors import ConfigurationError
from ..models import (
    AttackConfig,
    ChannelModel,
    DetectorModel,
    FaultConfig,
    NetworkConfig,
    ProvisioningMode,
    RateMode,
    SecurityParams,
    SessionConfig,
    StrictModel,
    SyncConfig,
    TransportRequest,
    Y00Config,
)


def _default_security() -> SecurityParams:
    return get_settings().get_security_params()


class ScenarioBase(StrictModel):
    """Fields every scenario carries."""
    seed: int = Field(default=0, ge=0)
    out: Optional[str] = None


class SessionScenario(ScenarioBase):
    """One or more point-to-point sessions."""
    kind: Literal["SESSION"]
    session: SessionConfig = Field(default_factory=SessionConfig)
    channel: ChannelModel = Field(default_factory=ChannelModel)
    detector: DetectorModel = Field(default_factory=DetectorModel)
    attack: Optional[AttackConfig] = None
    sync: Optional[SyncConfig] = None
    fault: Optional[FaultConfig] = None
    security: SecurityParams = Field(default_factory=_default_security)
    rate_mode: Optional[RateMode] = None
    trials: int = Field(default=1, ge=1)
    auth_bits: int = Field(default=4096, ge=0)
    write_keys: bool = False


class SweepScenario(ScenarioBase):
    """Rate against link loss for several rate bounds."""
    kind: Literal["SWEEP"]
    session: SessionConfig = Field(default_factory=SessionConfig)
    detector: DetectorModel = Field(default_factory=DetectorModel)
    misalignment_angle: float = Field(default=0.0, ge=0.0)
    losses_db: List[float] = Field(min_length=3)
    modes: List[RateMode] = Field(default_factory=lambda: [RateMode.DECOY])
    optimize_mu: bool = True
    simulate: bool = False
    security: SecurityParams = Field(default_factory=_default_security)

    @field_validator("losses_db")
    @classmethod
    def losses_non_negative(cls, v: List[float]) -> List[float]:
        """Validate that every loss point is a non-negative dB value."""
        if any(x < 0 for x in v):
            raise ValueError("loss points must be >= 0 dB")
        return v


class NetworkScenario(ScenarioBase):
    """Provision a trusted-repeater network and serve transport requests."""
    kind: Literal["NETWORK"]
    network: NetworkConfig
    provisioning: ProvisioningMode = ProvisioningMode.RATE_MODEL
    duration: int = Field(default=100_000, ge=1)
    requests: List[TransportRequest] = Field(default_factory=list)
    security: SecurityParams = Field(default_factory=_default_security)


class QnrcScenario(ScenarioBase):
    """Y00 round trip and keyless-adversary statistics."""
    kind: Literal["QNRC"]
    y00: Y00Config = Field(default_factory=Y00Config)
    n_symbols: int = Field(default=100_000, ge=1)
    seed_key: Optional[int] = Field(default=None, ge=1)


class VerifyScenario(ScenarioBase):
    """Desk-scale acceptance suite."""
    kind: Literal["VERIFY"]
    criteria: Optional[List[Annotated[int, Field(ge=1, le=10)]]] = None


Scenario = Annotated[
    Union[SessionScenario, SweepScenario, NetworkScenario, QnrcScenario, VerifyScenario],
    Field(discriminator="kind"),
]

_adapter: TypeAdapter = TypeAdapter(Scenario)


def format_validation_error(error: ValidationError) -> str:
    """One ``dotted.path: message`` line per validation problem."""
    lines = []
    for problem in error.errors():
        path = ".".join(str(part) for part in problem["loc"]) or "<root>"
        lines.append(f"{path}: {problem['msg']}")
    return "\n".join(lines)


def parse_scenario(text: str) -> Union[SessionScenario, SweepScenario, NetworkScenario,
                                       QnrcScenario, VerifyScenario]:
    """Validate a JSON scenario document.

    Raises:
        ConfigurationError: Invalid JSON or schema violation; the message
            lists the offending field paths
    """
    try:
        return _adapter.validate_json(text)
    except ValidationError as e:
        raise ConfigurationError(format_validation_error(e),
                                 details={"fields": [".".join(map(str, p["loc"]))
                                                     for p in e.errors()]}) from e


def load_scenario(path: Union[str, Path]) -> Union[SessionScenario, SweepScenario,
                                                   NetworkScenario, QnrcScenario,
                                                   VerifyScenario]:
    """Read and validate a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read scenario {path}: {e}") from e
    return parse_scenario(text)
