"""Core data models for the QKD link simulator.

Configuration types are pydantic models that reject unknown fields; the
high-volume per-slot records live next to the code that produces them as
slotted dataclasses.
"""

import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigurationError


class StrictModel(BaseModel):
    """Base for scenario-facing configuration: unknown fields are errors."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class Protocol(str, Enum):
    """Supported QKD protocols."""
    BB84 = "BB84"
    BB84_DECOY = "BB84_DECOY"
    SARG04 = "SARG04"
    B92 = "B92"
    DPS = "DPS"

    @property
    def is_qubit(self) -> bool:
        """Protocols driven with the polarization-qubit signal model."""
        return self in (Protocol.BB84, Protocol.BB84_DECOY, Protocol.SARG04)


class Basis(str, Enum):
    """Measurement / preparation bases on the Bloch equator."""
    X = "X"
    Y = "Y"


class Outcome(str, Enum):
    """Per-slot detection outcome."""
    BIT0 = "BIT0"
    BIT1 = "BIT1"
    DOUBLE = "DOUBLE"
    NONE = "NONE"


class DoubleClickPolicy(str, Enum):
    """How a slot where both detectors fire is resolved."""
    RANDOM_BIT = "RANDOM_BIT"
    DISCARD = "DISCARD"


class PhotonStatistics(str, Enum):
    """Photon-number distribution of the source."""
    POISSON = "POISSON"
    SINGLE_PHOTON = "SINGLE_PHOTON"


class RateMode(str, Enum):
    """Key-rate bound used for the single-photon contribution."""
    SINGLE_PHOTON = "SINGLE_PHOTON"
    WCP_WORSTCASE = "WCP_WORSTCASE"
    DECOY = "DECOY"


class AttackKind(str, Enum):
    """Implemented channel-replacement attacks."""
    INTERCEPT_RESEND = "INTERCEPT_RESEND"
    PNS = "PNS"
    USD_SEQUENTIAL = "USD_SEQUENTIAL"


class EveBasisStrategy(str, Enum):
    """Basis choice of an intercept-resend adversary."""
    RANDOM = "RANDOM"
    MATCHING = "MATCHING"
    FIXED_X = "FIXED_X"
    FIXED_Y = "FIXED_Y"


class Party(str, Enum):
    """Owner of a key string."""
    ALICE = "ALICE"
    BOB = "BOB"


class ProvisioningMode(str, Enum):
    """How network link stores are filled."""
    FULL_SIM = "FULL_SIM"
    RATE_MODEL = "RATE_MODEL"


class SyncStatus(str, Enum):
    """Frame synchronization states."""
    ALIGNED = "ALIGNED"
    BIT_DRIFT = "BIT_DRIFT"
    FRAME_LOST = "FRAME_LOST"
    FATAL = "FATAL"


class QberClass(str, Enum):
    """Severity classification of a QBER window series."""
    OK = "OK"
    SLOW_DEGRADE = "SLOW_DEGRADE"
    RAPID_LOSS = "RAPID_LOSS"

    @property
    def severity(self) -> int:
        return {"OK": 0, "SLOW_DEGRADE": 1, "RAPID_LOSS": 2}[self.value]


class SourceConfig(StrictModel):
    """Weak-coherent (or ideal single-photon) source."""
    mu_by_class: Dict[str, float] = Field(default_factory=lambda: {"signal": 0.5})
    phase_randomized: bool = True
    photon_statistics: PhotonStatistics = PhotonStatistics.POISSON
    decoy_mode: bool = False

    @field_validator("mu_by_class")
    @classmethod
    def mu_values_valid(cls, v: Dict[str, float]) -> Dict[str, float]:
        """Validate that every class has a finite, non-negative mean photon number."""
        if not v:
            raise ValueError("at least one intensity class is required")
        for class_id, mu in v.items():
            if not math.isfinite(mu) or mu < 0:
                raise ValueError(f"mu for class {class_id!r} must be finite and >= 0")
        return v

    @model_validator(mode="after")
    def decoy_needs_vacuum(self) -> "SourceConfig":
        """Decoy mode requires a vacuum class."""
        if self.decoy_mode and not any(mu == 0.0 for mu in self.mu_by_class.values()):
            raise ValueError("decoy mode requires a vacuum class with mu = 0")
        return self

    def mu(self, class_id: str) -> float:
        """Mean photon number of a class."""
        if class_id not in self.mu_by_class:
            raise ConfigurationError(f"unknown intensity class {class_id!r}")
        return self.mu_by_class[class_id]

    @property
    def signal_class(self) -> str:
        """The class with the largest intensity (ties by name)."""
        return max(sorted(self.mu_by_class), key=lambda c: self.mu_by_class[c])


class DriftModel(StrictModel):
    """Slow drift of the optical alignment and of the channel transmittance."""
    phase_drift_rate: float = 0.0
    transmittance_drift: float = Field(default=1.0, ge=0.0, le=1.0)
    onset: int = Field(default=0, ge=0)

    @field_validator("phase_drift_rate")
    @classmethod
    def rate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("phase_drift_rate must be finite")
        return v


class ChannelModel(StrictModel):
    """Lossy, misaligned fiber or free-space channel."""
    loss_db: float = Field(default=0.0, ge=0.0)
    misalignment_angle: float = Field(default=0.0, ge=0.0, le=math.pi)
    drift: Optional[DriftModel] = None

    @property
    def transmittance(self) -> float:
        """eta = 10^(-loss_db/10)."""
        if math.isinf(self.loss_db):
            return 0.0
        return 10.0 ** (-self.loss_db / 10.0)

    @classmethod
    def from_transmittance(cls, eta: float, misalignment_angle: float = 0.0,
                           drift: Optional[DriftModel] = None) -> "ChannelModel":
        """Build a channel from a transmittance instead of a loss figure."""
        loss_db = math.inf if eta <= 0.0 else -10.0 * math.log10(min(eta, 1.0))
        return cls(loss_db=max(loss_db, 0.0), misalignment_angle=misalignment_angle, drift=drift)


class DetectorModel(StrictModel):
    """Pair of gated threshold detectors."""
    eff0: float = Field(default=1.0, ge=0.0, le=1.0)
    eff1: float = Field(default=1.0, ge=0.0, le=1.0)
    dark: float = Field(default=0.0, ge=0.0, lt=1.0)
    afterpulse_p0: float = Field(default=0.0, ge=0.0, le=1.0)
    afterpulse_tau: float = Field(default=1.0, gt=0.0)
    blanking_gates: int = Field(default=0, ge=0)
    double_click_policy: DoubleClickPolicy = DoubleClickPolicy.RANDOM_BIT

    @property
    def mean_efficiency(self) -> float:
        return 0.5 * (self.eff0 + self.eff1)


class B92Config(StrictModel):
    """Strong-reference B92 transmitter/receiver settings.

    The receiver taps ``alpha^2/beta^2`` of the reference for interference so
    that it balances the signal; the rest of the reference goes to the
    monitoring detector.
    """
    reference_mu: float = Field(default=1.0e4, gt=0.0)
    monitor_window: Optional[Tuple[int, int]] = None
    window_sigmas: float = Field(default=4.0, gt=0.0)

    @field_validator("monitor_window")
    @classmethod
    def window_ordered(cls, v: Optional[Tuple[int, int]]) -> Optional[Tuple[int, int]]:
        if v is not None and (v[0] < 0 or v[1] < v[0]):
            raise ValueError("monitor_window must satisfy 0 <= m_lo <= m_hi")
        return v


class SessionConfig(StrictModel):
    """One point-to-point QKD session."""
    protocol: Protocol = Protocol.BB84
    n_pulses: int = Field(default=10_000, ge=1)
    class_probabilities: Dict[str, float] = Field(default_factory=lambda: {"signal": 1.0})
    test_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    basis_bias: float = Field(default=0.5, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    source: SourceConfig = Field(default_factory=SourceConfig)
    b92: B92Config = Field(default_factory=B92Config)

    @model_validator(mode="after")
    def classes_consistent(self) -> "SessionConfig":
        """Class probabilities sum to one and name known source classes."""
        total = sum(self.class_probabilities.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"class probabilities must sum to 1 (got {total})")
        if any(p < 0 for p in self.class_probabilities.values()):
            raise ValueError("class probabilities must be non-negative")
        unknown = set(self.class_probabilities) - set(self.source.mu_by_class)
        if unknown:
            raise ValueError(f"class probabilities reference unknown classes {sorted(unknown)}")
        if self.protocol == Protocol.BB84_DECOY and not self.source.decoy_mode:
            raise ValueError("BB84_DECOY requires source.decoy_mode = true")
        return self


class AttackConfig(StrictModel):
    """Adversary settings."""
    kind: AttackKind
    fraction: float = Field(default=1.0, ge=0.0, le=1.0)
    strategy: EveBasisStrategy = EveBasisStrategy.RANDOM
    target_mu: Optional[float] = Field(default=None, ge=0.0)
    block_len: int = Field(default=1, ge=1)


class SecurityParams(StrictModel):
    """Security parameters: abort exponent s and leakage exponent l."""
    s: int = Field(default=10, ge=1)
    l: int = Field(default=10, ge=1)
    ec_efficiency: float = Field(default=1.16, ge=1.0)
    abort_qber: float = Field(default=0.11, gt=0.0, le=0.5)
    # None sizes the Cascade verification hash from s
    verify_hash_bits: Optional[int] = Field(default=None, ge=1, le=256)


class Y00Config(StrictModel):
    """Y00 phase-keyed quantum-noise randomized cipher."""
    M: int = Field(default=64, ge=2)
    alpha: float = Field(default=5.0, gt=0.0)
    channel_eta: float = Field(default=1.0, gt=0.0, le=1.0)
    excess_noise: float = Field(default=0.0, ge=0.0)
    tap_exponents: List[int] = Field(default_factory=lambda: [31, 3, 0])

    @field_validator("M")
    @classmethod
    def m_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("M must be even")
        return v

    @field_validator("alpha")
    @classmethod
    def alpha_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("alpha must be finite")
        return v

    @field_validator("tap_exponents")
    @classmethod
    def taps_valid(cls, v: List[int]) -> List[int]:
        if len(v) < 2 or 0 not in v or max(v) < 2 or min(v) < 0:
            raise ValueError("tap polynomial needs a leading term of degree >= 2 and a constant term")
        return sorted(set(v), reverse=True)

    @property
    def received_amplitude(self) -> float:
        """|A| = alpha * sqrt(eta)."""
        return self.alpha * math.sqrt(self.channel_eta)

    @property
    def lfsr_degree(self) -> int:
        return self.tap_exponents[0]


class SyncConfig(StrictModel):
    """Frame-synchronization monitor settings."""
    window: int = Field(default=1000, ge=100)
    rapid_threshold: float = Field(default=0.45, gt=0.0, le=1.0)
    trend_windows: int = Field(default=10, ge=2)
    trend_threshold: float = Field(default=0.02, gt=0.0)
    baseline_qber: float = Field(default=0.02, ge=0.0, lt=0.5)
    recover_factor: float = Field(default=2.0, ge=1.0)
    search_range: int = Field(default=16, ge=0)


class FaultKind(str, Enum):
    """Injected synchronization faults."""
    FRAME_OFFSET = "FRAME_OFFSET"
    RANDOMIZE = "RANDOMIZE"


class FaultConfig(StrictModel):
    """A fault applied to Bob's record stream from slot ``onset`` on."""
    kind: FaultKind
    onset: int = Field(default=0, ge=0)
    offset: int = 0


class LinkConfig(StrictModel):
    """One QKD link of a trusted-repeater network."""
    a: str
    b: str
    loss_db: float = Field(default=0.0, ge=0.0)
    misalignment_angle: float = Field(default=0.0, ge=0.0, le=math.pi)
    rate_mode: RateMode = RateMode.DECOY
    session: SessionConfig = Field(default_factory=SessionConfig)
    detector: DetectorModel = Field(default_factory=DetectorModel)
    bootstrap_bits: int = Field(default=4096, ge=0)

    @model_validator(mode="after")
    def endpoints_distinct(self) -> "LinkConfig":
        if self.a == self.b:
            raise ValueError("link endpoints must be distinct")
        return self

    @property
    def link_id(self) -> str:
        """Canonical undirected link id."""
        return "-".join(sorted((self.a, self.b)))

    @property
    def channel(self) -> ChannelModel:
        return ChannelModel(loss_db=self.loss_db, misalignment_angle=self.misalignment_angle)


class NetworkConfig(StrictModel):
    """Nodes and links of a trusted-repeater network."""
    nodes: List[str] = Field(min_length=1)
    links: List[LinkConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def simple_graph(self) -> "NetworkConfig":
        """Undirected simple graph over the declared nodes."""
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("node ids must be unique")
        seen = set()
        for link in self.links:
            for end in (link.a, link.b):
                if end not in self.nodes:
                    raise ValueError(f"link endpoint {end!r} is not a declared node")
            if link.link_id in seen:
                raise ValueError(f"duplicate link {link.link_id}")
            seen.add(link.link_id)
        return self


class TransportRequest(StrictModel):
    """A secret payload to move between two nodes."""
    src: str
    dst: str
    n_bytes: int = Field(ge=1)

    @model_validator(mode="after")
    def endpoints_distinct(self) -> "TransportRequest":
        if self.src == self.dst:
            raise ValueError("src and dst must differ")
        return self


class PathPolicy(StrictModel):
    """Path selection policy: min-hop, ties by bottleneck key."""
    required_bits: Optional[int] = Field(default=None, ge=0)


class ClassStats(BaseModel):
    """Gain and error aggregates of one intensity class."""
    class_id: str
    mu: float
    sent: int = Field(ge=0)
    clicks: int = Field(ge=0)
    gain: float = Field(ge=0.0, le=1.0)
    sifted: int = Field(default=0, ge=0)
    tested: int = Field(default=0, ge=0)
    errors: int = Field(default=0, ge=0)
    error_rate: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class BasisStats(BaseModel):
    """Per-basis sifted/test breakdown."""
    sifted: int = Field(default=0, ge=0)
    tested: int = Field(default=0, ge=0)
    errors: int = Field(default=0, ge=0)

    @property
    def error_rate(self) -> Optional[float]:
        return self.errors / self.tested if self.tested else None


class SessionStats(BaseModel):
    """Per-class gains and error rates of one session."""
    protocol: Protocol
    n_pulses: int = Field(ge=1)
    basis_bias: float = 0.5
    classes: Dict[str, ClassStats]
    sifted_length: int = Field(default=0, ge=0)
    by_basis: Dict[str, BasisStats] = Field(default_factory=dict)
    signal_class: str

    @model_validator(mode="after")
    def counts_consistent(self) -> "SessionStats":
        if sum(c.sent for c in self.classes.values()) > self.n_pulses:
            raise ValueError("class sent counts exceed n_pulses")
        return self

    def gain(self, class_id: Optional[str] = None) -> float:
        return self.classes[class_id or self.signal_class].gain

    def error_rate(self, class_id: Optional[str] = None) -> float:
        """Error rate of a class; 0 when nothing was tested."""
        rate = self.classes[class_id or self.signal_class].error_rate
        return 0.0 if rate is None else rate

    def class_for_mu(self, mu: float, tol: float = 1e-12) -> Optional[str]:
        for class_id, cs in sorted(self.classes.items()):
            if abs(cs.mu - mu) <= tol:
                return class_id
        return None

    def flat_record(self) -> Dict[str, object]:
        """Flat column/value mapping for CSV emission."""
        record: Dict[str, object] = {
            "protocol": self.protocol.value,
            "n_pulses": self.n_pulses,
            "sifted_length": self.sifted_length,
        }
        for class_id in sorted(self.classes):
            cs = self.classes[class_id]
            record[f"{class_id}_mu"] = cs.mu
            record[f"{class_id}_sent"] = cs.sent
            record[f"{class_id}_gain"] = cs.gain
            record[f"{class_id}_error_rate"] = "" if cs.error_rate is None else cs.error_rate
        for basis in sorted(self.by_basis):
            bs = self.by_basis[basis]
            record[f"basis_{basis}_sifted"] = bs.sifted
            record[f"basis_{basis}_error_rate"] = "" if bs.error_rate is None else bs.error_rate
        return record


class DecoyBounds(BaseModel):
    """Vacuum + weak-decoy bounds on the single-photon contribution."""
    y1_lower: float = Field(ge=0.0, le=1.0)
    e1_upper: float = Field(ge=0.0, le=0.5)
    mu_signal: float
    mu_decoy: float

    @property
    def q1_lower(self) -> float:
        """Single-photon gain lower bound for the signal intensity."""
        return self.y1_lower * self.mu_signal * math.exp(-self.mu_signal)


class KeyRateEstimate(BaseModel):
    """Secure key rate per emitted pulse and the inputs it was built from."""
    rate: float = Field(ge=0.0)
    mode: RateMode
    composable: bool = True
    sifting_factor: float
    q1: float
    e1: float
    finite_size_penalty: float = 0.0


class QberEstimate(BaseModel):
    """QBER point estimate with a one-sided Clopper-Pearson upper bound."""
    point: float = Field(ge=0.0, le=1.0)
    ci_upper: float = Field(ge=0.0, le=1.0)
    n_test: int = Field(ge=1)
    errors: int = Field(ge=0)
    abort: bool = False

    @model_validator(mode="after")
    def bounded_or_abort(self) -> "QberEstimate":
        if not self.abort and not (self.point <= self.ci_upper <= 0.5):
            raise ValueError("point <= ci_upper <= 0.5 must hold unless aborting")
        return self
