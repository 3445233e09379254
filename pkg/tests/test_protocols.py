"""Unit tests for the protocol drivers, sifting, statistics and key-rate bounds."""

import math

import numpy as np
import pytest

from src.qkdsim.errors import (
    BoundUnavailableError,
    ConfigurationError,
    DegenerateBoundError,
    EmptyTestSetError,
    MisalignedLogsError,
    MissingBoundsError,
    ProtocolMismatchError,
)
from src.qkdsim.models import (
    Basis,
    ChannelModel,
    DetectorModel,
    Outcome,
    Party,
    PhotonStatistics,
    Protocol,
    RateMode,
    SecurityParams,
    SessionConfig,
    SourceConfig,
)
from src.qkdsim.protocols.decoy import decoy_bound, decoy_intensities
from src.qkdsim.protocols.encoders import measured_state, sarg04_decode, sarg04_state
from src.qkdsim.protocols.rates import (
    estimate_rate,
    expected_stats,
    finite_size_penalty,
    key_rate,
    optimal_mu,
    sifting_factor,
    with_signal_mu,
)
from src.qkdsim.protocols.records import RawLog, SiftedKey
from src.qkdsim.protocols.session import run_quantum_phase
from src.qkdsim.protocols.sifting import announce, sift
from src.qkdsim.protocols.statistics import accumulate_stats


def _session(protocol, n_pulses=4000, seed=1, mu=0.5, single_photon=False):
    statistics = PhotonStatistics.SINGLE_PHOTON if single_photon else PhotonStatistics.POISSON
    return SessionConfig(protocol=protocol, n_pulses=n_pulses, seed=seed,
                         source=SourceConfig(mu_by_class={"signal": mu},
                                             photon_statistics=statistics))


class TestEncoders:
    """Test state tables and SARG04 decoding."""
    
    def test_measured_state(self):
        """Test the pole each outcome projects onto."""
        assert measured_state(Basis.X, Outcome.BIT0) == (1.0, 0.0, 0.0)
        assert measured_state(Basis.Y, Outcome.BIT1) == (0.0, -1.0, 0.0)
        assert measured_state(Basis.X, Outcome.NONE) is None
    
    def test_sarg04_decode_excludes_orthogonal_member(self):
        """Test that observing the state orthogonal to one member selects the other."""
        assert sarg04_state(0, 0) == (1.0, 0.0, 0.0)
        assert sarg04_decode(0, Basis.X, Outcome.BIT1) == 1
        assert sarg04_decode(0, Basis.Y, Outcome.BIT1) == 0
    
    def test_sarg04_inconclusive(self):
        """Test that a result compatible with both members is inconclusive."""
        assert sarg04_decode(0, Basis.X, Outcome.BIT0) is None
        assert sarg04_decode(0, None, Outcome.BIT0) is None
        assert sarg04_decode(0, Basis.X, Outcome.DOUBLE) is None


class TestRecords:
    """Test raw logs and sifted keys."""
    
    def test_raw_log_length_check(self):
        """Test that bits and class ids must align."""
        with pytest.raises(ConfigurationError):
            RawLog(protocol=Protocol.BB84, bits=[0, 1], class_ids=["signal"])
    
    def test_raw_log_windows_rejoin(self):
        """Test that windows of a log concatenate back to the log."""
        phases = np.array([0, 1, 1, 0, 1, 0, 0], dtype=np.uint8)
        log = RawLog(protocol=Protocol.DPS, bits=phases[:-1] ^ phases[1:],
                     class_ids=["signal"] * 6, phases=phases)
        
        joined = RawLog.concatenate([log.window(0, 2), log.window(2, 6)])
        assert joined.bits.tolist() == log.bits.tolist()
        assert joined.phases.tolist() == phases.tolist()
    
    def test_sifted_key_slots_increasing(self):
        """Test that sifted slots must be strictly increasing."""
        with pytest.raises(ConfigurationError):
            SiftedKey(bits=[0, 1], slots=[3, 3], owner=Party.ALICE)
        with pytest.raises(ConfigurationError):
            SiftedKey(bits=[0, 1], slots=[1], owner=Party.ALICE)
    
    def test_sifted_key_subset_and_zeroize(self):
        """Test subset selection and in-place zeroization."""
        key = SiftedKey(bits=[1, 0, 1, 1], slots=[2, 5, 7, 9], owner=Party.BOB)
        sub = key.subset(np.array([True, False, True, False]))
        
        assert sub.slots.tolist() == [2, 7]
        assert sub.bits.tolist() == [1, 1]
        key.zeroize()
        assert key.bits.sum() == 0


class TestQuantumPhase:
    """Test the quantum-phase drivers."""
    
    @pytest.mark.parametrize("protocol", [Protocol.BB84, Protocol.SARG04, Protocol.B92,
                                          Protocol.DPS])
    def test_ideal_link_gives_identical_keys(self, protocol, ideal_detector):
        """Test that a noiseless link sifts to identical non-empty keys."""
        cfg = _session(protocol, single_photon=protocol.is_qubit)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        key_a, key_b = sift(protocol, log, records)
        
        assert len(records) == cfg.n_pulses
        assert len(key_a) > 0
        assert key_a.bits.tolist() == key_b.bits.tolist()
        assert key_a.slots.tolist() == key_b.slots.tolist()
    
    def test_same_seed_same_session(self, bb84_session, ideal_detector):
        """Test that a session is a pure function of its seed."""
        channel = ChannelModel(loss_db=5.0)
        log1, rec1 = run_quantum_phase(bb84_session, channel, ideal_detector)
        log2, rec2 = run_quantum_phase(bb84_session, channel, ideal_detector)
        
        assert log1.bits.tolist() == log2.bits.tolist()
        assert [r.outcome for r in rec1] == [r.outcome for r in rec2]
    
    def test_bb84_sifting_fraction(self, ideal_detector):
        """Test that about half of the detections survive BB84 sifting."""
        cfg = _session(Protocol.BB84, n_pulses=10_000, single_photon=True)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        key_a, _ = sift(Protocol.BB84, log, records)
        
        assert len(key_a) / cfg.n_pulses == pytest.approx(0.5, abs=0.03)
    
    def test_sarg04_sifting_fraction(self, ideal_detector):
        """Test that a quarter of single-photon detections are conclusive in SARG04."""
        cfg = _session(Protocol.SARG04, n_pulses=10_000, single_photon=True)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        key_a, _ = sift(Protocol.SARG04, log, records)
        
        assert len(key_a) / cfg.n_pulses == pytest.approx(0.25, abs=0.03)
    
    def test_dps_bits_are_phase_differences(self, ideal_detector):
        """Test that DPS bits are XORs of neighbouring phases."""
        cfg = _session(Protocol.DPS, n_pulses=500)
        log, _ = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        
        assert len(log.phases) == 501
        assert log.bits.tolist() == (log.phases[:-1] ^ log.phases[1:]).tolist()
    
    def test_misalignment_produces_errors(self, ideal_detector):
        """Test that the sifted error rate tracks sin^2(theta/2)."""
        cfg = _session(Protocol.BB84, n_pulses=20_000, single_photon=True)
        theta = 2 * math.asin(math.sqrt(0.05))
        log, records = run_quantum_phase(cfg, ChannelModel(misalignment_angle=theta),
                                         ideal_detector)
        key_a, key_b = sift(Protocol.BB84, log, records)
        
        assert np.mean(key_a.bits != key_b.bits) == pytest.approx(0.05, abs=0.01)


class TestSifting:
    """Test sifting failure modes and announcements."""
    
    def test_misaligned_logs(self, ideal_detector):
        """Test that logs of different length are rejected."""
        cfg = _session(Protocol.BB84, n_pulses=100)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        
        with pytest.raises(MisalignedLogsError):
            sift(Protocol.BB84, log, records[:-1])
    
    def test_protocol_mismatch(self, ideal_detector):
        """Test that sifting with the wrong protocol is rejected."""
        cfg = _session(Protocol.BB84, n_pulses=100)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        
        with pytest.raises(ProtocolMismatchError):
            sift(Protocol.SARG04, log, records)
    
    def test_sarg04_announces_pairs_not_bases(self, ideal_detector):
        """Test that SARG04 announcements carry pairs and no Alice bases."""
        cfg = _session(Protocol.SARG04, n_pulses=200, single_photon=True)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        ann = announce(Protocol.SARG04, log, records)
        
        assert ann.alice_pairs is not None
        assert all(b is None for b in ann.alice_bases)
        assert ann.bob_conclusive.sum() == len(sift(Protocol.SARG04, log, records)[0])


class TestStatistics:
    """Test per-class aggregation."""
    
    def test_accumulate_stats(self, decoy_session, ideal_detector):
        """Test gains from clicks and error rates from disclosed bits."""
        cfg = decoy_session.model_copy(update={"n_pulses": 5000})
        log, records = run_quantum_phase(cfg, ChannelModel(loss_db=3.0), ideal_detector)
        sifted = sift(cfg.protocol, log, records)
        stats = accumulate_stats(log, records, sifted, sifted[0].slots[::10], cfg.source)
        
        assert stats.signal_class == "signal"
        assert stats.classes["vacuum"].gain == 0.0
        assert stats.classes["signal"].gain > stats.classes["decoy"].gain
        assert stats.classes["signal"].error_rate == 0.0
        assert sum(c.sent for c in stats.classes.values()) == cfg.n_pulses
    
    def test_empty_test_set(self, ideal_detector):
        """Test that nothing disclosed is an error."""
        cfg = _session(Protocol.BB84, n_pulses=100)
        log, records = run_quantum_phase(cfg, ChannelModel(), ideal_detector)
        sifted = sift(Protocol.BB84, log, records)
        
        with pytest.raises(EmptyTestSetError):
            accumulate_stats(log, records, sifted, [], cfg.source)


class TestDecoyBounds:
    """Test the vacuum + weak-decoy bounds."""
    
    def test_bounds_on_linear_channel(self, decoy_session):
        """Test that Y1 is bounded tightly from below and e1 from above."""
        theta = 2 * math.asin(math.sqrt(0.02))
        channel = ChannelModel(loss_db=20.0, misalignment_angle=theta)
        stats = expected_stats(decoy_session, channel, DetectorModel())
        bounds = decoy_bound(stats, 0.5, 0.1)
        
        assert 0.9 * channel.transmittance <= bounds.y1_lower <= channel.transmittance
        assert 0.02 <= bounds.e1_upper <= 0.03
        assert bounds.q1_lower == pytest.approx(bounds.y1_lower * 0.5 * math.exp(-0.5))
    
    def test_decoy_intensities(self, decoy_session):
        """Test selection of the signal and weakest decoy."""
        stats = expected_stats(decoy_session, ChannelModel(loss_db=10.0), DetectorModel())
        
        assert decoy_intensities(stats) == (0.5, 0.1)
    
    def test_identical_intensities_degenerate(self, decoy_session):
        """Test that equal intensities cannot bound anything."""
        stats = expected_stats(decoy_session, ChannelModel(loss_db=10.0), DetectorModel())
        
        with pytest.raises(DegenerateBoundError):
            decoy_bound(stats, 0.5, 0.5)
    
    def test_single_intensity_degenerate(self, bb84_session):
        """Test that one intensity gives no decoy pair."""
        stats = expected_stats(bb84_session, ChannelModel(), DetectorModel())
        
        with pytest.raises(DegenerateBoundError):
            decoy_intensities(stats)
    
    def test_missing_vacuum(self):
        """Test that a missing vacuum class leaves the bound unavailable."""
        cfg = SessionConfig(source=SourceConfig(mu_by_class={"signal": 0.5, "decoy": 0.1}),
                            class_probabilities={"signal": 0.9, "decoy": 0.1})
        stats = expected_stats(cfg, ChannelModel(loss_db=10.0), DetectorModel())
        
        with pytest.raises(BoundUnavailableError):
            decoy_bound(stats, 0.5, 0.1)


class TestKeyRates:
    """Test key-rate formulas."""
    
    def test_sifting_factor(self):
        """Test sifting factors per protocol and bias."""
        assert sifting_factor(Protocol.BB84) == 0.5
        assert sifting_factor(Protocol.BB84, 0.9) == pytest.approx(0.82)
        assert sifting_factor(Protocol.SARG04, 0.9) == 0.25
        assert sifting_factor(Protocol.DPS) == 1.0
    
    def test_finite_size_penalty(self):
        """Test the (2l + s) / N margin."""
        assert finite_size_penalty(SecurityParams(), 10_000) == pytest.approx(0.003)
    
    def test_decoy_mode_needs_bounds(self, decoy_session):
        """Test that DECOY mode without bounds fails."""
        stats = expected_stats(decoy_session, ChannelModel(loss_db=10.0), DetectorModel())
        
        with pytest.raises(MissingBoundsError):
            key_rate(stats, None, RateMode.DECOY, 1.16, SecurityParams())
    
    def test_single_photon_rate(self):
        """Test the single-photon rate on an error-free link."""
        cfg = _session(Protocol.BB84, n_pulses=10_000, single_photon=True)
        stats = expected_stats(cfg, ChannelModel(loss_db=10.0), DetectorModel())
        estimate, bounds = estimate_rate(stats, RateMode.SINGLE_PHOTON, SecurityParams(),
                                         finite_size=False)
        
        assert bounds is None
        assert estimate.rate == pytest.approx(0.5 * 0.1)
    
    def test_decoy_beats_worst_case_on_lossy_link(self, decoy_session):
        """Test that the decoy bound outperforms the worst-case bound at 20 dB."""
        channel = ChannelModel(loss_db=20.0, misalignment_angle=0.2)
        stats = expected_stats(decoy_session, channel, DetectorModel(dark=1e-6))
        params = SecurityParams()
        decoy, bounds = estimate_rate(stats, RateMode.DECOY, params, finite_size=False)
        wcp, _ = estimate_rate(stats, RateMode.WCP_WORSTCASE, params, finite_size=False)
        
        assert bounds is not None
        assert decoy.rate > wcp.rate
    
    @pytest.mark.parametrize("loss_db", [3.0, 10.0])
    def test_sarg04_rate_below_bb84(self, loss_db):
        """Test that SARG04 never beats BB84 on the same single-photon link."""
        channel = ChannelModel(loss_db=loss_db, misalignment_angle=0.1)
        rates = {}
        for protocol in (Protocol.BB84, Protocol.SARG04):
            cfg = _session(protocol, n_pulses=20_000, seed=7, single_photon=True)
            log, records = run_quantum_phase(cfg, channel, DetectorModel())
            sifted = sift(protocol, log, records)
            stats = accumulate_stats(log, records, sifted, sifted[0].slots[::4], cfg.source)
            estimate, _ = estimate_rate(stats, RateMode.SINGLE_PHOTON, SecurityParams(),
                                        finite_size=False)
            rates[protocol] = estimate.rate
        
        assert rates[Protocol.BB84] > 0
        assert rates[Protocol.SARG04] <= rates[Protocol.BB84]
    
    def test_expected_stats_rejects_other_protocols(self):
        """Test that the closed-form model covers BB84 only."""
        with pytest.raises(ConfigurationError):
            expected_stats(_session(Protocol.SARG04), ChannelModel(), DetectorModel())
    
    def test_with_signal_mu(self, decoy_session):
        """Test that only the signal intensity changes."""
        cfg = with_signal_mu(decoy_session, 0.3)
        
        assert cfg.source.mu_by_class == {"signal": 0.3, "decoy": 0.1, "vacuum": 0.0}
    
    def test_optimal_mu_worst_case(self):
        """Test that the worst-case optimum scales down with the transmittance."""
        cfg = _session(Protocol.BB84)
        detector = DetectorModel(dark=1e-6)
        mu, estimate = optimal_mu(cfg, ChannelModel(loss_db=20.0, misalignment_angle=0.2),
                                  detector, SecurityParams())
        
        assert estimate.rate > 0.0
        assert mu < 0.1
