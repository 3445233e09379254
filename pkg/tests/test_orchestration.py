"""Tests for complete point-to-point sessions, with and without frame supervision."""

import numpy as np
import pytest

from src.qkdsim.models import (
    AttackConfig,
    AttackKind,
    ChannelModel,
    DetectorModel,
    DriftModel,
    FaultConfig,
    FaultKind,
    PhotonStatistics,
    Protocol,
    RateMode,
    SessionConfig,
    SourceConfig,
    SyncConfig,
    SyncStatus,
)
from src.qkdsim.monitoring.metrics import SimulationMetrics
from src.qkdsim.orchestration.orchestrator import SessionOrchestrator, default_rate_mode
from src.qkdsim.orchestration.synchronized import run_synchronized_session
from src.qkdsim.photonics.channel import misalignment_for_qber


BASELINE = 0.02


def _single_photon(n_pulses=10_000, seed=3):
    return SessionConfig(protocol=Protocol.BB84, n_pulses=n_pulses, seed=seed,
                         source=SourceConfig(photon_statistics=PhotonStatistics.SINGLE_PHOTON))


def _noisy_channel(**kwargs):
    return ChannelModel(misalignment_angle=misalignment_for_qber(BASELINE), **kwargs)


class TestSessionOrchestrator:
    """Test sessions run end to end."""
    
    def test_ideal_link(self):
        """Test that an ideal link distills identical secret keys."""
        result = SessionOrchestrator().run(_single_photon(), ChannelModel(), DetectorModel())
        
        assert result.outcome == "OK"
        assert not result.aborted
        assert result.secret_length > 0
        assert np.array_equal(result.key_a.bits, result.key_b.bits)
        assert result.report.keys_match
        assert result.rate.mode is RateMode.SINGLE_PHOTON
        assert result.sifted_qber == 0.0
    
    def test_deterministic(self):
        """Test that a session is a pure function of its seed."""
        cfg = _single_photon(seed=17)
        first = SessionOrchestrator().run(cfg, _noisy_channel(), DetectorModel())
        second = SessionOrchestrator().run(cfg, _noisy_channel(), DetectorModel())
        
        assert first.flat_record() == second.flat_record()
        assert np.array_equal(first.key_a.bits, second.key_a.bits)
    
    def test_default_rate_mode(self, bb84_session, decoy_session):
        """Test that the rate bound follows the source."""
        assert default_rate_mode(_single_photon()) is RateMode.SINGLE_PHOTON
        assert default_rate_mode(decoy_session) is RateMode.DECOY
        assert default_rate_mode(bb84_session) is RateMode.WCP_WORSTCASE
    
    def test_intercept_resend_aborts(self):
        """Test that full intercept-resend trips the QBER abort."""
        result = SessionOrchestrator().run(_single_photon(), ChannelModel(), DetectorModel(),
                                           attack_cfg=AttackConfig(kind=AttackKind.INTERCEPT_RESEND))
        
        assert result.outcome == "ABORT"
        assert result.key_a is None and result.key_b is None
        assert result.secret_length == 0
        assert result.sifted_qber == pytest.approx(0.25, abs=0.03)
        assert result.attack is not None
        assert result.eve_accuracy is not None
        assert result.flat_record()["outcome"] == "ABORT"
    
    def test_tampered_classical_channel(self):
        """Test that an altered sifting message fails authentication."""
        def tamper(message):
            if message.phase != "sifting":
                return message.payload
            return message.payload[:-1] + bytes([message.payload[-1] ^ 0x01])
        
        result = SessionOrchestrator().run(_single_photon(), ChannelModel(), DetectorModel(),
                                           tamper=tamper)
        
        assert result.outcome == "AUTH_FAIL"
        assert result.key_a is None
    
    def test_pool_exhausted(self):
        """Test that an undersized authentication secret aborts before disclosure."""
        result = SessionOrchestrator(auth_bits=256).run(_single_photon(), ChannelModel(),
                                                        DetectorModel())
        
        assert result.outcome == "POOL_EXHAUSTED"
        assert result.stats is None
    
    def test_refill(self):
        """Test that fresh key tops up the authentication pools."""
        result = SessionOrchestrator(refill_bits=512).run(_single_photon(), ChannelModel(),
                                                          DetectorModel())
        
        assert result.report.refilled_bits == 512
        assert result.key_a.auth_refill == 512
    
    def test_metrics(self):
        """Test that outcomes are counted."""
        metrics = SimulationMetrics()
        SessionOrchestrator(metrics=metrics).run(_single_photon(), ChannelModel(), DetectorModel())
        text = metrics.render()
        
        assert 'protocol="BB84"' in text
        assert 'outcome="OK"' in text
        assert "qkdsim_secret_bits_total" in text
    
    def test_decoy_mode_without_decoys(self):
        """Test that a DECOY bound on a single-intensity session is reported, not raised."""
        result = SessionOrchestrator(rate_mode=RateMode.DECOY).run(
            _single_photon(), ChannelModel(), DetectorModel())
        
        assert result.outcome == "DEGENERATE_BOUND"
        assert result.key_a is None
    
    def test_decoy_session(self, decoy_session):
        """Test that a decoy session carries its bounds."""
        cfg = decoy_session.model_copy(update={"n_pulses": 20_000})
        
        result = SessionOrchestrator().run(cfg, ChannelModel(loss_db=5.0), DetectorModel())
        
        assert result.outcome == "OK"
        assert result.rate.mode is RateMode.DECOY
        assert result.bounds is not None
        assert "y1_lower" in result.flat_record()
    
    def test_frame_offset_recovered(self):
        """Test that a session with an injected frame offset realigns and completes."""
        result = SessionOrchestrator().run(
            _single_photon(n_pulses=20_000), _noisy_channel(), DetectorModel(),
            sync=SyncConfig(window=1000, baseline_qber=BASELINE),
            fault=FaultConfig(kind=FaultKind.FRAME_OFFSET, onset=5_000, offset=7),
        )
        
        assert result.outcome == "OK"
        assert result.sync.state.offset == 7
        assert result.flat_record()["sync_offset"] == 7
        assert result.flat_record()["sync_status"] == "ALIGNED"
    
    def test_randomized_stream_fatal(self):
        """Test that an unrecoverable stream aborts with no key."""
        result = SessionOrchestrator().run(
            _single_photon(n_pulses=10_000), _noisy_channel(), DetectorModel(),
            sync=SyncConfig(window=1000, baseline_qber=BASELINE),
            fault=FaultConfig(kind=FaultKind.RANDOMIZE, onset=5_000),
        )
        
        assert result.outcome == "FATAL"
        assert result.key_a is None
        assert result.sync.fatal


class TestSynchronizedSession:
    """Test window-by-window supervision."""
    
    def test_clean_link_stays_aligned(self):
        """Test that a fault-free link never leaves ALIGNED."""
        result = run_synchronized_session(_single_photon(n_pulses=10_000), _noisy_channel(),
                                          DetectorModel(),
                                          SyncConfig(window=1000, baseline_qber=BASELINE))
        
        assert result.state.status is SyncStatus.ALIGNED
        assert result.state.offset == 0
        assert len(result.qber_series) == 10
        assert result.recalibrations == 0
        key_a, key_b = result.keys
        assert len(key_a) == len(key_b) > 0
        assert np.all(np.diff(key_a.slots) > 0)
    
    def test_frame_offset_recovery(self):
        """Test recovery to within 1.5x baseline QBER after a frame offset."""
        result = run_synchronized_session(
            _single_photon(n_pulses=20_000), _noisy_channel(), DetectorModel(),
            SyncConfig(window=1000, baseline_qber=BASELINE),
            FaultConfig(kind=FaultKind.FRAME_OFFSET, onset=5_000, offset=7),
        )
        
        assert result.state.status is SyncStatus.ALIGNED
        assert result.state.offset == 7
        assert result.loss_qber and result.loss_qber[0] >= 0.45
        assert np.mean(result.recovery_qber) <= 1.5 * BASELINE
        assert SyncStatus.FRAME_LOST in {t.after for t in result.transitions}
    
    def test_randomized_stream(self):
        """Test that a random stream goes FATAL and zeroizes everything."""
        result = run_synchronized_session(
            _single_photon(n_pulses=10_000), _noisy_channel(), DetectorModel(),
            SyncConfig(window=1000, baseline_qber=BASELINE),
            FaultConfig(kind=FaultKind.RANDOMIZE, onset=5_000),
        )
        
        assert result.fatal
        assert result.keys is None
        assert result.transitions[-1].after is SyncStatus.FATAL
    
    def test_slow_drift_recalibrates(self):
        """Test that a drifting alignment is recalibrated without losing the frame."""
        channel = ChannelModel(drift=DriftModel(phase_drift_rate=0.05))
        
        result = run_synchronized_session(_single_photon(n_pulses=30_000), channel,
                                          DetectorModel(),
                                          SyncConfig(window=1000, baseline_qber=BASELINE))
        
        assert result.recalibrations >= 1
        assert not result.fatal
        assert result.state.status is SyncStatus.ALIGNED
        assert SyncStatus.BIT_DRIFT in {t.after for t in result.transitions}
