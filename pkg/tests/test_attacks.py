"""Unit tests for the channel-replacement attacks."""

import math

import numpy as np
import pytest

from src.qkdsim.attacks.analysis import eve_bit_accuracy
from src.qkdsim.attacks.base import AttackRegistry, build_attack, registry
from src.qkdsim.attacks.intercept_resend import intercept_resend
from src.qkdsim.attacks.pns import PNSAttack, PNSPolicy, pns_transform
from src.qkdsim.attacks.usd import (
    UsdSequentialAttack,
    kept_fraction,
    matched_resend_scale,
    usd_sequential,
    usd_success_probability,
)
from src.qkdsim.bounds import multi_photon_probability
from src.qkdsim.errors import ConfigurationError, ProtocolMismatchError
from src.qkdsim.models import (
    AttackConfig,
    AttackKind,
    Basis,
    ChannelModel,
    DetectorModel,
    EveBasisStrategy,
    PhotonStatistics,
    Protocol,
    SessionConfig,
    SourceConfig,
)
from src.qkdsim.photonics.signals import CoherentTrain, QubitPulse, bb84_bloch
from src.qkdsim.photonics.sources import emit_phase_train, emit_two_mode
from src.qkdsim.protocols.session import run_quantum_phase
from src.qkdsim.protocols.sifting import sift


def _single_photon_bb84(n_pulses=20_000, seed=3):
    return SessionConfig(protocol=Protocol.BB84, n_pulses=n_pulses, seed=seed,
                         source=SourceConfig(photon_statistics=PhotonStatistics.SINGLE_PHOTON))


def _attacked_qber(cfg, attack_cfg, channel=None):
    channel = channel or ChannelModel()
    attack = build_attack(attack_cfg, cfg.source, channel)
    log, records = run_quantum_phase(cfg, channel, DetectorModel(), attack=attack)
    key_a, key_b = sift(cfg.protocol, log, records)
    return float(np.mean(key_a.bits != key_b.bits)), attack, log


class TestRegistry:
    """Test the attack registry."""
    
    def test_all_kinds_registered(self):
        """Test that every attack kind has an implementation."""
        assert registry.list_all() == sorted(AttackKind, key=lambda k: k.value)
    
    def test_unknown_kind(self):
        """Test that an empty registry rejects lookups."""
        with pytest.raises(ConfigurationError):
            AttackRegistry().get(AttackKind.PNS)
    
    def test_build_attack(self):
        """Test that build_attack instantiates the registered class."""
        attack = build_attack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL), SourceConfig(),
                              ChannelModel())
        
        assert isinstance(attack, UsdSequentialAttack)
        assert attack.mu == 0.5


class TestInterceptResend:
    """Test the intercept-resend attack."""
    
    def test_full_interception_qber(self):
        """Test that intercepting everything in random bases gives QBER 1/4."""
        qber, attack, _ = _attacked_qber(_single_photon_bb84(),
                                         AttackConfig(kind=AttackKind.INTERCEPT_RESEND))
        
        assert qber == pytest.approx(0.25, abs=0.015)
        assert attack.describe()["intercepted"] == 20_000
    
    def test_partial_interception_qber(self):
        """Test that QBER scales with the intercepted fraction."""
        qber, _, _ = _attacked_qber(_single_photon_bb84(),
                                    AttackConfig(kind=AttackKind.INTERCEPT_RESEND, fraction=0.5))
        
        assert qber == pytest.approx(0.125, abs=0.015)
    
    def test_matching_strategy_is_invisible(self):
        """Test that an oracle basis choice introduces no errors and learns every bit."""
        cfg = _single_photon_bb84(n_pulses=2000)
        qber, attack, log = _attacked_qber(
            cfg, AttackConfig(kind=AttackKind.INTERCEPT_RESEND, strategy=EveBasisStrategy.MATCHING))
        
        assert qber == 0.0
        assert eve_bit_accuracy(attack.records, log.bits, log.bases) == 1.0
    
    def test_vacuum_pulse(self):
        """Test that an empty pulse yields no bit for Eve."""
        pulse = QubitPulse(n=0, bloch=bb84_bloch(Basis.X, 0), class_id="vacuum")
        forwarded, record = intercept_resend(pulse, EveBasisStrategy.FIXED_X,
                                             np.random.default_rng(0))
        
        assert forwarded.n == 0
        assert record.bit is None
        assert record.basis is Basis.X
    
    def test_resends_single_photon(self):
        """Test that the resent pulse is one photon in the measured state."""
        pulse = QubitPulse(n=4, bloch=bb84_bloch(Basis.Y, 1), class_id="signal")
        forwarded, record = intercept_resend(pulse, EveBasisStrategy.FIXED_Y,
                                             np.random.default_rng(0))
        
        assert forwarded.n == 1
        assert record.bit == 1
        assert forwarded.bloch == bb84_bloch(Basis.Y, 1)
    
    def test_rejects_coherent_protocols(self):
        """Test that intercept-resend cannot attack DPS."""
        cfg = SessionConfig(protocol=Protocol.DPS, n_pulses=100)
        attack = build_attack(AttackConfig(kind=AttackKind.INTERCEPT_RESEND), cfg.source,
                              ChannelModel())
        
        with pytest.raises(ProtocolMismatchError):
            run_quantum_phase(cfg, ChannelModel(), DetectorModel(), attack=attack)


class TestPNS:
    """Test the photon-number-splitting attack."""
    
    def test_policy_unsaturated(self):
        """Test that blocking singles suffices at moderate loss."""
        policy = PNSPolicy.solve(0.5, 0.5)
        
        assert not policy.saturated
        assert policy.p_multi == 1.0
        assert 0.0 < policy.p_single < 1.0
        assert policy.forward_probability(0.5) == pytest.approx(1 - math.exp(-0.25))
    
    def test_policy_saturated(self):
        """Test that heavy loss forces multi-photon blocking as well."""
        policy = PNSPolicy.solve(0.5, 0.01)
        
        assert policy.saturated
        assert policy.p_single == 0.0
        assert policy.forward_probability(0.5) == pytest.approx(1 - math.exp(-0.005))
        assert policy.p_multi * multi_photon_probability(0.5) == pytest.approx(
            policy.target_arrival)
    
    def test_transform_splits_multi_photon_pulses(self):
        """Test that one photon goes on and the rest stay with the adversary."""
        policy = PNSPolicy(target_mu=0.5, target_arrival=0.2, p_single=0.0, p_multi=1.0,
                           saturated=False)
        rng = np.random.default_rng(1)
        state = bb84_bloch(Basis.Y, 1)
        
        multi, multi_record = pns_transform(QubitPulse(n=3, bloch=state, class_id="signal",
                                                       slot=7), policy, rng)
        single, single_record = pns_transform(QubitPulse(n=1, bloch=state, class_id="signal"),
                                              policy, rng)
        vacuum, vacuum_record = pns_transform(QubitPulse(n=0, bloch=state, class_id="vacuum"),
                                              policy, rng)
        
        assert (multi.n, multi.bloch, multi.slot) == (1, state, 7)
        assert (multi_record.stored_photons, multi_record.stored_bloch) == (2, state)
        assert single.n == 0 and single_record.stored_photons == 1
        assert vacuum.n == 0 and not vacuum_record.intercepted
    
    def test_click_rate_matches_honest_channel(self):
        """Test that Bob's signal click rate is unchanged and no errors appear."""
        channel = ChannelModel(loss_db=-10 * math.log10(0.5))
        cfg = SessionConfig(protocol=Protocol.BB84, n_pulses=20_000, seed=4,
                            source=SourceConfig(mu_by_class={"signal": 0.5}))
        attack = build_attack(AttackConfig(kind=AttackKind.PNS), cfg.source, channel)
        log, attacked = run_quantum_phase(cfg, channel, DetectorModel(), attack=attack)
        _, honest = run_quantum_phase(cfg, channel, DetectorModel())
        key_a, key_b = sift(cfg.protocol, log, attacked)
        
        attacked_rate = sum(r.clicked for r in attacked) / cfg.n_pulses
        honest_rate = sum(r.clicked for r in honest) / cfg.n_pulses
        
        assert isinstance(attack, PNSAttack)
        assert np.array_equal(key_a.bits, key_b.bits)
        assert attacked_rate == pytest.approx(honest_rate, abs=0.015)
        assert eve_bit_accuracy(attack.records, log.bits, log.bases,
                                multi_photon_only=True) == 1.0
    
    def test_target_mu_override(self):
        """Test that target_mu tunes the policy to another intensity."""
        attack = build_attack(AttackConfig(kind=AttackKind.PNS, target_mu=0.1),
                              SourceConfig(), ChannelModel(loss_db=3.0))
        
        assert attack.describe()["target_mu"] == 0.1


class TestUSD:
    """Test unambiguous state discrimination attacks."""
    
    def test_success_probability(self):
        """Test 1 - exp(-2 mu)."""
        assert usd_success_probability(0.5) == pytest.approx(1 - math.exp(-1.0))
        assert usd_success_probability(0.0) == 0.0
    
    def test_bright_train_resent_exactly(self):
        """Test that a bright train is identified and resent with its phases."""
        train = emit_phase_train(10.0, np.array([0, 1, 1, 0, 1]))
        forwarded, records = usd_sequential(train, 10.0, 2, np.random.default_rng(0))
        
        assert np.sign(forwarded.amps.real).tolist() == [1, -1, -1, 1, -1]
        assert [r.bit for r in records] == [0, 1, 1, 0, 1]
    
    def test_short_runs_suppressed(self):
        """Test that runs shorter than block_len are sent as vacuum."""
        train = emit_phase_train(10.0, np.array([0, 1, 0]))
        forwarded, _ = usd_sequential(train, 10.0, 4, np.random.default_rng(0))
        
        assert np.all(forwarded.amps == 0)
    
    def test_two_mode_resend(self):
        """Test B92 pair handling: identified pairs resent at post-channel intensity."""
        attack = UsdSequentialAttack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL), 10.0)
        pair = emit_two_mode(10.0, 100.0, 1)
        out = attack.transform_two_mode(pair, ChannelModel(loss_db=10.0), 0,
                                        np.random.default_rng(0))
        
        assert out.amps[0].real == pytest.approx(-math.sqrt(10.0) * math.sqrt(0.1))
        assert out.amps[1].real == pytest.approx(10.0 * math.sqrt(0.1))
        assert attack.success_rate == 1.0
    
    def test_rejects_qubit_protocols(self):
        """Test that USD cannot attack BB84."""
        cfg = _single_photon_bb84(n_pulses=10)
        attack = build_attack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL), cfg.source,
                              ChannelModel())
        
        with pytest.raises(ProtocolMismatchError):
            run_quantum_phase(cfg, ChannelModel(), DetectorModel(), attack=attack)
    
    def test_dps_attack_runs(self):
        """Test a full DPS session under the sequential attack."""
        cfg = SessionConfig(protocol=Protocol.DPS, n_pulses=2000, seed=2,
                            source=SourceConfig(mu_by_class={"signal": 0.2}))
        attack = build_attack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL, block_len=3),
                              cfg.source, ChannelModel(loss_db=10.0))
        run_quantum_phase(cfg, ChannelModel(loss_db=10.0), DetectorModel(), attack=attack)
        
        assert len(attack.records) == cfg.n_pulses + 1
        assert attack.success_rate == pytest.approx(usd_success_probability(0.2), abs=0.04)
    
    def test_kept_fraction(self):
        """Test p^L (L - (L - 1) p) against block_len 1 and an empirical train."""
        p = usd_success_probability(0.5)
        assert kept_fraction(0.5, 1) == pytest.approx(p)
        train = emit_phase_train(0.5, np.zeros(200_001, dtype=np.uint8))
        forwarded, _ = usd_sequential(train, 0.5, 3, np.random.default_rng(5))
        
        assert np.mean(forwarded.amps != 0) == pytest.approx(kept_fraction(0.5, 3), abs=0.01)
    
    def test_resend_scale_restores_mean_intensity(self):
        """Test that the scaled train carries mu * eta per slot on average."""
        scale = matched_resend_scale(0.5, 3, 0.01)
        train = emit_phase_train(0.5, np.zeros(200_001, dtype=np.uint8))
        forwarded, _ = usd_sequential(train, 0.5, 3, np.random.default_rng(6),
                                      resend_scale=scale)
        
        assert np.mean(np.abs(forwarded.amps) ** 2) == pytest.approx(0.5 * 0.01, rel=0.05)
        assert matched_resend_scale(0.0, 3, 0.01) == 0.0
    
    @pytest.mark.slow
    def test_dps_click_rate_matches_honest(self):
        """Test that Bob's click rate under attack stays near the honest one at 20 dB."""
        cfg = SessionConfig(protocol=Protocol.DPS, n_pulses=100_000, seed=4,
                            source=SourceConfig(mu_by_class={"signal": 0.5}))
        channel = ChannelModel(loss_db=20.0)
        _, honest = run_quantum_phase(cfg, channel, DetectorModel())
        attack = build_attack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL, block_len=3),
                              cfg.source, channel)
        _, attacked = run_quantum_phase(cfg, channel, DetectorModel(), attack=attack)
        honest_rate = np.mean([r.clicked for r in honest])
        attacked_rate = np.mean([r.clicked for r in attacked])
        
        assert honest_rate > 0
        assert attacked_rate == pytest.approx(honest_rate, rel=0.25)
    
    def test_b92_attack_trips_reference_monitor(self):
        """Test that USD on B92 at 20 dB at least doubles the monitor failure rate."""
        cfg = SessionConfig(protocol=Protocol.B92, n_pulses=5000, seed=6,
                            source=SourceConfig(mu_by_class={"signal": 0.5}))
        channel = ChannelModel(loss_db=20.0)
        _, honest = run_quantum_phase(cfg, channel, DetectorModel())
        attack = build_attack(AttackConfig(kind=AttackKind.USD_SEQUENTIAL), cfg.source, channel)
        _, attacked = run_quantum_phase(cfg, channel, DetectorModel(), attack=attack)
        honest_fail = np.mean([r.monitor_ok is False for r in honest])
        attacked_fail = np.mean([r.monitor_ok is False for r in attacked])
        
        assert attacked_fail >= 2 * honest_fail
        # every failed discrimination leaves the reference dark
        assert attacked_fail == pytest.approx(1 - usd_success_probability(0.5), abs=0.03)
    
    def test_eve_train_passthrough_type(self):
        """Test that the forwarded train stays a coherent train."""
        forwarded, _ = usd_sequential(CoherentTrain(amps=[1.0, -1.0]), 1.0, 1,
                                      np.random.default_rng(1))
        
        assert isinstance(forwarded, CoherentTrain)
        assert not forwarded.global_phase_randomized
