"""Tests for the acceptance suite run by qkdsim verify."""

import pytest

from src.qkdsim.cli.acceptance import (
    CRITERIA,
    CriterionResult,
    chain_network,
    determinism,
    intercept_resend_qber,
    pns_consistency,
    postproc_soundness,
    rate_scaling,
    run_acceptance,
    sifting_fractions,
    sifting_oracle,
    sync_recovery,
    trusted_transport,
    usd_law,
    y00_masking,
)
from src.qkdsim.models import Protocol

SCALE = 0.05


class TestSiftingOracle:
    """Test the enumeration oracle for sifted fractions."""
    
    def test_bb84_half(self):
        """Test that unbiased BB84 keeps half the detections."""
        assert sifting_oracle(Protocol.BB84) == pytest.approx(0.5)
    
    def test_biased_bases(self):
        """Test the kept fraction with biased basis choice."""
        assert sifting_oracle(Protocol.BB84, 0.8) == pytest.approx(0.8 ** 2 + 0.2 ** 2)
    
    def test_sarg04_quarter(self):
        """Test that SARG04 is conclusive on a quarter of the detections."""
        assert sifting_oracle(Protocol.SARG04) == pytest.approx(0.25)


class TestCriterionResult:
    """Test criterion records."""
    
    def test_flat_record(self):
        """Test that measurements are flattened in insertion order."""
        result = CriterionResult(4, "sifting_fractions", True, {"a": 0.123456789, "b": 7})
        
        assert result.flat_record() == {"criterion": 4, "name": "sifting_fractions",
                                        "passed": True, "measured": "a=0.123457;b=7"}
    
    def test_chain_network(self):
        """Test the line network used by the transport criterion."""
        network = chain_network(3)
        
        assert network.nodes == ["n0", "n1", "n2"]
        assert [link.link_id for link in network.links] == ["n0-n1", "n1-n2"]
    
    def test_numbering(self):
        """Test that criteria are numbered 1 to 10."""
        assert sorted(CRITERIA) == list(range(1, 11))


class TestCriteria:
    """Test individual criteria at reduced size."""
    
    def test_intercept_resend(self):
        """Test the full and partial intercept-resend QBER."""
        result = intercept_resend_qber(1, SCALE)
        
        assert result.passed, result.measured
        assert result.criterion == 1
    
    def test_pns(self):
        """Test that PNS hides in the click rate and shows in the decoy bound."""
        result = pns_consistency(2)
        
        assert result.passed, result.measured
        assert result.measured["click_ratio"] == pytest.approx(1.0, abs=0.01)
    
    def test_sifting(self):
        """Test the simulated sifted fractions."""
        assert sifting_fractions(3, SCALE).passed
    
    def test_usd(self):
        """Test the unambiguous discrimination success rate."""
        assert usd_law(4, SCALE).passed
    
    def test_transport(self):
        """Test relay delivery and tamper detection."""
        result = trusted_transport(5)
        
        assert result.passed, result.measured
        assert result.measured["tamper_outcome"] == "AUTH_FAIL"
    
    def test_determinism(self):
        """Test byte-identical artifacts from one seed."""
        result = determinism(6)
        
        assert result.passed
        assert result.measured["results_bytes"] > 0
    
    @pytest.mark.slow
    def test_rate_scaling(self):
        """Test the rate-loss slopes of the three bounds."""
        assert rate_scaling(7).passed
    
    @pytest.mark.slow
    def test_postproc_soundness(self):
        """Test matched keys and the leakage bound over many sessions."""
        assert postproc_soundness(8, 0.1).passed
    
    @pytest.mark.slow
    def test_y00_masking(self):
        """Test Bob's error floor and the observer's symbol error."""
        assert y00_masking(9, 0.1).passed
    
    @pytest.mark.slow
    def test_sync_recovery(self):
        """Test frame-offset recovery and the FATAL path."""
        assert sync_recovery(10).passed


class TestRunAcceptance:
    """Test the suite runner."""
    
    def test_selected_criteria_in_order(self):
        """Test that selected criteria run in ascending order."""
        results = run_acceptance(seed=1, criteria=[10, 4], scale=SCALE)
        
        assert [r.criterion for r in results] == [4, 10]
        assert all(r.passed for r in results)
    
    @pytest.mark.slow
    def test_full_suite(self):
        """Test that every criterion passes at full size."""
        results = run_acceptance(seed=2026)
        
        failed = [r.flat_record() for r in results if not r.passed]
        assert not failed
