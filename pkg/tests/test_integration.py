"""Integration tests across the simulator's layers."""

from pathlib import Path

import numpy as np
import pytest

from src.qkdsim.cli.main import main
from src.qkdsim.errors import KeyFileError
from src.qkdsim.models import (
    ChannelModel,
    DetectorModel,
    LinkConfig,
    NetworkConfig,
    PhotonStatistics,
    ProvisioningMode,
    Protocol,
    RateMode,
    SessionConfig,
    SourceConfig,
    TransportRequest,
)
from src.qkdsim.monitoring.metrics import SimulationMetrics
from src.qkdsim.netsim.graph import TrustedNetwork
from src.qkdsim.netsim.orchestrator import TransportOrchestrator
from src.qkdsim.netsim.provisioning import provision_links
from src.qkdsim.orchestration.orchestrator import SessionOrchestrator
from src.qkdsim.photonics.channel import misalignment_for_qber
from src.qkdsim.postproc.keyfile import read_key_file, write_key_file


SINGLE_PHOTON_BB84 = SessionConfig(
    protocol=Protocol.BB84,
    source=SourceConfig(photon_statistics=PhotonStatistics.SINGLE_PHOTON),
)


@pytest.mark.integration
class TestSessionToKeyFile:
    """Test a distilled key through to its file on disk."""
    
    def test_key_file_round_trip(self, tmp_path):
        """Test that both parties' stored keys agree and carry their metadata."""
        channel = ChannelModel(misalignment_angle=misalignment_for_qber(0.02))
        cfg = SINGLE_PHOTON_BB84.model_copy(update={"seed": 8, "n_pulses": 20_000})
        result = SessionOrchestrator().run(cfg, channel, DetectorModel())
        assert result.outcome == "OK"
        metadata = {"seed": 8, "n_reconciled": result.key_a.n_reconciled}
        
        write_key_file(tmp_path / "alice.qkey", result.key_a.bits, metadata)
        write_key_file(tmp_path / "bob.qkey", result.key_b.bits, metadata)
        alice, digest_a = read_key_file(tmp_path / "alice.qkey", metadata)
        bob, digest_b = read_key_file(tmp_path / "bob.qkey", metadata)
        
        assert np.array_equal(alice, bob)
        assert digest_a == digest_b
        assert len(alice) == result.secret_length
    
    def test_metadata_mismatch(self, tmp_path):
        """Test that a key file read against other metadata is refused."""
        write_key_file(tmp_path / "k.qkey", np.ones(64, dtype=np.uint8), {"seed": 1})
        
        with pytest.raises(KeyFileError):
            read_key_file(tmp_path / "k.qkey", {"seed": 2})


@pytest.mark.integration
class TestNetworkEndToEnd:
    """Test simulated links feeding hop-by-hop transport."""
    
    def test_full_sim_then_transport(self):
        """Test delivery over keys distilled by full link simulations."""
        links = [LinkConfig(a=a, b=b, rate_mode=RateMode.SINGLE_PHOTON, session=SINGLE_PHOTON_BB84)
                 for a, b in (("A", "B"), ("B", "C"))]
        network = TrustedNetwork(NetworkConfig(nodes=["A", "B", "C"], links=links), seed=3)
        metrics = SimulationMetrics()
        
        provisions = provision_links(network, ProvisioningMode.FULL_SIM, duration=10_000,
                                     seed=3, metrics=metrics)
        reports = TransportOrchestrator(network, seed=4, metrics=metrics).process(
            [TransportRequest(src="A", dst="C", n_bytes=16)])
        
        assert all(p.deposited > 0 for p in provisions)
        report = reports[0]
        assert report.ok and report.intact
        assert report.path == ["A", "B", "C"]
        ledger = network.ledger()
        for link_id in ("A-B", "B-C"):
            ends = [ledger[f"{link_id}@{node}"] for node in link_id.split("-")]
            assert ends[0] == ends[1]
            assert ends[0][1] == 128
            assert ends[0][2] == 128
        assert 'outcome="DELIVERED"' in metrics.render()


@pytest.mark.integration
class TestCommandLine:
    """Test several runs sharing one output root."""
    
    def test_runs_share_output_root(self, tmp_path, write_scenario, capsys):
        """Test that different scenarios land in different run directories."""
        out = tmp_path / "runs"
        qnrc = write_scenario({"kind": "QNRC", "seed": 1, "n_symbols": 1000}, name="qnrc.json")
        session = write_scenario({"kind": "SESSION", "seed": 1,
                                  "session": {"n_pulses": 5000,
                                              "source": {"photon_statistics": "SINGLE_PHOTON"}}},
                                 name="session.json")
        
        assert main(["run-qnrc", str(qnrc), "--out", str(out)]) == 0
        assert main(["run-session", str(session), "--out", str(out)]) == 0
        printed = [Path(line) for line in capsys.readouterr().out.split()]
        
        assert len(set(printed)) == 2
        assert sorted(p.name for p in out.iterdir()) == sorted(p.name for p in printed)
        for run_dir in printed:
            assert (run_dir / "metadata.json").exists()
            assert (run_dir / "results.csv").exists()
    
    def test_rerun_overwrites_same_directory(self, tmp_path, write_scenario, capsys):
        """Test that rerunning a scenario reuses its directory with identical results."""
        path = write_scenario({"kind": "QNRC", "seed": 2, "n_symbols": 1000})
        out = tmp_path / "runs"
        
        main(["run-qnrc", str(path), "--out", str(out)])
        first = (Path(capsys.readouterr().out.strip()) / "results.csv").read_bytes()
        main(["run-qnrc", str(path), "--out", str(out)])
        second_dir = Path(capsys.readouterr().out.strip())
        
        assert len(list(out.iterdir())) == 1
        assert (second_dir / "results.csv").read_bytes() == first
