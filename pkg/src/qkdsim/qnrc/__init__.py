"""Y00 quantum-noise randomized cipher."""

from .adversary import (
    eve_known_plaintext,
    eve_nearest_block,
    eve_nearest_state,
    masking_count,
    masking_count_empirical,
)
from .cipher import (
    HomodyneOutcome,
    Y00Symbol,
    decrypt_block,
    encrypt_block,
    heterodyne_block,
    heterodyne_measure,
    homodyne_block,
    homodyne_measure,
    receiver_angles,
    signal_phase,
    transmit_block,
    y00_decrypt,
    y00_encrypt,
    y00_transmit,
)
from .harness import QnrcReport, run_qnrc
from .keystream import RunningKeyGen, expand_running_key, is_primitive

__all__ = [
    "HomodyneOutcome",
    "QnrcReport",
    "RunningKeyGen",
    "Y00Symbol",
    "decrypt_block",
    "encrypt_block",
    "eve_known_plaintext",
    "eve_nearest_block",
    "eve_nearest_state",
    "expand_running_key",
    "heterodyne_block",
    "heterodyne_measure",
    "homodyne_block",
    "homodyne_measure",
    "is_primitive",
    "masking_count",
    "masking_count_empirical",
    "receiver_angles",
    "run_qnrc",
    "signal_phase",
    "transmit_block",
    "y00_decrypt",
    "y00_encrypt",
    "y00_transmit",
]
