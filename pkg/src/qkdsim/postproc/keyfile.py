"""QKEY1 key-material files.

Layout: ``b"QKEY1"``, bit length as 8-byte little-endian integer, the key
packed MSB-first into bytes, then a 16-byte SHAKE128 digest of the key's
metadata.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from cryptography.hazmat.primitives import hashes

from ..errors import KeyFileError

MAGIC = b"QKEY1"
LENGTH_BYTES = 8
DIGEST_BYTES = 16


def metadata_digest(metadata: Dict[str, Any]) -> bytes:
    """16-byte SHAKE128 digest of the canonical JSON form of ``metadata``."""
    canonical = json.dumps(metadata, sort_keys=True, separators=(",", ":"), default=str)
    digest = hashes.Hash(hashes.SHAKE128(digest_size=DIGEST_BYTES))
    digest.update(canonical.encode("utf-8"))
    return digest.finalize()


def encode_key(bits: np.ndarray, metadata: Dict[str, Any]) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    return (MAGIC + len(bits).to_bytes(LENGTH_BYTES, "little")
            + np.packbits(bits).tobytes() + metadata_digest(metadata))


def decode_key(blob: bytes) -> Tuple[np.ndarray, bytes]:
    """Parse a QKEY1 blob into (bits, metadata digest).

    Raises:
        KeyFileError: Wrong magic or truncated payload
    """
    if not blob.startswith(MAGIC):
        raise KeyFileError("not a QKEY1 key file")
    offset = len(MAGIC)
    if len(blob) < offset + LENGTH_BYTES:
        raise KeyFileError("key file truncated in the length field")
    n_bits = int.from_bytes(blob[offset:offset + LENGTH_BYTES], "little")
    offset += LENGTH_BYTES
    n_bytes = -(-n_bits // 8)
    if len(blob) != offset + n_bytes + DIGEST_BYTES:
        raise KeyFileError(
            f"key file holds {len(blob)} bytes, expected {offset + n_bytes + DIGEST_BYTES}",
            details={"n_bits": n_bits},
        )
    packed = np.frombuffer(blob[offset:offset + n_bytes], dtype=np.uint8)
    bits = np.unpackbits(packed)[:n_bits].astype(np.uint8)
    return bits, blob[offset + n_bytes:]


def write_key_file(path: Union[str, Path], bits: np.ndarray, metadata: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_key(bits, metadata))
    return path


def read_key_file(path: Union[str, Path],
                  metadata: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, bytes]:
    """Read a key file, checking the digest when the expected metadata is given.

    Raises:
        KeyFileError: Malformed file or metadata digest mismatch
    """
    bits, digest = decode_key(Path(path).read_bytes())
    if metadata is not None and digest != metadata_digest(metadata):
        raise KeyFileError("metadata digest does not match the key file")
    return bits, digest
