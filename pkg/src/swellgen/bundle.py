"""Binary bundle format for model parameters and run metadata.

Layout:

    6 bytes   magic ``MBND1\\n``
    8 bytes   little-endian uint64, byte length of the JSON header
    N bytes   UTF-8 JSON header: {"meta": {...}, "tensors": [...]}
    payload   concatenated float64 little-endian arrays, C order

Each header entry records ``name``, ``shape``, ``offset`` and ``nbytes``
of one array in the payload.  The header carries no timestamps or
environment details, so saving identical arrays and metadata twice yields
byte-identical files and round trips are bit exact.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"MBND1\n"


class BundleError(ValueError):
    """Raised for malformed or truncated bundle files."""


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace drift."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def save_bundle(path, arrays: dict[str, np.ndarray], meta: dict | None = None) -> None:
    entries = []
    payload = bytearray()
    offset = 0
    for name in sorted(arrays):
        # asarray, not ascontiguousarray: the latter promotes 0-d to 1-d
        # and would corrupt scalar shapes; tobytes() copies in C order anyway
        arr = np.asarray(arrays[name], dtype="<f8")
        raw = arr.tobytes()
        entries.append({"name": name, "shape": list(arr.shape),
                        "offset": offset, "nbytes": len(raw)})
        payload += raw
        offset += len(raw)
    header = canonical_json({"meta": meta or {}, "tensors": entries}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(payload)


def load_bundle(path) -> tuple[dict[str, np.ndarray], dict]:
    blob = Path(path).read_bytes()
    if blob[:len(MAGIC)] != MAGIC:
        raise BundleError(f"{path}: bad magic, not a model bundle")
    if len(blob) < len(MAGIC) + 8:
        raise BundleError(f"{path}: truncated header length field")
    (header_len,) = struct.unpack_from("<Q", blob, len(MAGIC))
    header_start = len(MAGIC) + 8
    payload_start = header_start + header_len
    if len(blob) < payload_start:
        raise BundleError(f"{path}: truncated JSON header")
    try:
        header = json.loads(blob[header_start:payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleError(f"{path}: undecodable header: {exc}") from exc
    if not isinstance(header, dict) or "tensors" not in header:
        raise BundleError(f"{path}: header missing tensor table")
    arrays: dict[str, np.ndarray] = {}
    payload = blob[payload_start:]
    for entry in header["tensors"]:
        lo, hi = entry["offset"], entry["offset"] + entry["nbytes"]
        if hi > len(payload):
            raise BundleError(f"{path}: tensor {entry['name']!r} extends past end of file")
        arr = np.frombuffer(payload[lo:hi], dtype="<f8").reshape(entry["shape"])
        arrays[entry["name"]] = arr.astype(np.float64, copy=True)
    return arrays, header.get("meta", {})
