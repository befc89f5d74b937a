"""Flat parameter checkpoints.

Layout: an 8-byte magic, an 8-byte little-endian header length, a UTF-8 JSON
manifest mapping parameter names to shape/offset, then the concatenated
little-endian float64 payloads. Round-trips are bit-exact.
"""

import json
import struct

import numpy as np

from ..errors import ParseError

MAGIC = b"LMSGCKP1"


def save_checkpoint(path, params, meta=None):
    """Write `params` (mapping or iterable of (name, array-like)) to `path`."""
    if hasattr(params, "items"):
        pairs = list(params.items())
    else:
        pairs = list(params)
    entries = {}
    blobs = []
    offset = 0
    for name, value in pairs:
        arr = np.ascontiguousarray(getattr(value, "data", value), dtype="<f8")
        entries[name] = {"shape": list(arr.shape), "offset": offset, "nbytes": arr.nbytes}
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    header = json.dumps(
        {"params": entries, "meta": meta or {}}, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Read a checkpoint; returns (dict name -> float64 ndarray, meta dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ParseError("not a landmarkseg checkpoint (bad magic)", path=path)
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        payload = fh.read()
    params = {}
    for name, entry in header["params"].items():
        lo, nbytes = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(payload[lo:lo + nbytes], dtype="<f8").reshape(entry["shape"])
        params[name] = arr.astype(np.float64).copy()
    return params, header.get("meta", {})
