"""Checkpoint fragment format shared by every trainable module.

Layout: a plain-text header, then raw little-endian float32 arrays
concatenated in header order.

    ANATCKPT 1
    {json metadata: schema_version, hashes, config, array list}
    DATA
    <binary>

The JSON line carries ``arrays``: a list of ``{name, shape, activation?}``
records; the binary section is exactly ``sum(prod(shape)) * 4`` bytes.
Round-trips are value-exact at 32-bit precision. A malformed or truncated
file raises :class:`CheckpointError` before any state is handed back.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

MAGIC = "ANATCKPT"
SCHEMA_VERSION = 1


class CheckpointError(ValueError):
    """Corrupt, truncated, or incompatible checkpoint file."""


def write_fragment(path, arrays: list[dict], meta: dict | None = None) -> None:
    """Write named float arrays plus metadata.

    Args:
        arrays: list of ``{"name": str, "value": ndarray, ...extra tags}``;
            extra keys (e.g. ``activation``) land in the header verbatim.
        meta: free-form metadata merged into the header (vocab hashes,
            training config, stage markers).
    """
    header_arrays = []
    blobs = []
    for entry in arrays:
        value = np.ascontiguousarray(entry["value"], dtype="<f4")
        record = {k: v for k, v in entry.items() if k != "value"}
        record["shape"] = list(value.shape)
        header_arrays.append(record)
        blobs.append(value.tobytes())
    header = {"schema_version": SCHEMA_VERSION, "arrays": header_arrays}
    if meta:
        header.update(meta)
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(f"{MAGIC} {SCHEMA_VERSION}\n".encode("utf-8"))
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(b"DATA\n")
        for blob in blobs:
            fh.write(blob)
    tmp.replace(path)


def read_fragment(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a fragment back as ``(header, {name: float32 array})``.

    Validates the magic line, the declared shapes, and the exact binary
    length; raises :class:`CheckpointError` on any mismatch.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    magic_end = raw.find(b"\n")
    if magic_end < 0:
        raise CheckpointError(f"{path}: missing header")
    magic_line = raw[:magic_end].decode("utf-8", errors="replace").split()
    if len(magic_line) != 2 or magic_line[0] != MAGIC:
        raise CheckpointError(f"{path}: bad magic line {raw[:magic_end]!r}")
    if int(magic_line[1]) != SCHEMA_VERSION:
        raise CheckpointError(f"{path}: unsupported schema version {magic_line[1]}")

    header_end = raw.find(b"\n", magic_end + 1)
    if header_end < 0:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[magic_end + 1:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unparseable header: {exc}") from exc

    data_marker = raw[header_end + 1:header_end + 6]
    if data_marker != b"DATA\n":
        raise CheckpointError(f"{path}: missing DATA marker")
    blob = raw[header_end + 6:]

    arrays_meta = header.get("arrays")
    if not isinstance(arrays_meta, list):
        raise CheckpointError(f"{path}: header lacks array list")
    expected = sum(int(np.prod(a["shape"])) for a in arrays_meta) * 4
    if len(blob) != expected:
        raise CheckpointError(
            f"{path}: binary section is {len(blob)} bytes, header declares {expected}"
        )

    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for record in arrays_meta:
        shape = tuple(int(s) for s in record["shape"])
        nbytes = int(np.prod(shape)) * 4
        arr = np.frombuffer(blob[offset:offset + nbytes], dtype="<f4").reshape(shape)
        arrays[record["name"]] = arr.copy()
        offset += nbytes
    return header, arrays
