"""LATT binary and JSON lattice/tensor formats.

Binary record layout (little-endian)::

    b"LATT" | u8 version (=1) | u8 rank (2 or 3) | rank x u32 dims | float32 data, row-major

A file may hold several records back to back.  The JSON alternative is an
object ``{"dims": [...], "data": [...]}`` (``data`` flat row-major or nested)
or a list of such objects.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError

MAGIC = b"LATT"
VERSION = 1


def encode_lattice(array) -> bytes:
    arr = np.asarray(array, dtype="<f4")
    if arr.ndim not in (2, 3):
        raise FormatError(f"LATT supports rank 2 or 3, got rank {arr.ndim}")
    head = MAGIC + struct.pack("<BB", VERSION, arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    return head + np.ascontiguousarray(arr).tobytes()


def decode_lattices(blob: bytes) -> list[np.ndarray]:
    out = []
    pos = 0
    while pos < len(blob):
        if blob[pos:pos + 4] != MAGIC:
            raise FormatError(f"bad magic at byte {pos}")
        if len(blob) < pos + 6:
            raise FormatError("truncated LATT header")
        version, rank = struct.unpack_from("<BB", blob, pos + 4)
        if version != VERSION:
            raise FormatError(f"unsupported LATT version {version}")
        if rank not in (2, 3):
            raise FormatError(f"unsupported LATT rank {rank}")
        pos += 6
        if len(blob) < pos + 4 * rank:
            raise FormatError("truncated LATT dims")
        dims = struct.unpack_from(f"<{rank}I", blob, pos)
        pos += 4 * rank
        n = int(np.prod(dims))
        end = pos + 4 * n
        if len(blob) < end:
            raise FormatError(f"LATT payload truncated: need {4 * n} bytes")
        data = np.frombuffer(blob, dtype="<f4", count=n, offset=pos)
        out.append(data.reshape(dims).astype(np.float64))
        pos = end
    return out


def _from_json_obj(obj) -> np.ndarray:
    try:
        dims = [int(d) for d in obj["dims"]]
        data = np.asarray(obj["data"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad JSON lattice: {exc}") from None
    if data.size != int(np.prod(dims)):
        raise FormatError(f"JSON lattice has {data.size} values for dims {dims}")
    if len(dims) not in (2, 3):
        raise FormatError(f"unsupported lattice rank {len(dims)}")
    return data.reshape(dims)


def lattice_to_json(array) -> dict:
    arr = np.asarray(array, dtype=np.float64)
    return {"dims": list(arr.shape), "data": arr.ravel().tolist()}


def read_lattices(path: str | Path) -> list[np.ndarray]:
    """Read every lattice stored in a LATT or JSON file."""
    blob = Path(path).read_bytes()
    if blob[:4] == MAGIC:
        return decode_lattices(blob)
    try:
        obj = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: neither LATT nor JSON ({exc})") from None
    if isinstance(obj, list):
        return [_from_json_obj(o) for o in obj]
    return [_from_json_obj(obj)]


def write_lattices(path: str | Path, arrays, fmt: str = "latt") -> None:
    if fmt == "latt":
        Path(path).write_bytes(b"".join(encode_lattice(a) for a in arrays))
    elif fmt == "json":
        objs = [lattice_to_json(a) for a in arrays]
        Path(path).write_text(json.dumps(objs[0] if len(objs) == 1 else objs), encoding="utf-8")
    else:
        raise FormatError(f"unknown lattice format {fmt!r}")
