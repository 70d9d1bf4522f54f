"""JSON and packed-binary formats for hypervectors.

JSON form::

    {"space": "bipolar", "dimension": 4, "parameters": {}, "components": [1, -1, -1, 1]}

Binary vectors are 0/1 arrays, phasors are radian arrays in (0, 2*pi]. A
non-unit phasor (an unnormalized sum) additionally carries ``"magnitudes"``.

Packed form (little-endian)::

    b"HVEC" | version u8 | space tag u8 | D u32 | parameter f64 | payload

Binary and bipolar payloads are bit-packed (LSB first, 1 means 1 / +1), real
and phasor payloads are f64 values (phasors as angles), modular payloads are
i64. Only canonical hypervectors can be packed.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import SpaceError
from .spaces import (
    BINARY_KINDS,
    BIPOLAR,
    BLOCK_SPARSE,
    DENSE_BINARY,
    MODULAR,
    PHASOR,
    PHASOR_TOL,
    REAL,
    SPARSE_BINARY,
    Hypervector,
    SpaceSpec,
    phasor_angles,
)

MAGIC = b"HVEC"
VERSION = 1
SPACE_TAGS = {
    DENSE_BINARY: 1,
    BIPOLAR: 2,
    REAL: 3,
    PHASOR: 4,
    SPARSE_BINARY: 5,
    BLOCK_SPARSE: 6,
    MODULAR: 7,
}
_TAG_SPACES = {v: k for k, v in SPACE_TAGS.items()}
_HEADER = struct.Struct("<4sBBId")


def space_to_dict(space: SpaceSpec) -> dict:
    return {"space": space.kind, "dimension": space.dim, "parameters": space.params()}


def space_from_dict(d: dict) -> SpaceSpec:
    params = d.get("parameters", {}) or {}
    return SpaceSpec(
        d["space"],
        int(d["dimension"]),
        density=params.get("density"),
        block_size=params.get("block_size"),
        r=params.get("r"),
    )


def to_dict(hv: Hypervector) -> dict:
    out = space_to_dict(hv.space)
    data = hv.data
    if hv.space.kind == PHASOR:
        out["components"] = phasor_angles(data).tolist()
        mags = np.abs(data)
        if np.any(np.abs(mags - 1.0) > PHASOR_TOL):
            out["magnitudes"] = mags.tolist()
    elif np.issubdtype(data.dtype, np.integer):
        out["components"] = [int(v) for v in data]
    else:
        out["components"] = data.astype(np.float64).tolist()
    return out


def from_dict(d: dict) -> Hypervector:
    space = space_from_dict(d)
    comps = d["components"]
    if space.kind == PHASOR:
        angles = np.asarray(comps, dtype=np.float64)
        mags = np.asarray(d.get("magnitudes", np.ones_like(angles)), dtype=np.float64)
        return Hypervector(space, mags * np.exp(1j * angles))
    arr = np.asarray(comps)
    if space.kind == REAL or arr.dtype.kind == "f":
        return Hypervector(space, arr.astype(np.float64))
    if space.kind in BINARY_KINDS and np.all((arr == 0) | (arr == 1)):
        return Hypervector(space, arr.astype(np.uint8))
    if space.kind == BIPOLAR and np.all(np.abs(arr) == 1):
        return Hypervector(space, arr.astype(np.int8))
    return Hypervector(space, arr.astype(np.int64))


def dumps(hv: Hypervector, **kwargs) -> str:
    return json.dumps(to_dict(hv), **kwargs)


def loads(text: str) -> Hypervector:
    return from_dict(json.loads(text))


def _param(space: SpaceSpec) -> float:
    if space.kind == SPARSE_BINARY:
        return float(space.density)
    if space.kind == BLOCK_SPARSE:
        return float(space.block_size)
    if space.kind == MODULAR:
        return float(space.r)
    return 0.0


def to_bytes(hv: Hypervector) -> bytes:
    space = hv.space
    if not hv.is_canonical():
        raise SpaceError("only canonical hypervectors can be packed; normalize first")
    header = _HEADER.pack(MAGIC, VERSION, SPACE_TAGS[space.kind], space.dim, _param(space))
    data = hv.data
    if space.kind in BINARY_KINDS:
        payload = np.packbits(data.astype(np.uint8), bitorder="little").tobytes()
    elif space.kind == BIPOLAR:
        payload = np.packbits((data > 0).astype(np.uint8), bitorder="little").tobytes()
    elif space.kind == REAL:
        payload = data.astype("<f8").tobytes()
    elif space.kind == PHASOR:
        payload = phasor_angles(data).astype("<f8").tobytes()
    else:
        payload = data.astype("<i8").tobytes()
    return header + payload


def from_bytes(blob: bytes) -> Hypervector:
    if len(blob) < _HEADER.size:
        raise SpaceError("truncated HVEC header")
    magic, version, tag, D, param = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SpaceError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SpaceError(f"unsupported HVEC version {version}")
    if tag not in _TAG_SPACES:
        raise SpaceError(f"unknown space tag {tag}")
    kind = _TAG_SPACES[tag]
    space = SpaceSpec(
        kind,
        D,
        density=param if kind == SPARSE_BINARY else None,
        block_size=int(param) if kind == BLOCK_SPARSE else None,
        r=int(param) if kind == MODULAR else None,
    )
    body = blob[_HEADER.size:]
    if kind in BINARY_KINDS or kind == BIPOLAR:
        need = (D + 7) // 8
        if len(body) != need:
            raise SpaceError(f"expected {need} payload bytes, got {len(body)}")
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8), bitorder="little", count=D)
        if kind == BIPOLAR:
            return Hypervector(space, (2 * bits.astype(np.int8) - 1).astype(np.int8))
        return Hypervector(space, bits)
    if len(body) != 8 * D:
        raise SpaceError(f"expected {8 * D} payload bytes, got {len(body)}")
    if kind == REAL:
        return Hypervector(space, np.frombuffer(body, dtype="<f8").astype(np.float64))
    if kind == PHASOR:
        return Hypervector(space, np.exp(1j * np.frombuffer(body, dtype="<f8")))
    return Hypervector(space, np.frombuffer(body, dtype="<i8").astype(np.int64))
