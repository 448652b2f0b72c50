"""Binary mesh payload for slider-rate transfer to the studio.

Layout (little-endian): u32 envelope length, UTF-8 JSON envelope, f32 vertex
triples, u32 face index triples. The envelope must carry ``vertex_count`` and
``face_count``; everything else is free-form metadata.
"""

from __future__ import annotations

import json
import struct

import numpy as np

FORMAT_NAME = "forge-mesh/1"


def encode_mesh(vertices, faces, meta=None):
    vertices = np.ascontiguousarray(vertices, dtype="<f4")
    faces = np.ascontiguousarray(faces, dtype="<u4")
    envelope = dict(meta or {})
    envelope.setdefault("format", FORMAT_NAME)
    envelope["vertex_count"] = int(len(vertices))
    envelope["face_count"] = int(len(faces))
    blob = json.dumps(envelope, separators=(",", ":")).encode("utf-8")
    return struct.pack("<I", len(blob)) + blob + vertices.tobytes() + faces.tobytes()


def decode_mesh(data):
    """Returns (vertices float32 (n,3), faces uint32 (m,3), envelope dict)."""
    if len(data) < 4:
        raise ValueError("payload too short")
    (env_len,) = struct.unpack_from("<I", data, 0)
    envelope = json.loads(data[4:4 + env_len].decode("utf-8"))
    nv, nf = int(envelope["vertex_count"]), int(envelope["face_count"])
    off = 4 + env_len
    need = off + nv * 12 + nf * 12
    if len(data) < need:
        raise ValueError(f"payload truncated: have {len(data)} bytes, need {need}")
    vertices = np.frombuffer(data, dtype="<f4", count=nv * 3, offset=off).reshape(nv, 3)
    faces = np.frombuffer(data, dtype="<u4", count=nf * 3, offset=off + nv * 12).reshape(nf, 3)
    return vertices, faces, envelope
