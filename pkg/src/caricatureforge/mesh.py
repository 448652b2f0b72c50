"""Triangle mesh container and file I/O (OBJ, binary PLY, label sidecars)."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Raised for malformed mesh data or unparsable mesh files."""


class Mesh:
    """Immutable triangle surface with vertex positions and optional region labels.

    Parameters
    ----------
    vertices : array_like
        (n, 3) float coordinates.
    faces : array_like
        (m, 3) int vertex indices, all in ``[0, n)``, no repeats per face.
    labels : dict | None
        Optional region labels, mapping a name (e.g. ``"nose"``, ``"hair"``)
        to an array of vertex indices.

    Two meshes are *compatible* iff they share the identical face list;
    vertex correspondence is by index. Vertex and face arrays are marked
    read-only after construction so cached operators stay valid.
    """

    def __init__(self, vertices, faces, labels=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {self.vertices.shape}")
        if self.faces.size == 0:
            self.faces = self.faces.reshape(0, 3)
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError(f"faces must be (m, 3), got {self.faces.shape}")
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise MeshError("out-of-range index: face references a vertex outside [0, n)")
        if self.faces.size:
            f = self.faces
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise MeshError("face with repeated vertices")
        self.labels = {}
        if labels:
            for name, idx in labels.items():
                idx = np.unique(np.asarray(idx, dtype=np.int64))
                if idx.size and (idx.min() < 0 or idx.max() >= len(self.vertices)):
                    raise MeshError(f"label {name!r} has out-of-range vertex indices")
                idx.flags.writeable = False
                self.labels[name] = idx
        self.vertices.flags.writeable = False
        self.faces.flags.writeable = False

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    def with_vertices(self, vertices):
        """New mesh with replaced positions, same connectivity and labels."""
        return Mesh(vertices, self.faces, self.labels)

    def is_compatible(self, other):
        return self.faces.shape == other.faces.shape and np.array_equal(self.faces, other.faces)

    def edges(self):
        """Undirected edges as a sorted (e, 2) array, plus per-edge face counts."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        e = np.sort(e, axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq, counts

    def is_edge_manifold(self):
        """True when every undirected edge is shared by at most two faces."""
        if self.n_faces == 0:
            return True
        _, counts = self.edges()
        return bool(counts.max() <= 2)

    def boundary_vertices(self):
        """Indices of vertices on edges with exactly one incident face."""
        if self.n_faces == 0:
            return np.empty(0, dtype=np.int64)
        uniq, counts = self.edges()
        return np.unique(uniq[counts == 1])

    def is_closed(self):
        return self.boundary_vertices().size == 0


def bbox_diagonal(mesh):
    """Length of the axis-aligned bounding-box diagonal (0 for a single point)."""
    if mesh.n_vertices == 0:
        raise MeshError("empty mesh has no bounding box")
    extent = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    return float(np.linalg.norm(extent))


def _fan_triangulate(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _parse_obj(text):
    vertices, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: vertex needs 3 coordinates")
            vertices.append([float(x) for x in parts[1:4]])
        elif tag == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/", 1)[0])
                if i <= 0:
                    raise MeshError(f"line {lineno}: out-of-range index {i} (OBJ is 1-based)")
                idx.append(i - 1)
            if len(idx) < 3:
                raise MeshError(f"line {lineno}: face needs at least 3 vertices")
            faces.extend(_fan_triangulate(idx))
    return np.asarray(vertices, dtype=np.float64).reshape(-1, 3), np.asarray(faces, dtype=np.int64).reshape(-1, 3)


_PLY_TYPES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _parse_ply(data):
    # Minimal binary little-endian reader: vertex x/y/z plus a face index list.
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise MeshError("not a PLY file")
    header = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[end + len(b"end_header\n"):]

    elements = []  # (name, count, [(kind, ...)])
    fmt = None
    for line in header[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshError("PLY property before element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append(("scalar", parts[1], parts[2]))
    if fmt != "binary_little_endian":
        raise MeshError(f"unsupported PLY format {fmt!r} (binary_little_endian only)")

    vertices, faces = None, []
    offset = 0
    for name, count, props in elements:
        if name == "vertex" and all(p[0] == "scalar" for p in props):
            codes = "".join(_PLY_TYPES[p[1]] for p in props)
            names = [p[2] for p in props]
            rec = struct.Struct("<" + codes)
            rows = [rec.unpack_from(data, end + len(b"end_header\n") + offset + i * rec.size) for i in range(count)]
            offset += count * rec.size
            try:
                xi, yi, zi = names.index("x"), names.index("y"), names.index("z")
            except ValueError:
                raise MeshError("PLY vertex element lacks x/y/z") from None
            vertices = np.asarray(rows, dtype=np.float64)[:, [xi, yi, zi]]
        else:
            # Walk records property by property; keep face index lists.
            for _ in range(count):
                for p in props:
                    if p[0] == "list":
                        n_code, v_code = _PLY_TYPES[p[1]], _PLY_TYPES[p[2]]
                        n = struct.unpack_from("<" + n_code, body, offset)[0]
                        offset += struct.calcsize(n_code)
                        vals = struct.unpack_from("<" + str(n) + v_code, body, offset)
                        offset += n * struct.calcsize(v_code)
                        if name == "face" and p[3] in ("vertex_indices", "vertex_index"):
                            if n < 3:
                                raise MeshError("PLY face with fewer than 3 vertices")
                            faces.extend(_fan_triangulate(list(vals)))
                    else:
                        offset += struct.calcsize(_PLY_TYPES[p[1]])
    if vertices is None:
        raise MeshError("PLY has no vertex element")
    return vertices, np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def load_labels(path):
    """Read a region-label sidecar: {"labels": {"name": [vertex indices...]}}."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "labels" not in doc:
        raise MeshError(f"{path}: label sidecar must be an object with a 'labels' key")
    return {str(k): np.asarray(v, dtype=np.int64) for k, v in doc["labels"].items()}


def save_labels(path, labels):
    doc = {"labels": {k: np.asarray(v).astype(int).tolist() for k, v in labels.items()}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_mesh(path, fmt=None, labels_path=None):
    """Load an OBJ or binary little-endian PLY triangle mesh.

    Polygonal faces are fan-triangulated. ``fmt`` overrides the extension-based
    format guess. Region labels are read from ``labels_path`` or, when present,
    from a ``<stem>.labels.json`` sidecar next to the mesh.
    """
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "obj":
        vertices, faces = _parse_obj(path.read_text(encoding="utf-8", errors="replace"))
    elif fmt == "ply":
        vertices, faces = _parse_ply(path.read_bytes())
    else:
        raise MeshError(f"unsupported mesh format {fmt!r} (obj or ply)")
    if vertices.size == 0:
        raise MeshError(f"{path}: no vertices")

    labels = None
    sidecar = Path(labels_path) if labels_path else path.with_suffix(".labels.json")
    if sidecar.exists():
        labels = load_labels(sidecar)
    elif labels_path:
        raise MeshError(f"label sidecar {labels_path} not found")
    return Mesh(vertices, faces, labels)


def save_mesh(path, mesh):
    """Write an OBJ file (positions and faces only)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
