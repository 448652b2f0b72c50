import json
import struct

import numpy as np
import pytest

from caricatureforge import Mesh, MeshError, bbox_diagonal, icosphere, load_mesh, save_mesh
from caricatureforge.shapes import grid_patch


def test_single_triangle_obj(tmp_path):
    p = tmp_path / "tri.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    mesh = load_mesh(p)
    assert mesh.n_vertices == 3
    assert mesh.n_faces == 1


def test_quad_fan_triangulation(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    mesh = load_mesh(p)
    assert mesh.n_faces == 2
    # the two triangles share the fan diagonal (0, 2)
    edges, counts = mesh.edges()
    shared = edges[counts == 2]
    assert shared.shape == (1, 2)
    assert tuple(shared[0]) == (0, 2)


def test_obj_zero_index_rejected(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")
    with pytest.raises(MeshError, match="out-of-range index"):
        load_mesh(p)


def test_face_index_out_of_range():
    with pytest.raises(MeshError, match="out-of-range"):
        Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])


def test_repeated_vertex_in_face():
    with pytest.raises(MeshError, match="repeated"):
        Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])


def test_obj_roundtrip(tmp_path):
    mesh = icosphere(1)
    p = tmp_path / "s.obj"
    save_mesh(p, mesh)
    back = load_mesh(p)
    assert np.array_equal(back.faces, mesh.faces)
    assert np.allclose(back.vertices, mesh.vertices, atol=0, rtol=0)


def test_labels_sidecar(tmp_path):
    mesh = icosphere(1)
    p = tmp_path / "s.obj"
    save_mesh(p, mesh)
    sidecar = tmp_path / "s.labels.json"
    sidecar.write_text(json.dumps({"labels": {"nose": [0, 1, 2], "hair": [5]}}))
    back = load_mesh(p)
    assert set(back.labels) == {"nose", "hair"}
    assert back.labels["nose"].tolist() == [0, 1, 2]


def test_labels_out_of_range(tmp_path):
    mesh = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    with pytest.raises(MeshError, match="out-of-range"):
        Mesh(mesh.vertices, mesh.faces, {"nose": [99]})


def _ply_bytes(vertices, faces):
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {len(vertices)}\n"
        "property float x\nproperty float y\nproperty float z\n"
        f"element face {len(faces)}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    ).encode("ascii")
    body = b""
    for v in vertices:
        body += struct.pack("<3f", *v)
    for f in faces:
        body += struct.pack("<B3i", 3, *f)
    return header + body


def test_binary_ply(tmp_path):
    verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    faces = [(0, 1, 2), (0, 2, 3)]
    p = tmp_path / "m.ply"
    p.write_bytes(_ply_bytes(verts, faces))
    mesh = load_mesh(p)
    assert mesh.n_vertices == 4
    assert np.array_equal(mesh.faces, np.asarray(faces))
    assert np.allclose(mesh.vertices, np.asarray(verts, dtype=np.float32))


def test_ply_ascii_rejected(tmp_path):
    p = tmp_path / "m.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n")
    with pytest.raises(MeshError, match="binary_little_endian"):
        load_mesh(p)


def test_bbox_diagonal_unit_cube():
    corners = np.array(np.meshgrid([0, 1], [0, 1], [0, 1])).reshape(3, -1).T
    mesh = Mesh(corners, [[0, 1, 2]])
    assert bbox_diagonal(mesh) == pytest.approx(np.sqrt(3.0), abs=1e-15)


def test_bbox_diagonal_degenerate_and_translation():
    single = Mesh([[3.0, -2.0, 7.0]], np.zeros((0, 3)))
    assert bbox_diagonal(single) == 0.0
    mesh = icosphere(1)
    moved = mesh.with_vertices(mesh.vertices + np.array([5.0, -7.0, 11.0]))
    assert bbox_diagonal(moved) == pytest.approx(bbox_diagonal(mesh), rel=1e-15)


def test_boundary_and_closed():
    patch = grid_patch(4, 4)
    assert not patch.is_closed()
    assert patch.boundary_vertices().size == 12  # perimeter of a 4x4 grid
    assert icosphere(1).is_closed()


def test_compatibility():
    a = icosphere(1)
    b = a.with_vertices(a.vertices * 2.0)
    assert a.is_compatible(b)
    assert not a.is_compatible(grid_patch(3, 3))
