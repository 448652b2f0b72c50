"""Synthetic test meshes: icospheres, height-field patches, tori."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh

# Counts per subdivision level: V = 12, 42, 162, 642, 2562, ...; F = 20 * 4**level.


def icosphere(subdivisions=2, radius=1.0):
    """Unit icosahedron subdivided ``subdivisions`` times, projected to a sphere.

    Faces wind counter-clockwise seen from outside.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        midpoint = {}
        out = []

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                p = np.asarray(verts[a]) + np.asarray(verts[b])
                p /= np.linalg.norm(p)
                verts.append(tuple(p))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = out
    v = np.asarray(verts, dtype=np.float64) * radius
    return Mesh(v, np.asarray(faces, dtype=np.int64))


def bumpy_sphere(subdivisions=4, amplitude=0.15, frequency=3.0):
    """Icosphere with smooth radial bumps; closed, curvature varies but stays elliptic."""
    base = icosphere(subdivisions)
    v = base.vertices
    r = 1.0 + amplitude * np.sin(frequency * v[:, 0]) * np.sin(frequency * v[:, 1]) * np.sin(
        frequency * v[:, 2]
    )
    return base.with_vertices(v * r[:, None])


def grid_patch(nx=10, ny=10, width=1.0, height=1.0, z_fn=None):
    """Open rectangular patch of ``nx*ny`` vertices, optionally lifted by ``z_fn(x, y)``."""
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = z_fn(X, Y) if z_fn is not None else np.zeros_like(X)
    verts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            c = (i + 1) * ny + j + 1
            d = i * ny + j + 1
            faces.append((a, b, c))
            faces.append((a, c, d))
    return Mesh(verts, np.asarray(faces, dtype=np.int64))


def torus(major_radius=1.0, minor_radius=0.4, n_major=32, n_minor=16):
    """Closed torus; carries both positive and negative Gaussian curvature."""
    verts = np.empty((n_major * n_minor, 3))
    for i in range(n_major):
        u = 2.0 * np.pi * i / n_major
        for j in range(n_minor):
            v = 2.0 * np.pi * j / n_minor
            r = major_radius + minor_radius * np.cos(v)
            verts[i * n_minor + j] = (r * np.cos(u), r * np.sin(u), minor_radius * np.sin(v))
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            faces.append((a, b, c))
            faces.append((a, c, d))
    return Mesh(verts, np.asarray(faces, dtype=np.int64))


def face_patch(n=71, extent=1.8):
    """Face-scale open patch (~n*n vertices) with nose/brow/cheek bumps.

    A stand-in for a fitted head template: smooth base dome, a pronounced
    central bump ("nose"), two brow ridges, and near-flat cheek areas.
    Region labels: ``nose``, ``brow``, ``cheek``, ``boundary``.
    """

    def z_fn(x, y):
        cx = extent / 2.0
        base = 0.40 * np.exp(-(((x - cx) ** 2 + (y - cx) ** 2) / (2 * (0.35 * extent) ** 2)))
        nose = 0.22 * np.exp(-(((x - cx) ** 2 + (y - 0.42 * extent) ** 2) / (2 * 0.025)))
        brow_l = 0.08 * np.exp(-(((x - 0.36 * extent) ** 2 + (y - 0.62 * extent) ** 2) / (2 * 0.008)))
        brow_r = 0.08 * np.exp(-(((x - 0.64 * extent) ** 2 + (y - 0.62 * extent) ** 2) / (2 * 0.008)))
        return base + nose + brow_l + brow_r

    mesh = grid_patch(n, n, width=extent, height=extent, z_fn=z_fn)
    v = mesh.vertices
    cx = extent / 2.0
    nose = np.where((v[:, 0] - cx) ** 2 + (v[:, 1] - 0.42 * extent) ** 2 < 0.05)[0]
    brow = np.where(
        ((v[:, 0] - 0.36 * extent) ** 2 + (v[:, 1] - 0.62 * extent) ** 2 < 0.03)
        | ((v[:, 0] - 0.64 * extent) ** 2 + (v[:, 1] - 0.62 * extent) ** 2 < 0.03)
    )[0]
    cheek = np.where(
        ((v[:, 0] - 0.18 * extent) ** 2 + (v[:, 1] - 0.22 * extent) ** 2 < 0.03)
        | ((v[:, 0] - 0.82 * extent) ** 2 + (v[:, 1] - 0.22 * extent) ** 2 < 0.03)
    )[0]
    labels = {
        "nose": nose,
        "brow": brow,
        "cheek": cheek,
        "boundary": mesh.boundary_vertices(),
    }
    return Mesh(mesh.vertices, mesh.faces, labels)
