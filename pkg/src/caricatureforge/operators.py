"""Discrete differential operators on a triangle mesh.

Conventions (fixed by the operator identity ``<grad u, grad v> = u^T W v``):

* ``W`` is the symmetric positive semidefinite cotangent stiffness matrix,
  assembled so that ``u^T W v`` equals the face-area-weighted inner product
  of the per-face gradients of ``u`` and ``v``. Off-diagonals carry
  ``-(cot a + cot b)/2`` for the two angles opposite an interior edge, rows
  sum to zero.
* ``A`` is the lumped (diagonal) barycentric mass matrix: one third of the
  incident face areas per vertex.
* ``gradient`` maps vertex scalars to per-face 3-vectors; ``divergence`` is
  its adjoint under the (A, face-area) inner products, so that
  ``A @ divergence(gradient(u)) == W @ u``. The mass-normalized
  Laplace-Beltrami operator is ``-A^{-1} W``.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .mesh import MeshError, bbox_diagonal

COT_CLAMP = 1e4
AREA_FLOOR_REL = 1e-12  # of squared bbox diagonal


class DegenerateFaceError(MeshError):
    """Raised when faces fall below the relative area floor."""

    def __init__(self, face_indices):
        self.face_indices = list(map(int, face_indices))
        shown = ", ".join(map(str, self.face_indices[:20]))
        more = "" if len(self.face_indices) <= 20 else f" (+{len(self.face_indices) - 20} more)"
        super().__init__(f"degenerate faces below area floor: [{shown}]{more}")


class DiscreteOperators:
    """Cotangent stiffness, lumped areas, and gradient/divergence assemblies.

    Built once per mesh geometry by :func:`build_operators`; all arrays are
    read-only and safe to share across concurrent solves.
    """

    def __init__(self, W, vertex_areas, face_areas, grad, n_vertices, n_faces):
        self.W = W                      # (n, n) csr, PSD stiffness
        self.vertex_areas = vertex_areas  # (n,) lumped barycentric areas
        self.face_areas = face_areas    # (m,)
        self._grad = grad               # (3m, n) csr, rows [3f..3f+2] = grad on face f
        self.n_vertices = n_vertices
        self.n_faces = n_faces
        for arr in (vertex_areas, face_areas):
            arr.flags.writeable = False

    @property
    def A(self):
        """Lumped mass matrix as a sparse diagonal."""
        return sparse.diags(self.vertex_areas)

    def gradient(self, u):
        """Per-face gradient of a vertex scalar field, shape (m, 3)."""
        u = np.asarray(u, dtype=np.float64)
        return (self._grad @ u).reshape(self.n_faces, 3)

    def divergence(self, vec):
        """Adjoint of :meth:`gradient`: per-vertex field from per-face vectors.

        Satisfies ``sum_f area_f <vec_f, grad_f u> = sum_v A_v div(vec)_v u_v``.
        """
        vec = np.asarray(vec, dtype=np.float64).reshape(self.n_faces, 3)
        return self.integrated_divergence(vec) / self.vertex_areas

    def integrated_divergence(self, vec):
        """Divergence premultiplied by the lumped areas (``A @ divergence``)."""
        vec = np.asarray(vec, dtype=np.float64).reshape(self.n_faces, 3)
        weighted = vec * self.face_areas[:, None]
        return self._grad.T @ weighted.ravel()

    def weighted_stiffness(self, face_weights):
        """Stiffness with per-face scalar weights: ``G^T diag(area * w) G``."""
        w = np.repeat(self.face_areas * np.asarray(face_weights, dtype=np.float64), 3)
        return (self._grad.T @ sparse.diags(w) @ self._grad).tocsr()


def _face_geometry(mesh):
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    normal = np.cross(e1, e2)
    double_area = np.linalg.norm(normal, axis=1)
    return normal, double_area


def build_operators(mesh):
    """Assemble :class:`DiscreteOperators` for a manifold triangle mesh.

    Cotangent values are clamped to ``[-1e4, 1e4]`` to survive near-degenerate
    faces; faces whose area falls below ``1e-12 * bbox_diagonal**2`` are an
    error (:class:`DegenerateFaceError` listing the offending faces).
    """
    if mesh.n_faces == 0:
        raise MeshError("mesh has no faces")
    if not mesh.is_edge_manifold():
        raise MeshError("mesh is not edge-manifold (an edge is shared by more than 2 faces)")

    v = mesh.vertices
    f = mesh.faces
    n, m = mesh.n_vertices, mesh.n_faces

    normal, double_area = _face_geometry(mesh)
    area = 0.5 * double_area
    floor = AREA_FLOOR_REL * bbox_diagonal(mesh) ** 2
    bad = np.where(area < floor)[0]
    if bad.size:
        raise DegenerateFaceError(bad)

    # Cotangent stiffness: for the corner opposite each edge, cot(theta) =
    # dot(u, w) / |u x w| with u, w the adjacent edge vectors.
    rows, cols, vals = [], [], []
    for corner in range(3):
        i = f[:, corner]
        j = f[:, (corner + 1) % 3]
        k = f[:, (corner + 2) % 3]
        u = v[j] - v[i]
        w = v[k] - v[i]
        cross_norm = np.linalg.norm(np.cross(u, w), axis=1)
        cot = np.einsum("ij,ij->i", u, w) / np.maximum(cross_norm, 1e-300)
        cot = np.clip(cot, -COT_CLAMP, COT_CLAMP)
        half = 0.5 * cot
        rows += [j, k, j, k]
        cols += [k, j, j, k]
        vals += [-half, -half, half, half]
    W = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    W.sum_duplicates()

    vertex_areas = np.zeros(n)
    np.add.at(vertex_areas, f.ravel(), np.repeat(area / 3.0, 3))

    # Per-face gradient: grad(u) = sum_c u_c * (n_hat x e_c) / (2 area),
    # e_c the edge opposite corner c in winding order.
    n_hat = normal / double_area[:, None]
    grad_rows, grad_cols, grad_vals = [], [], []
    face_ids = np.arange(m)
    for corner in range(3):
        opp_edge = v[f[:, (corner + 2) % 3]] - v[f[:, (corner + 1) % 3]]
        coeff = np.cross(n_hat, opp_edge) / double_area[:, None]  # (m, 3)
        for axis in range(3):
            grad_rows.append(3 * face_ids + axis)
            grad_cols.append(f[:, corner])
            grad_vals.append(coeff[:, axis])
    grad = sparse.csr_matrix(
        (np.concatenate(grad_vals), (np.concatenate(grad_rows), np.concatenate(grad_cols))),
        shape=(3 * m, n),
    )

    return DiscreteOperators(W, vertex_areas, area, grad, n, m)
