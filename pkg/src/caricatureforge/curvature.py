"""Per-vertex Gaussian curvature via angle deficits, with log-stabilized magnitude."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPSILON_REL = 1e-6
EPSILON_FLOOR = 1e-12


@dataclass(frozen=True)
class CurvatureField:
    """Signed curvature ``K``, stabilized magnitude ``sqrt(K^2 + eps^2)``, and its log."""

    K: np.ndarray
    K_stab: np.ndarray
    log_K: np.ndarray
    epsilon: float

    def __post_init__(self):
        for arr in (self.K, self.K_stab, self.log_K):
            arr.flags.writeable = False


def angle_deficits(mesh):
    """Angle deficit per vertex: 2*pi - angle sum (interior), pi - angle sum (boundary).

    On a closed mesh the deficits sum to ``2*pi*euler_characteristic`` exactly
    (Gauss-Bonnet; combinatorial, before any area division).
    """
    v = mesh.vertices
    f = mesh.faces
    angle_sum = np.zeros(mesh.n_vertices)
    for corner in range(3):
        i = f[:, corner]
        u = v[f[:, (corner + 1) % 3]] - v[i]
        w = v[f[:, (corner + 2) % 3]] - v[i]
        cosang = np.einsum("ij,ij->i", u, w) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1)
        )
        np.add.at(angle_sum, i, np.arccos(np.clip(cosang, -1.0, 1.0)))
    deficit = 2.0 * np.pi - angle_sum
    boundary = mesh.boundary_vertices()
    deficit[boundary] -= np.pi  # geodesic deficit for boundary vertices
    return deficit


def gaussian_curvature(mesh, ops, epsilon=None):
    """Discrete Gaussian curvature: angle deficit over lumped vertex area.

    ``epsilon`` stabilizes the magnitude for the log-weight machinery:
    ``K_stab = sqrt(K^2 + eps^2)``. Default is ``1e-6 * max|K|`` with an
    absolute floor of ``1e-12``.
    """
    K = angle_deficits(mesh) / ops.vertex_areas
    if epsilon is None:
        epsilon = max(EPSILON_REL * float(np.abs(K).max()), EPSILON_FLOOR)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    K_stab = np.sqrt(K * K + epsilon * epsilon)
    return CurvatureField(K=K, K_stab=K_stab, log_K=np.log(K_stab), epsilon=float(epsilon))
