"""Pinhole camera model and mesh projection."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NEAR_DEFAULT = 1e-9


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: 3x3 intrinsics (pixels), 3x4 world-to-camera transform."""

    intrinsics: np.ndarray
    extrinsics: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        K = np.asarray(self.intrinsics, dtype=np.float64).reshape(3, 3)
        E = np.asarray(self.extrinsics, dtype=np.float64).reshape(3, 4)
        scale = max(abs(K).max(), 1.0)
        if abs(K[1, 0]) > 1e-12 * scale or abs(K[2, 0]) > 1e-12 * scale or abs(K[2, 1]) > 1e-12 * scale:
            raise ValueError("intrinsics must be upper-triangular")
        if K[0, 0] <= 0 or K[1, 1] <= 0:
            raise ValueError("focal entries must be positive")
        R = E[:, :3]
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-8:
            raise ValueError("extrinsic rotation block is not orthonormal (1e-8)")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        object.__setattr__(self, "intrinsics", K)
        object.__setattr__(self, "extrinsics", E)
        K.flags.writeable = False
        E.flags.writeable = False

    def to_dict(self):
        return {
            "intrinsics": self.intrinsics.tolist(),
            "extrinsics": self.extrinsics.tolist(),
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            intrinsics=np.asarray(doc["intrinsics"]),
            extrinsics=np.asarray(doc["extrinsics"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
        )

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Projection:
    """Per-vertex image-plane points, camera-space depth, and in-front flags.

    Points outside the raster are kept; vertices at or behind the near plane
    are flagged so their triangles can be marked degenerate.
    """

    points: np.ndarray   # (n, 2) pixel coordinates
    depth: np.ndarray    # (n,) camera-space z
    in_front: np.ndarray  # (n,) bool, depth > near

    def __post_init__(self):
        for arr in (self.points, self.depth, self.in_front):
            arr.flags.writeable = False


def camera_space(mesh, cam):
    """World vertices mapped into camera coordinates."""
    R = cam.extrinsics[:, :3]
    t = cam.extrinsics[:, 3]
    return mesh.vertices @ R.T + t


def project(mesh, cam, near=NEAR_DEFAULT):
    """Pinhole projection of every vertex; depth is camera-space z."""
    pc = camera_space(mesh, cam)
    z = pc[:, 2]
    in_front = z > near
    safe_z = np.where(in_front, z, 1.0)
    K = cam.intrinsics
    u = (K[0, 0] * pc[:, 0] + K[0, 1] * pc[:, 1]) / safe_z + K[0, 2]
    v = K[1, 1] * pc[:, 1] / safe_z + K[1, 2]
    pts = np.column_stack([u, v])
    pts[~in_front] = np.nan
    return Projection(points=pts, depth=z.copy(), in_front=in_front)
