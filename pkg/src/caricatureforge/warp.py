"""Local-affine inverse warping of frames into pseudo-ground-truth caricature images.

Shared connectivity between the source and deformed meshes gives a per-triangle
correspondence; each projected triangle pair induces a unique 2D affine map.
Target pixels are filled by inverse-warping through the front-most triangle's
map and sampling the source frame bilinearly. Per-pixel validity records why
a pixel cannot be trusted: source occlusion, newly visible geometry,
degenerate projection, fragile regions (hair, eyelids), or background.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import NEAR_DEFAULT, camera_space, project

DEGENERATE_AREA_PX = 1e-6  # |signed area| floor for projected triangles
DEPTH_TIE_REL = 1e-9

# Validity mask classes (byte values in the mask raster / PNG).
VALID = 0
OCCLUDED_SOURCE = 1
NEWLY_VISIBLE = 2
DEGENERATE = 3
FRAGILE_REGION = 4
BACKGROUND = 5

MASK_CLASSES = {
    "valid": VALID,
    "occluded_source": OCCLUDED_SOURCE,
    "newly_visible": NEWLY_VISIBLE,
    "degenerate": DEGENERATE,
    "fragile_region": FRAGILE_REGION,
    "background": BACKGROUND,
}


class DegenerateTriangleError(ValueError):
    """Source correspondence is collinear below the area floor; no affine map."""


@dataclass(frozen=True)
class AffineMap2D:
    """2D affine map x -> A x + b (pixels)."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.float64).reshape(2, 2))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64).reshape(2))

    def apply(self, points):
        return np.asarray(points, dtype=np.float64) @ self.A.T + self.b


def _signed_area2(tri):
    return (tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1]) - (tri[1, 1] - tri[0, 1]) * (
        tri[2, 0] - tri[0, 0]
    )


def fit_affine(src, dst, area_floor=DEGENERATE_AREA_PX):
    """Unique affine map sending the 3 source points onto the 3 targets.

    Solved from the 6-equation linear system; requires the source triangle's
    |signed area| to clear the degeneracy floor (in px^2).
    """
    src = np.asarray(src, dtype=np.float64).reshape(3, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(3, 2)
    if abs(_signed_area2(src)) / 2.0 < area_floor:
        raise DegenerateTriangleError("source triangle is degenerate (collinear points)")
    M = np.column_stack([src, np.ones(3)])  # rows [x, y, 1]
    sol = np.linalg.solve(M, dst)  # (3, 2): columns are [a_row; b] per output coord
    return AffineMap2D(A=sol[:2].T, b=sol[2])


@dataclass(frozen=True)
class TriangleFlags:
    """Per-triangle visibility classification between two projections."""

    degenerate: np.ndarray      # bad projection in either view (area floor / behind camera)
    backfacing_src: np.ndarray
    backfacing_dst: np.ndarray
    visible_src: np.ndarray     # wins at least one pixel in the source raster
    visible_dst: np.ndarray
    hidden_src: np.ndarray      # back-facing or fully depth-hidden in the source view
    newly_visible: np.ndarray   # wins pixels in dst but contributes none in src
    fragile: np.ndarray

    def __post_init__(self):
        for arr in (
            self.degenerate, self.backfacing_src, self.backfacing_dst,
            self.visible_src, self.visible_dst,
            self.hidden_src, self.newly_visible, self.fragile,
        ):
            arr.flags.writeable = False


@dataclass(frozen=True)
class PseudoGT:
    """Warped caricature frame with per-pixel validity.

    ``image`` is RGBA with alpha 255 exactly on valid pixels; ``validity``
    stores the mask class byte per pixel (see ``MASK_CLASSES``).
    """

    image: np.ndarray
    validity: np.ndarray
    flags: TriangleFlags

    def __post_init__(self):
        self.image.flags.writeable = False
        self.validity.flags.writeable = False


def _face_projected(points, faces):
    return points[faces]  # (m, 3, 2)


def _projected_area2(points, faces):
    tri = _face_projected(points, faces)
    return (tri[:, 1, 0] - tri[:, 0, 0]) * (tri[:, 2, 1] - tri[:, 0, 1]) - (
        tri[:, 1, 1] - tri[:, 0, 1]
    ) * (tri[:, 2, 0] - tri[:, 0, 0])


def _backfacing(mesh, cam):
    pc = camera_space(mesh, cam)
    tri = pc[mesh.faces]
    normal = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    centroid = tri.mean(axis=1)  # view ray from the camera origin
    return np.einsum("ij,ij->i", normal, centroid) > 0


def _projection_degenerate(proj, faces):
    behind = ~proj.in_front[faces].all(axis=1)
    area2 = np.where(behind, 0.0, np.nan_to_num(_projected_area2(proj.points, faces)))
    return behind | (np.abs(area2) / 2.0 < DEGENERATE_AREA_PX)


def rasterize(points, faces, vertex_depth, width, height, face_mask=None):
    """Depth-buffered triangle rasterization.

    Top-left fill convention with pixel centers at half-integer coordinates;
    depth is barycentric-interpolated camera z; ties go to the lower triangle
    index. Returns (triangle-id buffer with -1 background, depth buffer).
    """
    tri_id = np.full((height, width), -1, dtype=np.int64)
    zbuf = np.full((height, width), np.inf)
    tris = points[faces]
    depths = vertex_depth[faces]
    for t in range(len(faces)):
        if face_mask is not None and not face_mask[t]:
            continue
        tri = tris[t]
        if not np.isfinite(tri).all():
            continue
        area2 = _signed_area2(tri)
        if area2 < 0:  # normalize orientation for the inside test
            tri = tri[[0, 2, 1]]
            z = depths[t][[0, 2, 1]]
            area2 = -area2
        else:
            z = depths[t]
        if area2 / 2.0 < DEGENERATE_AREA_PX:
            continue

        x0 = max(int(np.floor(tri[:, 0].min() - 0.5)), 0)
        x1 = min(int(np.ceil(tri[:, 0].max() - 0.5)), width - 1)
        y0 = max(int(np.floor(tri[:, 1].min() - 0.5)), 0)
        y1 = min(int(np.ceil(tri[:, 1].max() - 0.5)), height - 1)
        if x1 < x0 or y1 < y0:
            continue
        px, py = np.meshgrid(
            np.arange(x0, x1 + 1) + 0.5, np.arange(y0, y1 + 1) + 0.5, indexing="xy"
        )

        inside = np.ones(px.shape, dtype=bool)
        edge_vals = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            dx = tri[b, 0] - tri[a, 0]
            dy = tri[b, 1] - tri[a, 1]
            E = dx * (py - tri[a, 1]) - dy * (px - tri[a, 0])
            # Top-left rule: count boundary pixels for top (horizontal,
            # interior below) and left edges only.
            top_left = (dy == 0 and dx > 0) or dy < 0
            inside &= (E > 0) | ((E == 0) & top_left)
            edge_vals.append(E)
        if not inside.any():
            continue

        # Barycentric weights from opposite-edge functions.
        w0 = edge_vals[1] / area2
        w1 = edge_vals[2] / area2
        w2 = edge_vals[0] / area2
        zt = w0 * z[0] + w1 * z[1] + w2 * z[2]

        sub_z = zbuf[y0:y1 + 1, x0:x1 + 1]
        sub_id = tri_id[y0:y1 + 1, x0:x1 + 1]
        better = inside & (zt < sub_z)  # strict: ties keep the lower index
        if better.any():
            sub_z[better] = zt[better]
            sub_id[better] = t
    return tri_id, zbuf


def visibility_mask(src_mesh, dst_mesh, cam, near=NEAR_DEFAULT, fragile_labels=()):
    """Classify triangles by visibility change between the two projections."""
    if not src_mesh.is_compatible(dst_mesh):
        raise ValueError("source and deformed meshes are not compatible")
    faces = src_mesh.faces
    src_proj = project(src_mesh, cam, near)
    dst_proj = project(dst_mesh, cam, near)

    degenerate = _projection_degenerate(src_proj, faces) | _projection_degenerate(dst_proj, faces)
    back_src = _backfacing(src_mesh, cam)
    back_dst = _backfacing(dst_mesh, cam)

    src_ok = ~(degenerate | back_src)
    dst_ok = ~(degenerate | back_dst)
    src_ids, _ = rasterize(src_proj.points, faces, src_proj.depth, cam.width, cam.height, src_ok)
    dst_ids, _ = rasterize(dst_proj.points, faces, dst_proj.depth, cam.width, cam.height, dst_ok)

    visible_src = np.zeros(len(faces), dtype=bool)
    visible_src[np.unique(src_ids[src_ids >= 0])] = True
    visible_dst = np.zeros(len(faces), dtype=bool)
    visible_dst[np.unique(dst_ids[dst_ids >= 0])] = True

    hidden_src = ~degenerate & (back_src | ~visible_src)
    newly_visible = visible_dst & hidden_src

    fragile = np.zeros(len(faces), dtype=bool)
    if fragile_labels:
        marked = np.zeros(src_mesh.n_vertices, dtype=bool)
        for name in fragile_labels:
            if name in src_mesh.labels:
                marked[src_mesh.labels[name]] = True
        fragile = marked[faces].all(axis=1)

    return TriangleFlags(
        degenerate=degenerate,
        backfacing_src=back_src,
        backfacing_dst=back_dst,
        visible_src=visible_src,
        visible_dst=visible_dst,
        hidden_src=hidden_src,
        newly_visible=newly_visible,
        fragile=fragile,
    )


def _bilinear(image_f, x, y):
    """Bilinear sample at continuous pixel coords (centers at half-integers)."""
    h, w = image_f.shape[:2]
    u = x - 0.5
    v = y - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    i0c = np.clip(i0, 0, w - 1)
    i1c = np.clip(i0 + 1, 0, w - 1)
    j0c = np.clip(j0, 0, h - 1)
    j1c = np.clip(j0 + 1, 0, h - 1)
    top = image_f[j0c, i0c] * (1 - fu)[..., None] + image_f[j0c, i1c] * fu[..., None]
    bot = image_f[j1c, i0c] * (1 - fu)[..., None] + image_f[j1c, i1c] * fu[..., None]
    return top * (1 - fv)[..., None] + bot * fv[..., None]


def _as_rgba(image):
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError("image must be 8-bit per channel")
    if image.ndim != 3 or image.shape[2] not in (3, 4):
        raise ValueError("image must be (h, w, 3|4)")
    if image.shape[2] == 3:
        alpha = np.full(image.shape[:2] + (1,), 255, dtype=np.uint8)
        image = np.concatenate([image, alpha], axis=2)
    return image


def warp_frame(image, src_mesh, dst_mesh, cam, fragile_labels=(), near=NEAR_DEFAULT, sampling="bilinear"):
    """Inverse-warp a source frame onto the deformed mesh's projection.

    Every raster pixel is classified (see module constants); valid pixels are
    produced exclusively by inverse-warp sampling of the source frame, and
    invalid pixels carry alpha 0.
    """
    if sampling not in ("bilinear", "nearest"):
        raise ValueError("sampling must be 'bilinear' or 'nearest'")
    image = _as_rgba(image)
    if image.shape[0] != cam.height or image.shape[1] != cam.width:
        raise ValueError("image size does not match the camera raster")
    if not src_mesh.is_compatible(dst_mesh):
        raise ValueError("source and deformed meshes are not compatible")

    faces = src_mesh.faces
    flags = visibility_mask(src_mesh, dst_mesh, cam, near, fragile_labels)
    src_proj = project(src_mesh, cam, near)
    dst_proj = project(dst_mesh, cam, near)

    draw_mask = ~(flags.degenerate | flags.backfacing_dst)
    dst_ids, _ = rasterize(dst_proj.points, faces, dst_proj.depth, cam.width, cam.height, draw_mask)
    src_ok = ~(flags.degenerate | flags.backfacing_src)
    src_ids, src_z = rasterize(src_proj.points, faces, src_proj.depth, cam.width, cam.height, src_ok)

    height, width = cam.height, cam.width
    validity = np.full((height, width), BACKGROUND, dtype=np.uint8)
    out = np.zeros((height, width, 4), dtype=np.uint8)

    covered = dst_ids >= 0
    if covered.any():
        ys, xs = np.nonzero(covered)
        tids = dst_ids[ys, xs]

        validity[ys, xs] = VALID
        tri_class = np.full(len(faces), VALID, dtype=np.uint8)
        tri_class[flags.newly_visible] = NEWLY_VISIBLE
        tri_class[flags.hidden_src & ~flags.newly_visible] = OCCLUDED_SOURCE
        tri_class[flags.fragile] = FRAGILE_REGION
        tri_class[flags.degenerate] = DEGENERATE
        validity[ys, xs] = tri_class[tids]

        pending = validity[ys, xs] == VALID
        if pending.any():
            ys_p, xs_p, tids_p = ys[pending], xs[pending], tids[pending]
            # Inverse maps are fitted dst -> src per participating triangle.
            inv_A = np.zeros((len(faces), 2, 2))
            inv_b = np.zeros((len(faces), 2))
            fit_fail = np.zeros(len(faces), dtype=bool)
            for t in np.unique(tids_p):
                try:
                    m = fit_affine(dst_proj.points[faces[t]], src_proj.points[faces[t]])
                    inv_A[t] = m.A
                    inv_b[t] = m.b
                except DegenerateTriangleError:
                    fit_fail[t] = True

            centers = np.column_stack([xs_p + 0.5, ys_p + 0.5])
            q = np.einsum("nij,nj->ni", inv_A[tids_p], centers) + inv_b[tids_p]

            cls = np.full(len(ys_p), VALID, dtype=np.uint8)
            cls[fit_fail[tids_p]] = DEGENERATE

            # Mask safety: bilinear support must stay inside the source raster.
            in_bounds = (
                (q[:, 0] >= 0.5) & (q[:, 0] <= width - 0.5)
                & (q[:, 1] >= 0.5) & (q[:, 1] <= height - 0.5)
            )
            cls[(cls == VALID) & ~in_bounds] = DEGENERATE

            # Per-pixel source occlusion: another triangle is strictly in
            # front of this one at the sampled source location.
            qx = np.clip(q[:, 0].astype(np.int64), 0, width - 1)
            qy = np.clip(q[:, 1].astype(np.int64), 0, height - 1)
            src_winner = src_ids[qy, qx]
            src_depth = src_z[qy, qx]
            own_z = _interp_depth(src_proj, faces, tids_p, q)
            tol = DEPTH_TIE_REL * max(float(np.nanmax(np.abs(src_proj.depth))), 1.0)
            occluded = (
                (cls == VALID)
                & (src_winner >= 0)
                & (src_winner != tids_p)
                & (src_depth < own_z - tol)
            )
            cls[occluded] = OCCLUDED_SOURCE

            validity[ys_p, xs_p] = cls

            ok = cls == VALID
            if ok.any():
                img_f = image.astype(np.float64)
                if sampling == "bilinear":
                    samples = _bilinear(img_f, q[ok, 0], q[ok, 1])
                else:
                    xi = np.clip(np.floor(q[ok, 0]).astype(np.int64), 0, width - 1)
                    yi = np.clip(np.floor(q[ok, 1]).astype(np.int64), 0, height - 1)
                    samples = img_f[yi, xi]
                rgba = np.clip(np.rint(samples), 0, 255).astype(np.uint8)
                rgba[:, 3] = 255
                out[ys_p[ok], xs_p[ok]] = rgba

    return PseudoGT(image=out, validity=validity, flags=flags)


def _interp_depth(proj, faces, tids, pts):
    """Depth of each triangle's plane (screen-space barycentric) at 2D points."""
    tris = proj.points[faces[tids]]
    zs = proj.depth[faces[tids]]
    v0 = tris[:, 1] - tris[:, 0]
    v1 = tris[:, 2] - tris[:, 0]
    v2 = pts - tris[:, 0]
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    denom = d00 * d11 - d01 * d01
    denom = np.where(np.abs(denom) < 1e-300, 1.0, denom)
    w1 = (d11 * d20 - d01 * d21) / denom
    w2 = (d00 * d21 - d01 * d20) / denom
    w0 = 1.0 - w1 - w2
    return w0 * zs[:, 0] + w1 * zs[:, 1] + w2 * zs[:, 2]


def save_pseudo_gt(gt, image_path, mask_path=None):
    """Write the RGBA frame and, optionally, the single-channel class mask.

    The mask PNG carries a text header documenting the class byte values.
    """
    from PIL import Image
    from PIL.PngImagePlugin import PngInfo

    Image.fromarray(gt.image, mode="RGBA").save(image_path)
    if mask_path is not None:
        info = PngInfo()
        legend = ", ".join(f"{v}={k}" for k, v in MASK_CLASSES.items())
        info.add_text("validity_classes", legend)
        Image.fromarray(gt.validity, mode="L").save(mask_path, pnginfo=info)


def load_image_rgba(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGBA"))
