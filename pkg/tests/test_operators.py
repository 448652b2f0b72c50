import numpy as np
import pytest

from caricatureforge import DegenerateFaceError, Mesh, build_operators, icosphere
from caricatureforge.shapes import grid_patch


def brute_force_gradients(mesh, u):
    """Per-face gradients from explicit hat-function geometry (loop oracle)."""
    grads = np.zeros((mesh.n_faces, 3))
    for t, (i, j, k) in enumerate(mesh.faces):
        pi, pj, pk = mesh.vertices[[i, j, k]]
        n = np.cross(pj - pi, pk - pi)
        a2 = np.linalg.norm(n)
        n_hat = n / a2
        g = (
            u[i] * np.cross(n_hat, pk - pj)
            + u[j] * np.cross(n_hat, pi - pk)
            + u[k] * np.cross(n_hat, pj - pi)
        ) / a2
        grads[t] = g
    return grads


def test_constant_in_null_space(sphere_162, sphere_ops):
    c = 3.7 * np.ones(sphere_162.n_vertices)
    norm = abs(sphere_ops.W).max()
    assert np.abs(sphere_ops.W @ c).max() < 1e-12 * norm


def test_symmetry(sphere_ops):
    diff = sphere_ops.W - sphere_ops.W.T
    assert abs(diff).max() == 0.0


def test_unit_square_interior_edge_weight():
    # Unit square split along the diagonal: the two angles opposite the
    # interior edge are the right angles, so its cotangent weight is
    # (cot90 + cot90)/2 = 0; a boundary leg sees a single 45-degree angle,
    # weight cot(45)/2 = 1/2. Off-diagonals are negated in the stiffness
    # convention (u^T W v equals the gradient inner product).
    mesh = Mesh(
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
        [[0, 1, 2], [0, 2, 3]],
    )
    W = build_operators(mesh).W.toarray()
    assert W[0, 2] == pytest.approx(0.0, abs=1e-14)
    assert W[0, 1] == pytest.approx(-0.5, abs=1e-14)


def test_shared_leg_edge_weight_is_one():
    # Two right isoceles triangles sharing a leg: both opposite angles are
    # 45 degrees, so the edge weight is (cot45 + cot45)/2 = 1.
    mesh = Mesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0]],
        [[0, 1, 2], [0, 3, 1]],
    )
    W = build_operators(mesh).W.toarray()
    assert W[0, 1] == pytest.approx(-1.0, abs=1e-14)
    assert W[1, 0] == pytest.approx(-1.0, abs=1e-14)


def test_gradient_matches_brute_force(sphere_162, sphere_ops, rng):
    u = rng.standard_normal(sphere_162.n_vertices)
    expected = brute_force_gradients(sphere_162, u)
    got = sphere_ops.gradient(u)
    assert np.abs(got - expected).max() < 1e-12 * max(1.0, np.abs(expected).max())


def test_gradient_adjoint_identity(sphere_162, sphere_ops, rng):
    # <grad u, grad v> under face areas == u^T W v: this identity defines
    # correct stiffness/divergence assembly.
    for _ in range(100):
        u = rng.standard_normal(sphere_162.n_vertices)
        v = rng.standard_normal(sphere_162.n_vertices)
        gu = sphere_ops.gradient(u)
        gv = sphere_ops.gradient(v)
        lhs = float(np.sum(sphere_ops.face_areas * np.einsum("ij,ij->i", gu, gv)))
        rhs = float(u @ (sphere_ops.W @ v))
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))


def test_divergence_is_adjoint(sphere_162, sphere_ops, rng):
    # sum_f area_f <F, grad v> == sum_v A_v div(F)_v v_v for arbitrary F, v.
    F = rng.standard_normal((sphere_162.n_faces, 3))
    v = rng.standard_normal(sphere_162.n_vertices)
    lhs = float(np.sum(sphere_ops.face_areas * np.einsum("ij,ij->i", F, sphere_ops.gradient(v))))
    rhs = float(np.sum(sphere_ops.vertex_areas * sphere_ops.divergence(F) * v))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_integrated_divergence_of_gradient_is_stiffness(sphere_162, sphere_ops, rng):
    u = rng.standard_normal(sphere_162.n_vertices)
    lhs = sphere_ops.integrated_divergence(sphere_ops.gradient(u))
    rhs = sphere_ops.W @ u
    assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, np.abs(rhs).max())


def test_lumped_area_positive_and_total(sphere_2562):
    ops = build_operators(sphere_2562)
    assert ops.vertex_areas.min() > 0
    assert ops.vertex_areas.sum() == pytest.approx(ops.face_areas.sum(), rel=1e-12)
    # inscribed icosphere area approaches the sphere's 4*pi
    assert ops.vertex_areas.sum() == pytest.approx(4 * np.pi, rel=0.02)


def test_translation_invariance_and_scale_covariance(sphere_162, sphere_ops):
    moved = sphere_162.with_vertices(sphere_162.vertices + np.array([1.0, -2.0, 0.5]))
    ops_moved = build_operators(moved)
    assert abs(ops_moved.W - sphere_ops.W).max() < 1e-9

    s = 3.0
    scaled = sphere_162.with_vertices(sphere_162.vertices * s)
    ops_scaled = build_operators(scaled)
    # W is scale-invariant, areas scale by s^2
    assert abs(ops_scaled.W - sphere_ops.W).max() < 1e-10 * abs(sphere_ops.W).max()
    assert np.allclose(ops_scaled.vertex_areas, sphere_ops.vertex_areas * s * s, rtol=1e-12)


def test_degenerate_face_error():
    mesh = Mesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0]],  # vertex 3 on the diagonal
        [[0, 1, 2], [1, 2, 3]],
    )
    with pytest.raises(DegenerateFaceError) as exc:
        build_operators(mesh)
    assert 1 in exc.value.face_indices


def test_nonmanifold_rejected():
    # three faces sharing one edge
    mesh = Mesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, -1, 0]],
        [[0, 1, 2], [0, 1, 3], [0, 1, 4]],
    )
    with pytest.raises(Exception, match="manifold"):
        build_operators(mesh)


def test_grid_patch_gradient_of_linear_field():
    # gradient of a linear function on a planar mesh is exact
    patch = grid_patch(6, 6)
    ops = build_operators(patch)
    u = 2.0 * patch.vertices[:, 0] - 3.0 * patch.vertices[:, 1] + 0.25
    g = ops.gradient(u)
    assert np.allclose(g, [2.0, -3.0, 0.0], atol=1e-12)
