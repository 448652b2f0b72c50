import warnings

import numpy as np
import pytest

from caricatureforge import (
    ConstraintSet,
    FactorCache,
    Mesh,
    WeightField,
    assemble_rhs,
    bbox_diagonal,
    build_operators,
    caricaturize,
    default_constraints,
    gaussian_curvature,
    icosphere,
    solve_poisson,
)

def uniform_weights(mesh, value=1.0, gamma=0.0):
    return WeightField(gamma=gamma, values=np.full(mesh.n_vertices, float(value)))


def brute_force_rhs(mesh, w_vertex):
    """Dense per-face loop: integrated divergence of weighted position gradients."""
    out = np.zeros((mesh.n_vertices, 3))
    for (i, j, k) in mesh.faces:
        pi, pj, pk = mesh.vertices[[i, j, k]]
        n = np.cross(pj - pi, pk - pi)
        a2 = np.linalg.norm(n)
        area = 0.5 * a2
        n_hat = n / a2
        gi = np.cross(n_hat, pk - pj) / a2
        gj = np.cross(n_hat, pi - pk) / a2
        gk = np.cross(n_hat, pj - pi) / a2
        w_face = (w_vertex[i] + w_vertex[j] + w_vertex[k]) / 3.0
        for c in range(3):
            g = gi * pi[c] + gj * pj[c] + gk * pk[c]
            out[i, c] += area * w_face * np.dot(gi, g)
            out[j, c] += area * w_face * np.dot(gj, g)
            out[k, c] += area * w_face * np.dot(gk, g)
    return out


def test_rhs_unit_weights_is_stiffness_times_positions(sphere_162, sphere_ops):
    b = assemble_rhs(sphere_162, sphere_ops, uniform_weights(sphere_162))
    expected = sphere_ops.W @ sphere_162.vertices
    scale = np.abs(expected).max()
    assert np.abs(b - expected).max() < 1e-10 * scale


def test_rhs_linearity_in_constant_weight(sphere_162, sphere_ops):
    c = 2.5
    b1 = assemble_rhs(sphere_162, sphere_ops, uniform_weights(sphere_162))
    bc = assemble_rhs(sphere_162, sphere_ops, uniform_weights(sphere_162, c))
    assert np.allclose(bc, c * b1, rtol=1e-12, atol=1e-14)


def test_rhs_matches_brute_force_oracle(sphere_162, sphere_ops, rng):
    w = np.exp(rng.standard_normal(sphere_162.n_vertices) * 0.5)
    field = WeightField(gamma=0.1, values=w)
    b = assemble_rhs(sphere_162, sphere_ops, field)
    expected = brute_force_rhs(sphere_162, w)
    assert np.abs(b - expected).max() < 1e-10 * np.abs(expected).max()


def test_identity_solve_reproduces_positions(sphere_162, sphere_ops):
    cons = ConstraintSet.pin(sphere_162, [0])
    sol = solve_poisson(sphere_162, sphere_ops, uniform_weights(sphere_162), cons)
    tol = 1e-8 * bbox_diagonal(sphere_162)
    assert np.abs(sol.mesh.vertices - sphere_162.vertices).max() < tol
    assert sol.residual_norm.max() < 1e-8


def test_identity_solve_open_mesh(face_small):
    ops = build_operators(face_small)
    cons = default_constraints(face_small)
    sol = solve_poisson(face_small, ops, uniform_weights(face_small), cons)
    assert np.abs(sol.mesh.vertices - face_small.vertices).max() < 1e-8 * bbox_diagonal(face_small)


def test_constant_weight_scales_distances(sphere_162, sphere_ops, rng):
    # Doubling the weights doubles the solved Laplacian, so the solution is
    # the input scaled by 2 up to a constant offset fixed by the anchor.
    cons = ConstraintSet.pin(sphere_162, [7])
    sol = solve_poisson(sphere_162, sphere_ops, uniform_weights(sphere_162, 2.0), cons)
    idx = rng.integers(0, sphere_162.n_vertices, size=(50, 2))
    d_in = np.linalg.norm(
        sphere_162.vertices[idx[:, 0]] - sphere_162.vertices[idx[:, 1]], axis=1
    )
    d_out = np.linalg.norm(
        sol.mesh.vertices[idx[:, 0]] - sol.mesh.vertices[idx[:, 1]], axis=1
    )
    keep = d_in > 1e-12
    assert np.allclose(d_out[keep], 2.0 * d_in[keep], rtol=1e-6)


def test_dense_oracle_equivalence(rng):
    mesh = icosphere(1)  # 42 vertices
    ops = build_operators(mesh)
    cache = FactorCache(ops)
    W = ops.W.toarray()
    for trial in range(20):
        w = np.exp(rng.standard_normal(mesh.n_vertices) * 0.7)
        field = WeightField(gamma=0.2, values=w)
        n_cons = int(rng.integers(1, 6))
        idx = rng.choice(mesh.n_vertices, size=n_cons, replace=False)
        targets = mesh.vertices[idx] + 0.1 * rng.standard_normal((n_cons, 3))
        cons = ConstraintSet(indices=idx, targets=targets)

        sparse_sol = solve_poisson(mesh, ops, field, cons, cache=cache)

        # independent dense direct solve of the same reduced system
        order = np.argsort(idx)
        cons_sorted = np.sort(idx)
        tgt = targets[order]
        free = np.setdiff1d(np.arange(mesh.n_vertices), cons_sorted)
        rhs_full = brute_force_rhs(mesh, w)
        dense = np.array(mesh.vertices)
        for c in range(3):
            rhs = rhs_full[free, c] - W[np.ix_(free, cons_sorted)] @ tgt[:, c]
            dense[free, c] = np.linalg.solve(W[np.ix_(free, free)], rhs)
        dense[cons_sorted] = tgt

        scale = np.abs(dense).max()
        assert np.abs(sparse_sol.mesh.vertices - dense).max() < 1e-9 * scale


def test_constraint_exactness_bitwise(face_small):
    ops = build_operators(face_small)
    curv = gaussian_curvature(face_small, ops)
    sol = caricaturize(face_small, 0.25, region=["nose"], ops=ops, curv=curv)
    nose = face_small.labels["nose"]
    pinned = np.setdiff1d(np.arange(face_small.n_vertices), nose)
    assert np.array_equal(sol.mesh.vertices[pinned], face_small.vertices[pinned])
    assert sol.constraint_violation == 0.0
    # the region itself must actually move
    assert np.abs(sol.mesh.vertices[nose] - face_small.vertices[nose]).max() > 1e-6


def test_constraints_validation(sphere_162):
    with pytest.raises(ValueError, match="at least one"):
        ConstraintSet(indices=np.array([], dtype=int), targets=np.zeros((0, 3)))
    with pytest.raises(ValueError, match="unique"):
        ConstraintSet(indices=[0, 0], targets=[[0, 0, 0], [1, 1, 1]])
    with pytest.raises(ValueError, match="matching"):
        ConstraintSet(indices=[0, 1], targets=[[0, 0, 0]])


def test_gamma_zero_short_circuit(face_small):
    sol = caricaturize(face_small, 0.0)
    assert sol.mesh.vertices is face_small.vertices
    assert sol.gamma == 0.0


def test_gamma_range_validation(face_small):
    with pytest.raises(ValueError):
        caricaturize(face_small, 0.3, gamma_f=0.25)
    with pytest.raises(ValueError):
        caricaturize(face_small, -0.1)
    with pytest.raises(ValueError):
        caricaturize(face_small, 0.1, gamma_f=0.0)


def test_unknown_region_rejected(face_small):
    with pytest.raises(Exception, match="unknown region"):
        caricaturize(face_small, 0.25, region=["chin"])


def test_high_curvature_regions_displace_more(face_5k):
    sol = caricaturize(face_5k, 0.25)
    disp = np.linalg.norm(sol.mesh.vertices - face_5k.vertices, axis=1)
    nose = disp[face_5k.labels["nose"]]
    cheek = disp[face_5k.labels["cheek"]]
    assert nose.mean() > cheek.mean()
    assert nose.max() > cheek.max()


def test_determinism(sphere_162, sphere_ops, rng):
    w = np.exp(rng.standard_normal(sphere_162.n_vertices) * 0.3)
    field = WeightField(gamma=0.1, values=w)
    cons = ConstraintSet.pin(sphere_162, [3])
    a = solve_poisson(sphere_162, sphere_ops, field, cons)
    b = solve_poisson(sphere_162, sphere_ops, field, cons)
    assert np.array_equal(a.mesh.vertices, b.mesh.vertices)


def test_factor_cache_reused_across_gammas(face_small):
    ops = build_operators(face_small)
    curv = gaussian_curvature(face_small, ops)
    cache = FactorCache(ops)
    cons = default_constraints(face_small)
    key = np.sort(cons.indices).tobytes()
    for g in (0.05, 0.15, 0.25):
        w = WeightField.exponential(curv, g)
        solve_poisson(face_small, ops, w, cons, cache=cache)
    assert list(cache._factors) == [key]


def test_monotone_exaggeration_trend(face_small):
    # Soft check: figures suggest the max displacement grows with gamma, but
    # the property is not claimed; warn instead of failing on violations.
    ops = build_operators(face_small)
    curv = gaussian_curvature(face_small, ops)
    cache = FactorCache(ops)
    gammas = np.arange(0.0, 0.2501, 0.05)
    disp = []
    for g in gammas:
        sol = caricaturize(face_small, g, ops=ops, curv=curv, cache=cache)
        disp.append(float(np.linalg.norm(sol.mesh.vertices - face_small.vertices, axis=1).max()))
    drops = [i for i in range(1, len(disp)) if disp[i] < disp[i - 1] - 1e-12]
    if drops:
        warnings.warn(f"max displacement not monotone in gamma at indices {drops}: {disp}")


def test_closed_mesh_centroid_realignment(sphere_162):
    sol = caricaturize(sphere_162, 0.25)
    assert np.allclose(
        sol.mesh.vertices.mean(axis=0), sphere_162.vertices.mean(axis=0), atol=1e-12
    )


def test_weightfield_variants(sphere_curv):
    exp = WeightField.exponential(sphere_curv, 0.25)
    assert np.allclose(exp.values, sphere_curv.K_stab**0.25, rtol=1e-12)
    assert exp.values.min() > 0
    sec = WeightField.secant(sphere_curv, 0.125, 0.25)
    expected = 1.0 + 0.5 * (sphere_curv.K_stab**0.25 - 1.0)
    assert np.allclose(sec.values, expected, rtol=1e-12)


def test_localized_solve_blends_into_pinned_region(face_small):
    # the free region deforms, pinned complement does not, and the seam stays attached
    sol = caricaturize(face_small, 0.25, region=["nose", "brow"])
    moved = np.linalg.norm(sol.mesh.vertices - face_small.vertices, axis=1)
    region = np.union1d(face_small.labels["nose"], face_small.labels["brow"])
    outside = np.setdiff1d(np.arange(face_small.n_vertices), region)
    assert moved[outside].max() == 0.0
    assert moved[region].max() > 0.0
