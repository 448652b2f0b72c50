"""Vertex-wise blending between exaggeration endpoints, and its error budget.

``blend`` replaces a per-level Poisson solve by linear interpolation between
the undeformed surface and the precomputed target. The interpolant solves the
same Poisson problem with the weight exponential replaced by its secant, so
the deviation from the exact solve is controlled by the secant remainder:
``measure_blend_error`` measures it against exact solves, ``evaluate_bound``
evaluates the closed-form budget, and ``secant_weight_gap`` exposes the
pointwise weight error that drives both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .mesh import Mesh, bbox_diagonal
from .solver import FactorCache, WeightField, default_constraints, solve_poisson


@dataclass(frozen=True)
class BlendPair:
    """Endpoint meshes of the blend family (shared connectivity required)."""

    base: Mesh
    target: Mesh
    gamma_f: float

    def __post_init__(self):
        if self.gamma_f <= 0:
            raise ValueError("gamma_f must be positive")
        if not self.base.is_compatible(self.target):
            raise ValueError("base and target meshes are not compatible (face lists differ)")


def blend(pair, gamma):
    """Per-vertex linear interpolation at level ``gamma``; no linear solve.

    Exact at the endpoints: ``gamma = 0`` returns the base positions bitwise,
    ``gamma = gamma_f`` the target positions.
    """
    if not 0 <= gamma <= pair.gamma_f:
        raise ValueError("gamma must lie in [0, gamma_f]")
    alpha = gamma / pair.gamma_f
    if alpha == 0.0:
        return pair.base
    if alpha == 1.0:
        return pair.target
    vertices = (1.0 - alpha) * pair.base.vertices + alpha * pair.target.vertices
    return pair.base.with_vertices(vertices)


def secant_weight_gap(curv, gamma, gamma_f):
    """Pointwise ``w_sec - w`` at level ``gamma``; returns (per-vertex gap, max).

    Nonnegative everywhere by convexity of ``gamma -> exp(gamma * log|K|)``,
    zero at both endpoints.
    """
    if gamma_f <= 0:
        raise ValueError("gamma_f must be positive")
    if not 0 <= gamma <= gamma_f:
        raise ValueError("gamma must lie in [0, gamma_f]")
    w = np.exp(gamma * curv.log_K)
    w_sec = 1.0 + (gamma / gamma_f) * (np.exp(gamma_f * curv.log_K) - 1.0)
    gap = w_sec - w
    return gap, float(gap.max())


def secant_gap_bound(curv, gamma, gamma_f):
    """Interpolation-remainder budget per vertex: gap <= g(gf-g)/2 * L^2 * max(1, e^{gf L})."""
    L = curv.log_K
    return 0.5 * gamma * (gamma_f - gamma) * L * L * np.maximum(1.0, np.exp(gamma_f * L))


@dataclass(frozen=True)
class BlendReport:
    """Measured blend-vs-exact residuals over a gamma grid.

    Both error norms are normalized by the bounding-box diagonal of the base
    mesh: ``err_linf`` is the max per-vertex Euclidean distance, ``err_l2``
    the vertex-area-weighted L2 distance.
    """

    gamma_f: float
    gammas: np.ndarray
    err_linf: np.ndarray
    err_l2: np.ndarray
    argmax_gamma: float


@dataclass(frozen=True)
class BoundEstimate:
    """Closed-form residual budget over a gamma grid.

    ``bound(g) = C_P * log_K_inf**2 * exp(max(0, gamma_f*log_K_inf)) * g*(gamma_f-g) * grad_energy``
    with ``K_inf`` the max stabilized curvature magnitude and ``grad_energy``
    the face-area-weighted norm of the base-surface gradients. Zero at the
    endpoints and symmetric about ``gamma_f / 2``.
    """

    gamma_f: float
    K_inf: float
    log_K_inf: float
    C_P: float
    grad_energy: float
    gammas: np.ndarray
    bound: np.ndarray

    def at(self, gamma):
        return (
            self.C_P
            * self.log_K_inf**2
            * np.exp(max(0.0, self.gamma_f * self.log_K_inf))
            * gamma
            * (self.gamma_f - gamma)
            * self.grad_energy
        )


def default_grid(gamma_f, samples=11):
    if samples < 2:
        raise ValueError("need at least 2 grid samples")
    return np.linspace(0.0, gamma_f, samples)


def _check_grid(grid, gamma_f):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < 2 or grid.min() < 0 or grid.max() > gamma_f:
        raise ValueError("grid must lie within [0, gamma_f]")
    if grid[0] != 0.0 or grid[-1] != gamma_f:
        raise ValueError("grid must include both endpoints")
    return grid


def grad_energy(ops, mesh):
    """Face-area-weighted gradient norm of the positions, all channels pooled."""
    total = 0.0
    for c in range(3):
        g = ops.gradient(mesh.vertices[:, c])
        total += float(np.sum(ops.face_areas * np.einsum("ij,ij->i", g, g)))
    return float(np.sqrt(total))


def measure_blend_error(mesh, ops, curv, gamma_f, grid=None, constraints=None, cache=None):
    """Solve the exact Poisson problem per grid level and compare to the blend.

    All levels share one factorization of the reduced stiffness. Endpoint
    residuals are exactly zero because the blend reproduces the endpoint
    solves bitwise.
    """
    grid = _check_grid(default_grid(gamma_f) if grid is None else grid, gamma_f)
    constraints = constraints or default_constraints(mesh)
    cache = cache or FactorCache(ops)

    solved = []
    for g in grid:
        w = WeightField.exponential(curv, g)
        solved.append(solve_poisson(mesh, ops, w, constraints, cache=cache).mesh.vertices)

    v0, vf = solved[0], solved[-1]
    diag = bbox_diagonal(mesh)
    areas = ops.vertex_areas
    err_linf = np.zeros(len(grid))
    err_l2 = np.zeros(len(grid))
    for i, g in enumerate(grid):
        alpha = g / gamma_f
        blended = v0 if alpha == 0.0 else (vf if alpha == 1.0 else (1 - alpha) * v0 + alpha * vf)
        delta = blended - solved[i]
        dist_sq = np.einsum("ij,ij->i", delta, delta)
        err_linf[i] = np.sqrt(dist_sq.max()) / diag
        err_l2[i] = np.sqrt(float(areas @ dist_sq)) / diag
    return BlendReport(
        gamma_f=float(gamma_f),
        gammas=grid,
        err_linf=err_linf,
        err_l2=err_l2,
        argmax_gamma=float(grid[int(np.argmax(err_linf))]),
    )


def evaluate_bound(curv, ops, base, gamma_f, C_P=1.0, grid=None):
    """Evaluate the theoretical residual budget on a gamma grid."""
    if C_P <= 0:
        raise ValueError("C_P must be positive")
    grid = _check_grid(default_grid(gamma_f) if grid is None else grid, gamma_f)
    K_inf = float(curv.K_stab.max())
    log_K_inf = float(np.log(K_inf))
    energy = grad_energy(ops, base)
    prefactor = C_P * log_K_inf**2 * np.exp(max(0.0, gamma_f * log_K_inf)) * energy
    return BoundEstimate(
        gamma_f=float(gamma_f),
        K_inf=K_inf,
        log_K_inf=log_K_inf,
        C_P=float(C_P),
        grad_energy=energy,
        gammas=grid,
        bound=prefactor * grid * (gamma_f - grid),
    )


def estimate_poincare(ops, constraints=None):
    """Poincare constant from the smallest nonzero generalized eigenvalue of (W, A).

    With constraints, the eigenproblem is restricted to the free vertices,
    which matches the homogeneous boundary data of the blend residual field.
    Uses ARPACK shift-invert (inverse iteration) around zero.
    """
    W = ops.W.tocsc()
    A = np.asarray(ops.vertex_areas)
    if constraints is not None:
        free = np.setdiff1d(np.arange(ops.n_vertices), constraints.indices)
        W = W[free][:, free]
        A = A[free]
    M = sparse.diags(A).tocsc()
    # Without constraints the constant null space is present; ask for one
    # extra pair and drop eigenvalues at numerical zero.
    k = 1 if constraints is not None else 2
    vals = spla.eigsh(W, k=k, M=M, sigma=0.0, which="LM", return_eigenvectors=False)
    vals = np.sort(vals)
    floor = 1e-10 * max(abs(vals).max(), 1.0)
    nonzero = vals[vals > floor]
    if nonzero.size == 0:
        raise RuntimeError("no nonzero eigenvalue found; system too constrained or singular")
    return float(1.0 / np.sqrt(nonzero[0]))


def error_curve_report(mesh, ops, curv, gamma_f, samples=11, constraints=None, cache=None, calibrate=False):
    """Measured curve + bound in the wire/report JSON schema."""
    grid = default_grid(gamma_f, samples)
    constraints = constraints or default_constraints(mesh)
    report = measure_blend_error(mesh, ops, curv, gamma_f, grid, constraints, cache)
    C_P = estimate_poincare(ops, constraints) if calibrate else 1.0
    bound = evaluate_bound(curv, ops, mesh, gamma_f, C_P=C_P, grid=grid)
    return {
        "gamma_f": report.gamma_f,
        "gammas": report.gammas.tolist(),
        "err_linf": report.err_linf.tolist(),
        "err_l2": report.err_l2.tolist(),
        "bound": bound.bound.tolist(),
        "C_P": bound.C_P,
        "K_inf": bound.K_inf,
    }
