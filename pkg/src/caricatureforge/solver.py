"""Curvature-weighted Poisson exaggeration with prescribed vertex constraints.

The deformed surface solves ``W x = b`` per coordinate, where ``W`` is the
cotangent stiffness of the input mesh and ``b`` is the area-integrated
divergence of the weight-scaled face gradients of the input positions
(``b = W x`` exactly when the weights are 1). Constraints are handled by
row/column elimination so the reduced system stays SPD and constrained
vertices land on their targets bit-exactly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .curvature import gaussian_curvature
from .mesh import Mesh, MeshError
from .operators import build_operators

RESIDUAL_LIMIT = 1e-8
CG_TOL = 1e-10


class SolverError(RuntimeError):
    """Raised on a singular reduced system or unacceptable residual."""


_counter_lock = threading.Lock()
_solve_count = 0


def solve_count():
    """Number of Poisson solves performed so far in this process.

    Instrumentation for the no-solve-on-blend guarantee: vertex blending and
    mesh payload serving must leave this counter untouched.
    """
    return _solve_count


def _bump_solve_count():
    global _solve_count
    with _counter_lock:
        _solve_count += 1


@dataclass(frozen=True)
class WeightField:
    """Per-vertex positive weights ``w`` at exaggeration level ``gamma``.

    ``exponential``: w = |K|_eps**gamma = exp(gamma * log_K).
    ``secant``: the linear-in-gamma interpolant between gamma=0 and gamma_f,
    w = 1 + (gamma/gamma_f) * (|K|_eps**gamma_f - 1).
    """

    gamma: float
    values: np.ndarray
    variant: str = "exponential"

    def __post_init__(self):
        self.values.flags.writeable = False

    @classmethod
    def exponential(cls, curv, gamma):
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        return cls(gamma=float(gamma), values=np.exp(gamma * curv.log_K), variant="exponential")

    @classmethod
    def secant(cls, curv, gamma, gamma_f):
        if gamma_f <= 0:
            raise ValueError("gamma_f must be positive")
        if not 0 <= gamma <= gamma_f:
            raise ValueError("gamma must lie in [0, gamma_f]")
        alpha = gamma / gamma_f
        values = 1.0 + alpha * (np.exp(gamma_f * curv.log_K) - 1.0)
        return cls(gamma=float(gamma), values=values, variant="secant")

    def face_means(self, faces):
        """Per-face weight: arithmetic mean of the three corner values."""
        return self.values[faces].mean(axis=1)


@dataclass(frozen=True)
class ConstraintSet:
    """Prescribed positions for a set of vertices (rows of the selection)."""

    indices: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        tgt = np.asarray(self.targets, dtype=np.float64).reshape(-1, 3)
        if idx.size == 0:
            raise ValueError("at least one constraint is required (anchoring)")
        if idx.size != len(np.unique(idx)):
            raise ValueError("constraint indices must be unique")
        if len(idx) != len(tgt):
            raise ValueError("indices and targets must have matching length")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "targets", tgt)
        idx.flags.writeable = False
        tgt.flags.writeable = False

    @classmethod
    def pin(cls, mesh, indices):
        """Pin the given vertices to their current positions."""
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size and (idx.min() < 0 or idx.max() >= mesh.n_vertices):
            raise ValueError("constraint index out of range")
        return cls(indices=idx, targets=mesh.vertices[idx])

    @classmethod
    def pin_complement(cls, mesh, region_indices):
        """Pin every vertex outside ``region_indices`` to its current position."""
        region = np.unique(np.asarray(region_indices, dtype=np.int64))
        if region.size == 0:
            raise ValueError("empty region")
        mask = np.ones(mesh.n_vertices, dtype=bool)
        mask[region] = False
        return cls.pin(mesh, np.where(mask)[0])

    def to_dict(self):
        return {"indices": self.indices.tolist(), "targets": self.targets.tolist()}

    @classmethod
    def from_dict(cls, doc):
        return cls(indices=np.asarray(doc["indices"]), targets=np.asarray(doc["targets"]))


@dataclass
class DeformationSolution:
    """Deformed mesh plus solve diagnostics."""

    mesh: Mesh
    gamma: float
    residual_norm: np.ndarray          # per-coordinate relative residual
    constraint_violation: float = 0.0


def default_constraints(mesh):
    """Anchoring for globally exaggerated solves.

    The stiffness matrix is rank-deficient (constants); open meshes pin their
    boundary ring, closed meshes pin the single vertex nearest the centroid.
    """
    boundary = mesh.boundary_vertices()
    if boundary.size:
        return ConstraintSet.pin(mesh, boundary)
    centroid = mesh.vertices.mean(axis=0)
    nearest = int(np.argmin(np.linalg.norm(mesh.vertices - centroid, axis=1)))
    return ConstraintSet.pin(mesh, [nearest])


def assemble_rhs(mesh, ops, weights):
    """Area-integrated divergence of weight-scaled face gradients, shape (n, 3).

    Per-face weights are corner means. With unit weights this equals
    ``W @ positions`` per coordinate channel.
    """
    if len(weights.values) != mesh.n_vertices:
        raise ValueError("weight field does not match mesh vertex count")
    K_w = ops.weighted_stiffness(weights.face_means(mesh.faces))
    return K_w @ mesh.vertices


class FactorCache:
    """Reusable sparse factorizations of reduced stiffness systems.

    The stiffness depends only on the base geometry, never on gamma, so one
    factorization serves every exaggeration level and coordinate channel of
    a given constraint pattern. Thread-safe; factors are read-only once built.
    """

    def __init__(self, ops):
        self.ops = ops
        self._lock = threading.Lock()
        self._factors = {}

    def reduced(self, constrained_idx):
        key = constrained_idx.tobytes()
        with self._lock:
            hit = self._factors.get(key)
        if hit is not None:
            return hit
        n = self.ops.n_vertices
        free = np.setdiff1d(np.arange(n), constrained_idx, assume_unique=False)
        W = self.ops.W.tocsr()
        W_ff = W[free][:, free].tocsc()
        W_fc = W[free][:, constrained_idx].tocsr()
        try:
            lu = spla.splu(W_ff)
            solve = lu.solve
        except RuntimeError:
            solve = None  # singular factorization; callers fall back to CG
        entry = (free, W_ff, W_fc, solve)
        with self._lock:
            self._factors.setdefault(key, entry)
        return entry


def _cg_solve(W_ff, rhs, n_total):
    try:
        x, info = spla.cg(W_ff, rhs, rtol=CG_TOL, maxiter=10 * n_total)
    except TypeError:  # scipy < 1.12 spells it tol
        x, info = spla.cg(W_ff, rhs, tol=CG_TOL, maxiter=10 * n_total)
    return x, info


def solve_poisson(mesh, ops, weights, constraints, cache=None):
    """Solve the weighted Poisson system; each coordinate channel independently.

    Constrained rows are eliminated (knowns substituted into the right-hand
    side), the SPD reduced system is solved by sparse LU with a conjugate
    gradient fallback, and the relative residual must come in under 1e-8.
    """
    if constraints.indices.size and constraints.indices.max() >= mesh.n_vertices:
        raise ValueError("constraint index out of range")
    cache = cache or FactorCache(ops)
    cons = np.sort(constraints.indices)
    order = np.argsort(constraints.indices)
    targets = constraints.targets[order]

    rhs_full = assemble_rhs(mesh, ops, weights)
    free, W_ff, W_fc, direct = cache.reduced(cons)

    out = np.array(mesh.vertices)  # writable copy
    residuals = np.zeros(3)
    _bump_solve_count()
    for c in range(3):
        rhs = rhs_full[free, c] - W_fc @ targets[:, c]
        if free.size == 0:
            continue
        if direct is not None:
            x = direct(rhs)
        else:
            x, info = _cg_solve(W_ff, rhs, mesh.n_vertices)
            if info != 0:
                res = np.linalg.norm(W_ff @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
                raise SolverError(
                    f"singular reduced system: CG fallback did not converge "
                    f"(achieved relative residual {res:.3e})"
                )
        scale = max(float(np.linalg.norm(rhs)), 1e-300)
        residuals[c] = float(np.linalg.norm(W_ff @ x - rhs)) / scale
        out[free, c] = x
    out[cons] = targets  # bit-exact by construction

    if np.any(~np.isfinite(out)):
        raise SolverError("solution contains non-finite values (singular reduced system?)")
    if residuals.max() > RESIDUAL_LIMIT:
        raise SolverError(
            f"solver residual {residuals.max():.3e} exceeds {RESIDUAL_LIMIT:.0e}"
        )

    violation = 0.0
    if cons.size:
        violation = float(np.abs(out[cons] - targets).max())
    return DeformationSolution(
        mesh=mesh.with_vertices(out),
        gamma=weights.gamma,
        residual_norm=residuals,
        constraint_violation=violation,
    )


def caricaturize(
    mesh,
    gamma,
    gamma_f=0.25,
    region=None,
    epsilon=None,
    ops=None,
    curv=None,
    constraints=None,
    cache=None,
):
    """Curvature -> weights(gamma) -> constraints -> Poisson solve, in one call.

    ``region`` selects label names whose vertices may move; everything outside
    is pinned to its original position. Without a region or explicit
    constraints, open meshes pin their boundary ring and closed meshes anchor
    one vertex with a post-hoc centroid re-alignment. ``gamma = 0`` returns
    the input mesh unchanged (exact short-circuit).
    """
    if gamma_f <= 0:
        raise ValueError("gamma_f must be positive")
    if not 0 <= gamma <= gamma_f:
        raise ValueError("gamma must lie in [0, gamma_f]")
    if gamma == 0:
        return DeformationSolution(mesh=mesh, gamma=0.0, residual_norm=np.zeros(3))

    ops = ops or build_operators(mesh)
    curv = curv or gaussian_curvature(mesh, ops, epsilon)
    weights = WeightField.exponential(curv, gamma)

    realign = False
    if region is not None:
        names = [region] if isinstance(region, str) else list(region)
        if not names:
            raise ValueError("empty region")
        missing = [r for r in names if r not in mesh.labels]
        if missing:
            raise MeshError(f"unknown region labels: {missing}")
        idx = np.unique(np.concatenate([mesh.labels[r] for r in names]))
        if idx.size == 0:
            raise ValueError("empty region")
        constraints = ConstraintSet.pin_complement(mesh, idx)
    elif constraints is None:
        constraints = default_constraints(mesh)
        realign = mesh.is_closed()

    solution = solve_poisson(mesh, ops, weights, constraints, cache=cache)
    if realign:
        # Single-anchor closed solves: translate so the centroid is preserved.
        shift = mesh.vertices.mean(axis=0) - solution.mesh.vertices.mean(axis=0)
        moved = solution.mesh.vertices + shift
        solution = DeformationSolution(
            mesh=mesh.with_vertices(moved),
            gamma=solution.gamma,
            residual_norm=solution.residual_norm,
            constraint_violation=float(
                np.abs(moved[constraints.indices] - constraints.targets).max()
            ),
        )
    return solution
