"""caricatureforge: curvature-weighted mesh exaggeration with bounded blending.

Pipeline pieces:

* :mod:`~caricatureforge.mesh` / :mod:`~caricatureforge.operators` /
  :mod:`~caricatureforge.curvature` - triangle meshes, cotangent stiffness,
  lumped areas, angle-deficit Gaussian curvature.
* :mod:`~caricatureforge.solver` - the weighted Poisson exaggeration with
  exact vertex constraints and factor reuse.
* :mod:`~caricatureforge.blend` - linear blending between endpoints with a
  measured and theoretically bounded residual.
* :mod:`~caricatureforge.warp` - local-affine pseudo-ground-truth warping
  with per-pixel validity masks.
* :mod:`~caricatureforge.service` - session HTTP API for the studio.
"""

from .blend import (
    BlendPair,
    BlendReport,
    BoundEstimate,
    blend,
    error_curve_report,
    estimate_poincare,
    evaluate_bound,
    measure_blend_error,
    secant_gap_bound,
    secant_weight_gap,
)
from .camera import CameraModel, Projection, project
from .curvature import CurvatureField, angle_deficits, gaussian_curvature
from .mesh import Mesh, MeshError, bbox_diagonal, load_labels, load_mesh, save_mesh
from .operators import DegenerateFaceError, DiscreteOperators, build_operators
from .shapes import bumpy_sphere, face_patch, grid_patch, icosphere, torus
from .solver import (
    ConstraintSet,
    DeformationSolution,
    FactorCache,
    SolverError,
    WeightField,
    assemble_rhs,
    caricaturize,
    default_constraints,
    solve_count,
    solve_poisson,
)
from .warp import (
    AffineMap2D,
    DegenerateTriangleError,
    MASK_CLASSES,
    PseudoGT,
    TriangleFlags,
    fit_affine,
    rasterize,
    visibility_mask,
    warp_frame,
)

__version__ = "0.1.0"
