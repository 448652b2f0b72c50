"""forge: batch CLI for exaggeration, blending, error curves, warping, serving."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .blend import BlendPair, blend, error_curve_report
from .curvature import gaussian_curvature
from .mesh import MeshError, load_mesh, save_mesh
from .operators import build_operators
from .solver import ConstraintSet, SolverError, caricaturize
from .camera import CameraModel


def _env(name, default):
    return os.environ.get(f"FORGE_{name}", default)


def cmd_deform(args):
    mesh = load_mesh(args.mesh, labels_path=args.labels)
    constraints = None
    if args.constraints:
        with open(args.constraints, "r", encoding="utf-8") as fh:
            constraints = ConstraintSet.from_dict(json.load(fh))
    region = args.region.split(",") if args.region else None
    solution = caricaturize(
        mesh,
        args.gamma,
        args.gamma_f,
        region=region,
        epsilon=args.epsilon,
        constraints=constraints,
    )
    save_mesh(args.out, solution.mesh)
    print(
        f"deformed {mesh.n_vertices} vertices at gamma={args.gamma:g} "
        f"(residual {solution.residual_norm.max():.3e}) -> {args.out}"
    )


def cmd_blend(args):
    base = load_mesh(args.base)
    target = load_mesh(args.target)
    pair = BlendPair(base=base, target=target, gamma_f=args.gamma_f)
    save_mesh(args.out, blend(pair, args.gamma))
    print(f"blended at gamma={args.gamma:g}/{args.gamma_f:g} -> {args.out}")


def cmd_error_curve(args):
    mesh = load_mesh(args.mesh, labels_path=args.labels)
    ops = build_operators(mesh)
    curv = gaussian_curvature(mesh, ops, args.epsilon)
    report = error_curve_report(
        mesh, ops, curv, args.gamma_f, samples=args.samples, calibrate=args.calibrate
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    peak = max(report["err_linf"])
    print(f"error curve over {args.samples} samples: peak Linf {peak:.3e} -> {args.out}")


def cmd_warp(args):
    from .warp import load_image_rgba, save_pseudo_gt, warp_frame

    image = load_image_rgba(args.image)
    src = load_mesh(args.src, labels_path=args.labels)
    dst = load_mesh(args.dst)
    cam = CameraModel.load(args.camera)
    fragile = args.fragile.split(",") if args.fragile else ()
    gt = warp_frame(
        image, src, dst, cam,
        fragile_labels=fragile,
        sampling="nearest" if args.nearest else "bilinear",
    )
    save_pseudo_gt(gt, args.out, args.mask)
    valid = int((gt.validity == 0).sum())
    print(f"warped frame: {valid} valid pixels of {gt.validity.size} -> {args.out}")


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(snapshot_dir=args.snapshot_dir, vertex_cap=args.vertex_cap)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


def build_parser():
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deform", help="solve the curvature-weighted exaggeration")
    p.add_argument("--mesh", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--gamma-f", type=float, default=0.25)
    p.add_argument("--region", help="comma-separated region labels to exaggerate")
    p.add_argument("--constraints", help="JSON {indices: [...], targets: [[x,y,z],...]}")
    p.add_argument("--labels", help="region label sidecar JSON")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_deform)

    p = sub.add_parser("blend", help="vertex-wise blend between endpoint meshes")
    p.add_argument("--base", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--gamma-f", type=float, default=0.25)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_blend)

    p = sub.add_parser("error-curve", help="measured blend error and theoretical bound")
    p.add_argument("--mesh", required=True)
    p.add_argument("--gamma-f", type=float, default=0.25)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--calibrate", action="store_true", help="estimate the Poincare constant")
    p.add_argument("--labels")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_error_curve)

    p = sub.add_parser("warp", help="local-affine pseudo-GT warp with validity masks")
    p.add_argument("--image", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--labels")
    p.add_argument("--fragile", help="comma-separated fragile region labels (e.g. hair,eyelids)")
    p.add_argument("--nearest", action="store_true", help="nearest-neighbor sampling")
    p.add_argument("--out", required=True)
    p.add_argument("--mask")
    p.set_defaults(fn=cmd_warp)

    p = sub.add_parser("serve", help="run the interactive session service")
    p.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(_env("PORT", "8000")))
    p.add_argument("--snapshot-dir", default=_env("SNAPSHOT_DIR", None))
    p.add_argument("--vertex-cap", type=int, default=int(_env("VERTEX_CAP", "200000")))
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except (MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
