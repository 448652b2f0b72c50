"""HTTP/JSON session service for the interactive studio.

A session precomputes everything expensive exactly once: operators,
curvature, the stiffness factorization, and the fully exaggerated target
mesh. After that, every slider position is answered by a vertex blend with
zero linear solves; only localized edits and the diagnostics error curve
trigger further solving, serialized per session while blends stay readable.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .blend import BlendPair, blend, error_curve_report
from .curvature import gaussian_curvature
from .mesh import Mesh, MeshError, bbox_diagonal, save_labels, save_mesh
from .mesh import _parse_obj, _parse_ply  # session uploads reuse the file parsers
from .operators import build_operators
from .solver import (
    ConstraintSet,
    FactorCache,
    SolverError,
    caricaturize,
    default_constraints,
)
from .wire import encode_mesh

VERTEX_CAP_DEFAULT = 200_000


class ServiceError(Exception):
    def __init__(self, status, code, message):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def parse_mesh_bytes(data, filename="mesh.obj", labels=None):
    name = (filename or "mesh.obj").lower()
    if name.endswith(".ply"):
        vertices, faces = _parse_ply(data)
    else:
        vertices, faces = _parse_obj(data.decode("utf-8", errors="replace"))
    return Mesh(vertices, faces, labels)


@dataclass
class Session:
    id: str
    mesh: Mesh
    gamma_f: float
    epsilon: float | None
    target_vertices: np.ndarray
    report: dict
    ops: object = None
    curv: object = None
    cache: FactorCache = None
    constraints: ConstraintSet = None
    edits: dict = field(default_factory=dict)     # (regions, gamma) -> (edit_id, vertices)
    edit_meta: dict = field(default_factory=dict)  # edit_id -> {region, gamma}
    solve_lock: threading.Lock = field(default_factory=threading.Lock)

    def ensure_operators(self):
        # Rebuilt lazily after a snapshot restore; cheap next to a solve.
        if self.ops is None:
            self.ops = build_operators(self.mesh)
            self.curv = gaussian_curvature(self.mesh, self.ops, self.epsilon)
            self.cache = FactorCache(self.ops)
            self.constraints = default_constraints(self.mesh)


class SessionStore:
    def __init__(self, snapshot_dir=None, vertex_cap=VERTEX_CAP_DEFAULT):
        self._sessions = {}
        self._lock = threading.Lock()
        self.vertex_cap = vertex_cap
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        if self.snapshot_dir:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    def get(self, session_id):
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def create(self, mesh, gamma_f, epsilon=None):
        if mesh.n_vertices == 0:
            raise ServiceError(422, "empty_mesh", "uploaded mesh has no vertices")
        if mesh.n_vertices > self.vertex_cap:
            raise ServiceError(
                413, "mesh_too_large",
                f"{mesh.n_vertices} vertices exceeds the cap of {self.vertex_cap}",
            )
        if gamma_f <= 0:
            raise ServiceError(422, "bad_gamma_f", "gamma_f must be positive")

        started = time.perf_counter()
        session_id = secrets.token_hex(8)
        ops = build_operators(mesh)
        curv = gaussian_curvature(mesh, ops, epsilon)
        cache = FactorCache(ops)
        constraints = default_constraints(mesh)
        try:
            solution = caricaturize(
                mesh, gamma_f, gamma_f, ops=ops, curv=curv, constraints=None, cache=cache
            )
        except SolverError as exc:
            raise ServiceError(500, "solver_failure", str(exc)) from exc
        report = {
            "vertex_count": mesh.n_vertices,
            "face_count": mesh.n_faces,
            "gamma_f": gamma_f,
            "epsilon": curv.epsilon,
            "K_inf": float(curv.K_stab.max()),
            "bbox_diagonal": bbox_diagonal(mesh),
            "residual_norm": solution.residual_norm.tolist(),
            "constraint_violation": solution.constraint_violation,
            "precompute_seconds": time.perf_counter() - started,
            "labels": {name: int(len(idx)) for name, idx in mesh.labels.items()},
        }
        session = Session(
            id=session_id,
            mesh=mesh,
            gamma_f=gamma_f,
            epsilon=epsilon,
            target_vertices=solution.mesh.vertices,
            report=report,
            ops=ops,
            curv=curv,
            cache=cache,
            constraints=constraints,
        )
        with self._lock:
            self._sessions[session_id] = session
        self._snapshot(session)
        return session

    # -- persistence ---------------------------------------------------

    def _snapshot(self, session):
        if not self.snapshot_dir:
            return
        root = self.snapshot_dir / session.id
        root.mkdir(parents=True, exist_ok=True)
        save_mesh(root / "base.obj", session.mesh)
        save_mesh(root / "target.obj", session.mesh.with_vertices(session.target_vertices))
        if session.mesh.labels:
            save_labels(root / "base.labels.json", session.mesh.labels)
        meta = {
            "id": session.id,
            "gamma_f": session.gamma_f,
            "epsilon": session.epsilon,
            "report": session.report,
        }
        (root / "meta.json").write_text(json.dumps(meta), encoding="utf-8")

    def _restore(self):
        from .mesh import load_mesh

        for meta_path in sorted(self.snapshot_dir.glob("*/meta.json")):
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                root = meta_path.parent
                mesh = load_mesh(root / "base.obj")
                target = load_mesh(root / "target.obj")
                session = Session(
                    id=meta["id"],
                    mesh=mesh,
                    gamma_f=meta["gamma_f"],
                    epsilon=meta.get("epsilon"),
                    target_vertices=target.vertices,
                    report=meta.get("report", {}),
                )
                with self._lock:
                    self._sessions[session.id] = session
            except (OSError, KeyError, ValueError, MeshError):
                continue  # skip unreadable snapshots, keep serving


def _mesh_payload(session, vertices, meta):
    base = {
        "session": session.id,
        "gamma_f": session.gamma_f,
        "bbox_diagonal": session.report.get("bbox_diagonal"),
    }
    base.update(meta)
    return Response(
        content=encode_mesh(vertices, session.mesh.faces, base),
        media_type="application/octet-stream",
    )


def create_app(snapshot_dir=None, vertex_cap=VERTEX_CAP_DEFAULT):
    app = FastAPI(title="caricatureforge", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(snapshot_dir=snapshot_dir, vertex_cap=vertex_cap)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def service_error(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(MeshError)
    async def mesh_error(_request: Request, exc: MeshError):
        return JSONResponse(status_code=422, content={"code": "bad_mesh", "message": str(exc)})

    @app.post("/sessions")
    async def create_session(
        mesh: UploadFile = File(...),
        labels: UploadFile | None = File(default=None),
        gamma_f: float = Form(default=0.25),
        epsilon: float | None = Form(default=None),
    ):
        label_map = None
        if labels is not None:
            doc = json.loads((await labels.read()).decode("utf-8"))
            if "labels" not in doc:
                raise ServiceError(422, "bad_labels", "label sidecar must carry a 'labels' key")
            label_map = {k: np.asarray(v, dtype=np.int64) for k, v in doc["labels"].items()}
        try:
            parsed = parse_mesh_bytes(await mesh.read(), mesh.filename, label_map)
        except MeshError as exc:
            raise ServiceError(422, "bad_mesh", str(exc)) from exc
        session = store.create(parsed, gamma_f, epsilon)
        return {"id": session.id, "report": session.report}

    @app.get("/sessions/{session_id}/meta")
    def meta(session_id: str):
        session = store.get(session_id)
        return {
            "id": session.id,
            "gamma_f": session.gamma_f,
            "report": session.report,
            "labels": {name: idx.tolist() for name, idx in session.mesh.labels.items()},
            "edits": [
                {"edit_id": eid, **info} for eid, info in session.edit_meta.items()
            ],
        }

    @app.get("/sessions/{session_id}/blend")
    def get_blend(session_id: str, gamma: float):
        session = store.get(session_id)
        if not 0 <= gamma <= session.gamma_f:
            raise ServiceError(422, "gamma_out_of_range", f"gamma must lie in [0, {session.gamma_f}]")
        pair = BlendPair(
            base=session.mesh,
            target=session.mesh.with_vertices(session.target_vertices),
            gamma_f=session.gamma_f,
        )
        blended = blend(pair, gamma)
        return _mesh_payload(session, blended.vertices, {"gamma": gamma, "kind": "blend"})

    @app.post("/sessions/{session_id}/edits")
    async def request_local_edit(session_id: str, request: Request):
        # region is one or more existing label names; a painted studio
        # selection arrives as explicit "indices" plus a name to register.
        body = await request.json()
        region = body.get("region")
        gamma = body.get("gamma")
        indices = body.get("indices")
        if gamma is None:
            raise ServiceError(422, "missing_gamma", "edit body needs a 'gamma'")
        names = [region] if isinstance(region, str) else list(region or [])
        if not names:
            raise ServiceError(422, "empty_region", "edit body needs a non-empty 'region'")
        session = store.get(session_id)
        if not 0 <= gamma <= session.gamma_f:
            raise ServiceError(422, "gamma_out_of_range", f"gamma must lie in [0, {session.gamma_f}]")
        if indices is not None:
            idx = np.unique(np.asarray(indices, dtype=np.int64))
            if idx.size == 0:
                raise ServiceError(422, "empty_region", "painted region has no vertices")
            if idx.min() < 0 or idx.max() >= session.mesh.n_vertices:
                raise ServiceError(422, "bad_edit", "painted region index out of range")
            if len(names) != 1:
                raise ServiceError(422, "bad_edit", "a painted region takes exactly one name")
            if names[0] not in session.mesh.labels:
                session.mesh.labels[names[0]] = idx
            elif not np.array_equal(session.mesh.labels[names[0]], idx):
                raise ServiceError(409, "label_conflict", f"label {names[0]!r} already exists with different vertices")
        missing = [n for n in names if n not in session.mesh.labels]
        if missing:
            raise ServiceError(404, "unknown_region", f"labels not on this mesh: {missing}")

        key = (tuple(sorted(names)), float(gamma))
        with session.solve_lock:
            if key not in session.edits:
                session.ensure_operators()
                try:
                    solution = caricaturize(
                        session.mesh,
                        gamma,
                        session.gamma_f,
                        region=names,
                        ops=session.ops,
                        curv=session.curv,
                        cache=session.cache,
                    )
                except SolverError as exc:
                    raise ServiceError(500, "solver_failure", str(exc)) from exc
                except (ValueError, MeshError) as exc:
                    raise ServiceError(422, "bad_edit", str(exc)) from exc
                edit_id = secrets.token_hex(6)
                session.edits[key] = (edit_id, solution.mesh.vertices)
                session.edit_meta[edit_id] = {"region": sorted(names), "gamma": float(gamma)}
            edit_id, vertices = session.edits[key]
        return _mesh_payload(
            session, vertices, {"edit_id": edit_id, "region": sorted(names), "gamma": gamma, "kind": "edit"}
        )

    @app.get("/sessions/{session_id}/error-curve")
    def get_error_curve(session_id: str, samples: int = 11, calibrate: bool = False):
        if samples < 3:
            raise ServiceError(422, "bad_samples", "samples must be >= 3")
        session = store.get(session_id)
        with session.solve_lock:
            session.ensure_operators()
            report = error_curve_report(
                session.mesh,
                session.ops,
                session.curv,
                session.gamma_f,
                samples=samples,
                constraints=session.constraints,
                cache=session.cache,
                calibrate=calibrate,
            )
        return report

    return app


app = create_app()
