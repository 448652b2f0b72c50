// three.js viewport: normal-shaded mesh, orbit/zoom, and screen-space vertex
// painting through an offscreen face-id render target (deterministic picking,
// no ray casts).

import * as THREE from "three";

export interface BrushPick {
  faceIds: number[];
  vertexIds: number[];
}

export class MeshViewer {
  readonly renderer: THREE.WebGLRenderer;
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;

  private mesh: THREE.Mesh | null = null;
  private geometry: THREE.BufferGeometry | null = null;
  private faces: Uint32Array = new Uint32Array(0);

  private idScene = new THREE.Scene();
  private idMesh: THREE.Mesh | null = null;
  private idTarget: THREE.WebGLRenderTarget;

  private highlight: THREE.Points | null = null;
  private baseVertices: Float32Array = new Float32Array(0);

  private orbit = { theta: 0.35, phi: 1.15, radius: 3.2, target: new THREE.Vector3() };
  private dragging = false;
  private lastPointer = { x: 0, y: 0 };

  paintMode = false;
  brushRadius = 14; // px
  onPaint: ((pick: BrushPick) => void) | null = null;

  constructor(readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio ?? 1);
    this.camera = new THREE.PerspectiveCamera(40, 1, 0.01, 100);
    this.scene.background = new THREE.Color(0x10151c);
    this.idTarget = new THREE.WebGLRenderTarget(1, 1);
    this.resize();
    window.addEventListener("resize", () => this.resize());
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    window.addEventListener("pointerup", () => (this.dragging = false));
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.orbit.radius *= Math.exp(e.deltaY * 0.001);
      this.orbit.radius = Math.min(Math.max(this.orbit.radius, 0.2), 40);
    }, { passive: false });
    const loop = () => {
      this.renderFrame();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  resize(): void {
    const w = this.canvas.clientWidth || 640;
    const h = this.canvas.clientHeight || 480;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.idTarget.setSize(w, h);
  }

  setMesh(vertices: Float32Array, faces: Uint32Array): void {
    this.faces = faces;
    this.baseVertices = vertices.slice();
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.geometry?.dispose();
    }
    if (this.idMesh) {
      this.idScene.remove(this.idMesh);
    }
    this.geometry = new THREE.BufferGeometry();
    this.geometry.setAttribute("position", new THREE.BufferAttribute(vertices.slice(), 3));
    this.geometry.setIndex(new THREE.BufferAttribute(faces.slice(), 1));
    this.geometry.computeVertexNormals();
    this.mesh = new THREE.Mesh(
      this.geometry,
      new THREE.MeshNormalMaterial({ flatShading: false }),
    );
    this.scene.add(this.mesh);
    this.idMesh = new THREE.Mesh(this.buildIdGeometry(vertices, faces), new THREE.MeshBasicMaterial({ vertexColors: true }));
    this.idScene.add(this.idMesh);

    const box = new THREE.Box3().setFromBufferAttribute(
      this.geometry.getAttribute("position") as THREE.BufferAttribute,
    );
    box.getCenter(this.orbit.target);
    this.orbit.radius = box.getSize(new THREE.Vector3()).length() * 1.2 + 0.1;
  }

  /** Update positions in place (slider blending); normals are recomputed. */
  updateVertices(vertices: Float32Array): void {
    if (!this.geometry) return;
    const attr = this.geometry.getAttribute("position") as THREE.BufferAttribute;
    (attr.array as Float32Array).set(vertices);
    attr.needsUpdate = true;
    this.geometry.computeVertexNormals();
    if (this.idMesh) {
      const idAttr = (this.idMesh.geometry.getAttribute("position") as THREE.BufferAttribute);
      const arr = idAttr.array as Float32Array;
      for (let f = 0; f < this.faces.length / 3; f++) {
        for (let c = 0; c < 3; c++) {
          const v = this.faces[f * 3 + c];
          arr[(f * 3 + c) * 3 + 0] = vertices[v * 3 + 0];
          arr[(f * 3 + c) * 3 + 1] = vertices[v * 3 + 1];
          arr[(f * 3 + c) * 3 + 2] = vertices[v * 3 + 2];
        }
      }
      idAttr.needsUpdate = true;
    }
  }

  setHighlight(vertexIds: Iterable<number>): void {
    if (this.highlight) {
      this.scene.remove(this.highlight);
      this.highlight.geometry.dispose();
      this.highlight = null;
    }
    const ids = [...vertexIds];
    if (ids.length === 0 || !this.geometry) return;
    const attr = this.geometry.getAttribute("position") as THREE.BufferAttribute;
    const pts = new Float32Array(ids.length * 3);
    ids.forEach((v, i) => {
      pts[i * 3] = attr.getX(v);
      pts[i * 3 + 1] = attr.getY(v);
      pts[i * 3 + 2] = attr.getZ(v);
    });
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(pts, 3));
    this.highlight = new THREE.Points(
      geo,
      new THREE.PointsMaterial({ color: 0xf6e05e, size: 0.02 }),
    );
    this.scene.add(this.highlight);
  }

  private buildIdGeometry(vertices: Float32Array, faces: Uint32Array): THREE.BufferGeometry {
    // non-indexed copy with the face id packed into the vertex color
    const n = faces.length / 3;
    const pos = new Float32Array(n * 9);
    const col = new Float32Array(n * 9);
    for (let f = 0; f < n; f++) {
      const r = ((f + 1) & 0xff) / 255;
      const g = (((f + 1) >> 8) & 0xff) / 255;
      const b = (((f + 1) >> 16) & 0xff) / 255;
      for (let c = 0; c < 3; c++) {
        const v = faces[f * 3 + c];
        pos.set(vertices.subarray(v * 3, v * 3 + 3), (f * 3 + c) * 3);
        col[(f * 3 + c) * 3] = r;
        col[(f * 3 + c) * 3 + 1] = g;
        col[(f * 3 + c) * 3 + 2] = b;
      }
    }
    const geo = new THREE.BufferGeometry();
    geo.setAttribute("position", new THREE.BufferAttribute(pos, 3));
    geo.setAttribute("color", new THREE.BufferAttribute(col, 3));
    return geo;
  }

  /** Read the id buffer under a brush disc; returns touched faces/vertices. */
  pickBrush(cx: number, cy: number): BrushPick {
    if (!this.idMesh) return { faceIds: [], vertexIds: [] };
    const w = this.idTarget.width;
    const h = this.idTarget.height;
    this.renderer.setRenderTarget(this.idTarget);
    this.renderer.render(this.idScene, this.camera);
    const r = this.brushRadius;
    const x0 = Math.max(0, Math.floor(cx - r));
    const y0 = Math.max(0, Math.floor(h - cy - r));
    const bw = Math.min(w - x0, 2 * r);
    const bh = Math.min(h - y0, 2 * r);
    const pixels = new Uint8Array(bw * bh * 4);
    this.renderer.readRenderTargetPixels(this.idTarget, x0, y0, bw, bh, pixels);
    this.renderer.setRenderTarget(null);
    const faceIds = new Set<number>();
    for (let i = 0; i < bw * bh; i++) {
      const px = i % bw;
      const py = Math.floor(i / bw);
      const dx = x0 + px - cx;
      const dy = y0 + py - (h - cy);
      if (dx * dx + dy * dy > r * r) continue;
      const id = pixels[i * 4] | (pixels[i * 4 + 1] << 8) | (pixels[i * 4 + 2] << 16);
      if (id > 0) faceIds.add(id - 1);
    }
    const vertexIds = new Set<number>();
    for (const f of faceIds) {
      vertexIds.add(this.faces[f * 3]);
      vertexIds.add(this.faces[f * 3 + 1]);
      vertexIds.add(this.faces[f * 3 + 2]);
    }
    return { faceIds: [...faceIds], vertexIds: [...vertexIds] };
  }

  private pointerDown(e: PointerEvent): void {
    this.dragging = true;
    this.lastPointer = { x: e.offsetX, y: e.offsetY };
    if (this.paintMode && this.onPaint) {
      this.onPaint(this.pickBrush(e.offsetX, e.offsetY));
    }
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.dragging) return;
    if (this.paintMode) {
      if (this.onPaint) this.onPaint(this.pickBrush(e.offsetX, e.offsetY));
      return;
    }
    const dx = e.offsetX - this.lastPointer.x;
    const dy = e.offsetY - this.lastPointer.y;
    this.lastPointer = { x: e.offsetX, y: e.offsetY };
    this.orbit.theta -= dx * 0.008;
    this.orbit.phi = Math.min(Math.max(this.orbit.phi - dy * 0.008, 0.05), Math.PI - 0.05);
  }

  private renderFrame(): void {
    const { theta, phi, radius, target } = this.orbit;
    this.camera.position.set(
      target.x + radius * Math.sin(phi) * Math.cos(theta),
      target.y + radius * Math.cos(phi),
      target.z + radius * Math.sin(phi) * Math.sin(theta),
    );
    this.camera.lookAt(target);
    this.renderer.render(this.scene, this.camera);
  }
}
