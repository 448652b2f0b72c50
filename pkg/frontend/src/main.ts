// Studio wiring: session upload, slider-driven client-side blending, region
// painting with undo, localized edit submission, and the error-curve panel.

import { ApiError, ForgeClient, RevisionGate } from "./api";
import { blendInto } from "./blend";
import { MeshPayload } from "./codec";
import { renderCurveSvg } from "./errorCurve";
import { RegionPaintSet } from "./selection";
import { MeshViewer } from "./viewer";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const serverUrl = (import.meta as any).env?.VITE_FORGE_URL ?? "http://127.0.0.1:8000";
const client = new ForgeClient(serverUrl);
const gate = new RevisionGate();

interface StudioState {
  sessionId: string | null;
  gammaF: number;
  base: Float32Array | null;       // S_0 endpoint (client copy)
  target: Float32Array | null;     // current blend target (S_gamma_f or an edit)
  scratch: Float32Array | null;    // per-frame blend output
  faces: Uint32Array | null;
  gamma: number;
  paint: RegionPaintSet | null;
  editCount: number;
}

const state: StudioState = {
  sessionId: null,
  gammaF: 0.25,
  base: null,
  target: null,
  scratch: null,
  faces: null,
  gamma: 0,
  paint: null,
  editCount: 0,
};

const viewer = new MeshViewer($("viewport") as HTMLCanvasElement);

function toast(message: string, isError = false): void {
  const el = $("status");
  el.textContent = message;
  el.className = isError ? "status error" : "status";
}

function applyBlend(): void {
  if (!state.base || !state.target || !state.scratch) return;
  blendInto(state.scratch, state.base, state.target, state.gamma, state.gammaF);
  viewer.updateVertices(state.scratch);
  $("gamma-value").textContent = state.gamma.toFixed(3);
}

async function loadEndpoints(sessionId: string): Promise<void> {
  // the only geometry fetches the slider ever needs: the two endpoints
  const [basePayload, targetPayload] = await Promise.all([
    client.getBlend(sessionId, 0),
    client.getBlend(sessionId, state.gammaF),
  ]);
  adoptEndpoints(basePayload, targetPayload);
}

function adoptEndpoints(basePayload: MeshPayload, targetPayload: MeshPayload): void {
  state.base = basePayload.vertices;
  state.target = targetPayload.vertices;
  state.faces = basePayload.faces;
  state.scratch = new Float32Array(state.base.length);
  state.paint = new RegionPaintSet(state.base.length / 3);
  viewer.setMesh(basePayload.vertices, basePayload.faces);
  applyBlend();
}

async function onCreateSession(): Promise<void> {
  const input = $("mesh-file") as HTMLInputElement;
  const labelsInput = $("labels-file") as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) {
    toast("choose a mesh file first", true);
    return;
  }
  state.gammaF = parseFloat(($("gamma-f") as HTMLInputElement).value) || 0.25;
  toast("precomputing exaggeration target...");
  try {
    const { id, report } = await client.createSession(file, file.name, {
      gammaF: state.gammaF,
      labels: labelsInput.files?.[0] ?? undefined,
    });
    state.sessionId = id;
    await loadEndpoints(id);
    toast(
      `session ${id}: ${report.vertex_count} vertices, precompute ${report.precompute_seconds.toFixed(2)}s`,
    );
    ($("session-id") as HTMLElement).textContent = id;
  } catch (err) {
    toast(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err), true);
  }
}

function onSlider(): void {
  const slider = $("gamma-slider") as HTMLInputElement;
  state.gamma = (parseFloat(slider.value) / 1000) * state.gammaF;
  applyBlend(); // pure client-side arithmetic; no network, no solves
}

function refreshSelectionUi(): void {
  if (!state.paint) return;
  viewer.setHighlight(state.paint.indices());
  $("selection-count").textContent = String(state.paint.size);
}

async function onSubmitEdit(): Promise<void> {
  if (!state.sessionId || !state.paint) {
    toast("no session loaded", true);
    return;
  }
  let region: number[];
  try {
    region = state.paint.toRegion(); // client-side validation mirrors the server
  } catch (err) {
    toast(String(err instanceof Error ? err.message : err), true);
    return;
  }
  const name =
    ($("region-name") as HTMLInputElement).value.trim() || `painted-${++state.editCount}`;
  toast(`solving localized edit ${name}...`);
  try {
    const payload = await gate.run("edit", () =>
      client.submitEdit(state.sessionId!, name, state.gammaF, region),
    );
    if (payload === null) return; // superseded by a newer submit
    state.target = payload.vertices; // the edit becomes the slider's blend target
    applyBlend();
    toast(`edit ${payload.envelope.edit_id} applied; slider now blends toward it`);
  } catch (err) {
    toast(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err), true);
  }
}

async function onShowCurve(): Promise<void> {
  if (!state.sessionId) {
    toast("no session loaded", true);
    return;
  }
  toast("measuring error curve (exact solves server-side)...");
  try {
    const report = await gate.run("curve", () => client.errorCurve(state.sessionId!, 11));
    if (report === null) return;
    $("curve-panel").innerHTML = renderCurveSvg(report);
    toast(`error curve ready (C_P=${report.C_P}, K_inf=${report.K_inf.toFixed(3)})`);
  } catch (err) {
    $("curve-panel").innerHTML = `<p class="empty">error curve unavailable</p>`;
    toast(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err), true);
  }
}

function wire(): void {
  $("create-session").addEventListener("click", () => void onCreateSession());
  $("gamma-slider").addEventListener("input", onSlider);
  $("show-curve").addEventListener("click", () => void onShowCurve());
  $("submit-edit").addEventListener("click", () => void onSubmitEdit());
  const paintToggle = $("paint-mode") as HTMLInputElement;
  paintToggle.addEventListener("change", () => {
    viewer.paintMode = paintToggle.checked;
  });
  viewer.onPaint = (pick) => {
    if (!state.paint || pick.vertexIds.length === 0) return;
    state.paint.paint(pick.vertexIds);
    refreshSelectionUi();
  };
  $("undo-paint").addEventListener("click", () => {
    state.paint?.undo();
    refreshSelectionUi();
  });
  $("redo-paint").addEventListener("click", () => {
    state.paint?.redo();
    refreshSelectionUi();
  });
  $("clear-paint").addEventListener("click", () => {
    state.paint?.clear();
    refreshSelectionUi();
  });
  $("reset-target").addEventListener("click", () => {
    if (state.sessionId) void loadEndpoints(state.sessionId);
  });
}

wire();
toast(`ready; backend ${serverUrl}`);
