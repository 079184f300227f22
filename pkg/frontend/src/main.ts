/** DOM wiring: connects the annotator state machine to the canvas and the
 * service client. All geometry the user sees is computed server-side. */

import { ApiClient, ApiError, CHANNELS, type Channel } from "./api";
import { Annotator } from "./annotator";
import { renderOverlay, Viewport } from "./view";

const api = new ApiClient();
const state = new Annotator((a, b, c) => api.computeAngle(a, b, c));
const vp = new Viewport();

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const imageSelect = document.getElementById("image-select") as HTMLSelectElement;
const channelSelect = document.getElementById("channel-select") as HTMLSelectElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const angleEl = document.getElementById("angle-readout") as HTMLSpanElement;
const saveBtn = document.getElementById("save") as HTMLButtonElement;
const detectBtn = document.getElementById("detect") as HTMLButtonElement;
const promoteAllBtn = document.getElementById("promote-all") as HTMLButtonElement;
const clearSuggestionsBtn = document.getElementById("clear-suggestions") as HTMLButtonElement;

let backdrop: HTMLImageElement | null = null;
let panning = false;
let last = { x: 0, y: 0 };

function setStatus(text: string): void {
  statusEl.textContent = text;
}

function redraw(): void {
  renderOverlay(ctx, vp, state, backdrop);
  saveBtn.disabled = !state.dirty;
}

function loadBackdrop(): void {
  if (!state.imageId) return;
  const img = new Image();
  img.onload = () => {
    backdrop = img;
    redraw();
  };
  img.onerror = () => setStatus(`failed to load ${state.imageId} (${state.channel})`);
  img.src = api.imageUrl(state.imageId, state.channel);
}

async function openImage(imageId: string): Promise<void> {
  const doc = await api.getAnnotations(imageId);
  state.loadDocument(doc);
  canvas.width = Math.max(doc.width, 640);
  canvas.height = Math.max(doc.height, 480);
  vp.reset();
  loadBackdrop();
  setStatus(`${imageId}: ${doc.annotations.length} annotations`);
  redraw();
}

canvas.addEventListener("click", async (ev) => {
  const p = vp.screenToImage({ x: ev.offsetX, y: ev.offsetY });
  const point = { x: Math.round(p.x), y: Math.round(p.y) };
  const record = await state.addPoint(point);
  if (record) {
    angleEl.textContent = `${record.angle_deg.toFixed(1)}°`;
    setStatus(`annotation added at (${record.b[0]}, ${record.b[1]})`);
  } else if (state.staged.length === 2) {
    setStatus("click the second branch point (c)");
  } else if (state.staged.length === 1) {
    setStatus("click the bifurcation (b)");
  }
  redraw();
});

canvas.addEventListener("mousemove", async (ev) => {
  if (panning) {
    vp.panBy(ev.offsetX - last.x, ev.offsetY - last.y);
    last = { x: ev.offsetX, y: ev.offsetY };
    redraw();
    return;
  }
  if (state.staged.length !== 2) return;
  const p = vp.screenToImage({ x: ev.offsetX, y: ev.offsetY });
  const angle = await state.previewAngle({ x: Math.round(p.x), y: Math.round(p.y) });
  if (angle !== null) angleEl.textContent = `${angle.toFixed(1)}°`;
});

canvas.addEventListener("contextmenu", (ev) => {
  ev.preventDefault();
  const p = vp.screenToImage({ x: ev.offsetX, y: ev.offsetY });
  if (state.deleteAt({ x: Math.round(p.x), y: Math.round(p.y) })) {
    setStatus("annotation removed");
    redraw();
  }
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  vp.zoomAt({ x: ev.offsetX, y: ev.offsetY }, ev.deltaY < 0 ? 1.2 : 1 / 1.2);
  redraw();
});

canvas.addEventListener("mousedown", (ev) => {
  if (ev.button === 1) {
    panning = true;
    last = { x: ev.offsetX, y: ev.offsetY };
    ev.preventDefault();
  }
});
window.addEventListener("mouseup", () => {
  panning = false;
});

channelSelect.addEventListener("change", () => {
  state.setChannel(channelSelect.value as Channel);
  loadBackdrop();
});

imageSelect.addEventListener("change", () => {
  void openImage(imageSelect.value);
});

saveBtn.addEventListener("click", async () => {
  try {
    await api.putAnnotations(state.toDocument());
    state.markSaved();
    setStatus("saved");
  } catch (err) {
    setStatus(err instanceof ApiError ? `save failed: ${err.message}` : "save failed");
  }
  redraw();
});

detectBtn.addEventListener("click", async () => {
  setStatus("running detection…");
  try {
    const doc = await api.detect(state.imageId);
    state.setSuggestions(doc);
    setStatus(`${doc.annotations.length} suggestions (blue); click a label to promote`);
  } catch (err) {
    setStatus(err instanceof ApiError ? `detect failed: ${err.message}` : "detect failed");
  }
  redraw();
});

promoteAllBtn.addEventListener("click", () => {
  while (state.suggestions.length > 0) state.promoteSuggestion(0);
  setStatus("all suggestions promoted");
  redraw();
});

clearSuggestionsBtn.addEventListener("click", () => {
  while (state.suggestions.length > 0) state.dismissSuggestion(0);
  redraw();
});

async function init(): Promise<void> {
  for (const ch of CHANNELS) {
    const opt = document.createElement("option");
    opt.value = ch;
    opt.textContent = ch;
    channelSelect.appendChild(opt);
  }
  const ids = await api.listImages();
  for (const id of ids) {
    const opt = document.createElement("option");
    opt.value = id;
    opt.textContent = id;
    imageSelect.appendChild(opt);
  }
  if (ids.length > 0) await openImage(ids[0]);
}

void init();
