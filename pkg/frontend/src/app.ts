/**
 * Interactive colormap recovery tool.
 *
 * Panels: parameter control, input visualization, recovery progress,
 * recovered colormap strip with draggable control points, RGB component
 * editing, live recolor preview (server-rendered), library picker,
 * colormap transfer for uploaded data, and a histogram of the recovered
 * field values.
 */

import { ApiClient, ColormapJson, JobSnapshot } from "./api.js";
import { PreviewState, RecolorScheduler, EditorState, freshEditorState } from "./state.js";
import { clampChannel, clampedUniformKnots, rgbCss, sampleColormap } from "./spline.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8077");

const state: EditorState = freshEditorState();
const preview = new PreviewState();
preview.onReplaced = (url) => URL.revokeObjectURL(url);

const scheduler = new RecolorScheduler<number[][]>(async (controlPoints, counter) => {
  if (state.jobId === null) return;
  try {
    const blob = await api.recolor(state.jobId, asColormapJson(controlPoints));
    if (preview.accept({ counter, url: URL.createObjectURL(blob) })) {
      previewImg.src = preview.previewUrl!;
    }
  } catch (err) {
    showMessage(`recolor failed: ${(err as Error).message}`);
  }
}, 150);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const uploadInput = el<HTMLInputElement>("upload");
const itersInput = el<HTMLInputElement>("iterations");
const lrInput = el<HTMLInputElement>("learning-rate");
const seedInput = el<HTMLInputElement>("seed");
const progressBar = el<HTMLProgressElement>("progress");
const progressLabel = el<HTMLSpanElement>("progress-label");
const messageBox = el<HTMLDivElement>("message");
const inputImg = el<HTMLImageElement>("input-image");
const previewImg = el<HTMLImageElement>("preview-image");
const stripCanvas = el<HTMLCanvasElement>("strip");
const componentCanvas = el<HTMLCanvasElement>("components");
const histogramCanvas = el<HTMLCanvasElement>("histogram");
const swatchRow = el<HTMLDivElement>("swatches");
const rgbInputs = ["r", "g", "b"].map((c) => el<HTMLInputElement>(`chan-${c}`));
const librarySelect = el<HTMLSelectElement>("library");
const transferInput = el<HTMLInputElement>("transfer-field");
const transferImg = el<HTMLImageElement>("transfer-image");
const revertButton = el<HTMLButtonElement>("revert");
const applyLibraryButton = el<HTMLButtonElement>("apply-library");

let recoveredControlPoints: number[][] = [];
let libraryColormaps: ColormapJson[] = [];
let dragging = false;

function showMessage(text: string): void {
  messageBox.textContent = text;
  messageBox.classList.toggle("hidden", text === "");
}

function asColormapJson(controlPoints: number[][]): ColormapJson {
  return {
    n: controlPoints.length - 1,
    control_points: controlPoints,
    knots: state.knots ?? clampedUniformKnots(controlPoints.length),
  };
}

// ---------------------------------------------------------------- drawing

function drawStrip(): void {
  const ctx = stripCanvas.getContext("2d")!;
  const { width, height } = stripCanvas;
  if (state.controlPoints.length < 4) {
    ctx.clearRect(0, 0, width, height);
    return;
  }
  const samples = sampleColormap(state.controlPoints, state.knots ?? undefined, width);
  for (let x = 0; x < width; x++) {
    ctx.fillStyle = rgbCss(samples[x]);
    ctx.fillRect(x, 0, 1, height);
  }
}

function drawComponents(): void {
  const ctx = componentCanvas.getContext("2d")!;
  const { width, height } = componentCanvas;
  ctx.clearRect(0, 0, width, height);
  if (state.controlPoints.length < 4) return;
  const samples = sampleColormap(state.controlPoints, state.knots ?? undefined, width);
  const colors = ["#d33", "#2a2", "#36c"];
  for (let channel = 0; channel < 3; channel++) {
    ctx.strokeStyle = colors[channel];
    ctx.beginPath();
    for (let x = 0; x < width; x++) {
      const y = height - 1 - clampChannel(samples[x][channel]) * (height - 1);
      if (x === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}

function drawHistogram(): void {
  const ctx = histogramCanvas.getContext("2d")!;
  const { width, height } = histogramCanvas;
  ctx.clearRect(0, 0, width, height);
  if (!state.histogram) return;
  const peak = Math.max(...state.histogram, 1);
  const barWidth = width / state.histogram.length;
  ctx.fillStyle = "#69c";
  state.histogram.forEach((count, bin) => {
    const barHeight = (count / peak) * (height - 2);
    ctx.fillRect(bin * barWidth, height - barHeight, barWidth - 1, barHeight);
  });
}

function rebuildSwatches(): void {
  swatchRow.innerHTML = "";
  state.controlPoints.forEach((point, index) => {
    const swatch = document.createElement("button");
    swatch.className = "swatch" + (index === state.selectedPoint ? " selected" : "");
    swatch.style.background = rgbCss(point as [number, number, number]);
    swatch.title = `control point ${index}`;
    swatch.addEventListener("click", () => selectPoint(index));
    swatchRow.appendChild(swatch);
  });
}

function refreshColormapPanels(): void {
  drawStrip();
  drawComponents();
  rebuildSwatches();
  syncChannelInputs();
}

function syncChannelInputs(): void {
  const active = state.selectedPoint !== null ? state.controlPoints[state.selectedPoint] : null;
  rgbInputs.forEach((input, channel) => {
    input.disabled = active === null;
    input.value = active === null ? "" : active[channel].toFixed(3);
  });
}

// ----------------------------------------------------------------- editing

function selectPoint(index: number): void {
  state.selectedPoint = index;
  rebuildSwatches();
  syncChannelInputs();
}

function editSelectedPoint(channel: number, value: number): void {
  if (state.selectedPoint === null) return;
  state.controlPoints[state.selectedPoint][channel] = clampChannel(value);
  state.dirty = true;
  refreshColormapPanels();
  scheduler.request(state.controlPoints.map((p) => [...p]));
}

rgbInputs.forEach((input, channel) => {
  input.addEventListener("input", () => {
    const value = parseFloat(input.value);
    if (Number.isFinite(value)) editSelectedPoint(channel, value);
  });
});

revertButton.addEventListener("click", () => {
  state.controlPoints = recoveredControlPoints.map((p) => [...p]);
  state.dirty = false;
  refreshColormapPanels();
  scheduler.request(state.controlPoints.map((p) => [...p]));
});

// vertical drag on a swatch edits the luminance of its control point
swatchRow.addEventListener("pointerdown", (event) => {
  const target = event.target as HTMLElement;
  if (!target.classList.contains("swatch")) return;
  dragging = true;
  target.setPointerCapture(event.pointerId);
  const index = Array.from(swatchRow.children).indexOf(target);
  selectPoint(index);
});
swatchRow.addEventListener("pointermove", (event) => {
  if (!dragging || state.selectedPoint === null) return;
  const factor = -event.movementY * 0.005;
  const point = state.controlPoints[state.selectedPoint];
  for (let channel = 0; channel < 3; channel++) {
    point[channel] = clampChannel(point[channel] + factor);
  }
  state.dirty = true;
  refreshColormapPanels();
  scheduler.request(state.controlPoints.map((p) => [...p]));
});
swatchRow.addEventListener("pointerup", () => {
  dragging = false;
});

// ------------------------------------------------------------------ upload

uploadInput.addEventListener("change", async () => {
  const file = uploadInput.files?.[0];
  if (!file) return;
  showMessage("");
  inputImg.src = URL.createObjectURL(file);
  progressBar.value = 0;
  progressLabel.textContent = "uploading";
  try {
    const config = {
      iterations: parseInt(itersInput.value, 10) || 2000,
      learning_rate: parseFloat(lrInput.value) || 0.01,
      seed: parseInt(seedInput.value, 10) || 0,
    };
    const jobId = await api.recover(file, config);
    state.jobId = jobId;
    const done = await api.trackJob(jobId, onJobProgress, 500);
    onJobDone(done);
  } catch (err) {
    progressLabel.textContent = "failed";
    showMessage((err as Error).message);
  }
});

function onJobProgress(snapshot: JobSnapshot): void {
  const { done, total } = snapshot.progress;
  progressBar.max = Math.max(total, 1);
  progressBar.value = done;
  progressLabel.textContent = `${snapshot.status} ${done}/${total || "?"}`;
}

function onJobDone(snapshot: JobSnapshot): void {
  progressLabel.textContent = `done (${snapshot.direction}, converged: ${snapshot.converged})`;
  state.controlPoints = (snapshot.colormap?.control_points ?? []).map((p) => [...p]);
  state.knots = snapshot.colormap?.knots ?? null;
  state.histogram = snapshot.histogram ?? null;
  state.selectedPoint = null;
  state.dirty = false;
  recoveredControlPoints = state.controlPoints.map((p) => [...p]);
  if (snapshot.preview) previewImg.src = snapshot.preview;
  refreshColormapPanels();
  drawHistogram();
}

// ----------------------------------------------------------------- library

async function loadLibrary(): Promise<void> {
  try {
    libraryColormaps = await api.colormaps();
    librarySelect.innerHTML = "";
    for (const cmap of libraryColormaps) {
      const option = document.createElement("option");
      option.value = cmap.name ?? "";
      option.textContent = cmap.name ?? "(unnamed)";
      librarySelect.appendChild(option);
    }
  } catch (err) {
    showMessage(`cannot load colormap library: ${(err as Error).message}`);
  }
}

applyLibraryButton.addEventListener("click", () => {
  const chosen = libraryColormaps.find((c) => c.name === librarySelect.value);
  if (!chosen) return;
  state.selectedLibraryColormap = chosen.name ?? null;
  state.controlPoints = chosen.control_points.map((p) => [...p]);
  state.knots = chosen.knots ?? null;
  state.dirty = true;
  refreshColormapPanels();
  scheduler.request(state.controlPoints.map((p) => [...p]));
});

// ---------------------------------------------------------------- transfer

transferInput.addEventListener("change", async () => {
  const file = transferInput.files?.[0];
  if (!file) return;
  try {
    const blob = await api.transfer(
      file,
      state.dirty || state.jobId === null
        ? { colormap: asColormapJson(state.controlPoints) }
        : { jobId: state.jobId },
    );
    transferImg.src = URL.createObjectURL(blob);
    showMessage("");
  } catch (err) {
    showMessage(`transfer failed: ${(err as Error).message}`);
  }
});

loadLibrary();
