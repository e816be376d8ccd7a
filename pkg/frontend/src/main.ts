import { ApiError, Client } from "./api.js";
import { renderSkeleton } from "./skeleton.js";
import { ViewerSession } from "./session.js";
import type { FrameDoc, SkeletonDoc } from "./types.js";

// Thin DOM wiring; all state lives in ViewerSession, all math on the server.

const client = new Client("");
const session = new ViewerSession();

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

const canvas = el<HTMLCanvasElement>("preview");
const sourceCanvas = el<HTMLCanvasElement>("source");
const banner = el<HTMLDivElement>("banner");
const debugPanel = el<HTMLDivElement>("debug");
const pinList = el<HTMLUListElement>("pins");
const scrub = el<HTMLInputElement>("scrub");
const targetTime = el<HTMLInputElement>("target-time");
const dScale = el<HTMLInputElement>("d-scale");

let skeleton: SkeletonDoc | null = null;
let sourceFrames: FrameDoc[] = [];
let lastTick = performance.now();

function setBanner(text: string | null, isError = false) {
  banner.textContent = text ?? "";
  banner.className = isError ? "banner error" : "banner";
}

function renderDebug() {
  const lines = [
    `graph: ${session.summary?.node_count ?? "?"} nodes, ` +
      `${session.summary?.synthetic_edges ?? "?"} synthetic edges`,
    `result hash: ${session.resultHash ?? "-"}`,
    `searcher: ${session.result?.searcher ?? "-"}  ` +
      `cost: ${session.result?.cost_total ?? "-"}  ` +
      `transitions: ${session.result?.transitions.length ?? "-"}`,
  ];
  debugPanel.textContent = lines.join("\n");
}

function renderPins() {
  pinList.textContent = "";
  session.pins.forEach((pin, i) => {
    const li = document.createElement("li");
    li.textContent = `t=${pin.time_s.toFixed(2)}s -> frame ${pin.frame}`;
    const remove = document.createElement("button");
    remove.textContent = "x";
    remove.addEventListener("click", () => {
      session.removePin(i);
      renderPins();
      void requery();
    });
    li.appendChild(remove);
    pinList.appendChild(li);
  });
}

async function requery() {
  if (session.pins.length < 2) {
    setBanner("pin at least two frames to search");
    return;
  }
  try {
    const outcome = await client.keyframeSearch(session.exportCondition());
    await session.applySearchResponse(outcome.rawBody);
    setBanner(
      `path of ${session.result?.path.length} source frames, ` +
        `${session.result?.transitions.length} transitions`,
    );
  } catch (err) {
    if (err instanceof ApiError) {
      session.applyErrorPayload(err.payload);
      setBanner(session.errorBanner(), true);
    } else if ((err as Error).name !== "AbortError") {
      setBanner(String(err), true);
    }
  }
  renderDebug();
}

function drawSource() {
  const ctx = sourceCanvas.getContext("2d");
  if (!ctx || !skeleton) return;
  ctx.clearRect(0, 0, sourceCanvas.width, sourceCanvas.height);
  const idx = Number(scrub.value);
  const frame = sourceFrames[idx];
  if (frame) {
    renderSkeleton(ctx, frame, skeleton.parents, {
      width: sourceCanvas.width,
      height: sourceCanvas.height,
    });
  }
}

function tick(now: number) {
  const dt = now - lastTick;
  lastTick = now;
  const ctx = canvas.getContext("2d");
  if (ctx && skeleton && session.timeline) {
    const idx = session.advancePlayback(dt);
    const frame = session.timeline.frames[idx];
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (frame) {
      renderSkeleton(ctx, frame, session.timeline.skeleton.parents, {
        width: canvas.width,
        height: canvas.height,
      });
    }
  }
  requestAnimationFrame(tick);
}

async function boot() {
  try {
    const summary = await client.graphSummary();
    session.setSummary(summary);
    const payload = await client.frames(0, summary.node_count);
    skeleton = payload.skeleton;
    sourceFrames = payload.frames;
    scrub.max = String(summary.node_count - 1);
    setBanner(`loaded ${summary.node_count} source frames`);
  } catch (err) {
    setBanner(`server unavailable: ${String(err)}`, true);
    return;
  }

  scrub.addEventListener("input", drawSource);
  el<HTMLButtonElement>("add-pin").addEventListener("click", () => {
    session.setPin(Number(targetTime.value), Number(scrub.value));
    renderPins();
    void requery();
  });
  dScale.addEventListener("change", () => {
    session.dScale = Number(dScale.value);
    void requery();
  });
  for (const name of ["edge", "beat", "struct", "tag", "ext"] as const) {
    const slider = el<HTMLInputElement>(`w-${name}`);
    slider.addEventListener("change", () => {
      session.weights[name] = Number(slider.value);
      void requery();
    });
  }
  el<HTMLButtonElement>("export").addEventListener("click", () => {
    const blob = new Blob([JSON.stringify(session.exportCondition(), null, 2)], {
      type: "application/json",
    });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "condition.json";
    a.click();
  });

  drawSource();
  renderDebug();
  requestAnimationFrame(tick);
}

void boot();
