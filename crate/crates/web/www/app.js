// Expects the output of `wasm-pack build crates/web --target web --out-dir www/pkg`.
import init, { Demo } from "./pkg/fracphase_web.js";

const STEPS_PER_FRAME = 4;
const form = document.getElementById("settings");
const fieldCanvas = document.getElementById("field");
const energyCanvas = document.getElementById("energy");
const readout = document.getElementById("readout");
const status = document.getElementById("status");
const toggle = document.getElementById("toggle");

let demo = null;
let running = true;

function start() {
  const data = new FormData(form);
  if (demo) demo.free();
  demo = null;
  status.textContent = "";
  try {
    demo = new Demo(
      data.get("model"),
      Number(data.get("alpha")),
      Number(data.get("grid")),
      BigInt(data.get("seed")),
      Number(data.get("horizon")),
    );
  } catch (err) {
    status.textContent = String(err);
    return;
  }
  fieldCanvas.width = fieldCanvas.height = demo.size();
  draw();
}

function drawField() {
  const n = demo.size();
  const image = new ImageData(new Uint8ClampedArray(demo.rgba()), n, n);
  fieldCanvas.getContext("2d").putImageData(image, 0, 0);
}

function drawEnergy() {
  const trace = demo.energyTrace();
  const ctx = energyCanvas.getContext("2d");
  const { width, height } = energyCanvas;
  ctx.clearRect(0, 0, width, height);
  if (trace.length < 4) return;
  const tMax = trace[trace.length - 2] || 1;
  let lo = Infinity, hi = -Infinity;
  for (let i = 1; i < trace.length; i += 2) {
    lo = Math.min(lo, trace[i]);
    hi = Math.max(hi, trace[i]);
  }
  const span = hi > lo ? hi - lo : 1;
  ctx.strokeStyle = "#2166ac";
  ctx.beginPath();
  for (let i = 0; i < trace.length; i += 2) {
    const x = (trace[i] / tMax) * (width - 10) + 5;
    const y = height - 5 - ((trace[i + 1] - lo) / span) * (height - 10);
    if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.fillText("modified energy vs t", 8, 14);
}

function drawReadout() {
  const [t, tau, e, eMod, eVar, drift, gap] = demo.latest();
  const rows = [
    ["step", demo.stepCount()],
    ["t", t.toFixed(4)],
    ["τ", tau.toExponential(3)],
    ["E", e.toExponential(8)],
    ["E modified", eMod.toExponential(8)],
    ["E with memory", eVar.toExponential(8)],
    ["mass drift", drift.toExponential(2)],
    ["aux gap", gap.toExponential(2)],
  ];
  readout.innerHTML = rows.map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`).join("");
}

function draw() {
  drawField();
  drawEnergy();
  drawReadout();
  const halted = demo.halted();
  if (halted) status.textContent = `stopped: ${halted}`;
}

function frame() {
  if (demo && running && !demo.finished()) {
    demo.advance(STEPS_PER_FRAME);
    draw();
  }
  requestAnimationFrame(frame);
}

form.addEventListener("submit", (ev) => {
  ev.preventDefault();
  start();
});

toggle.addEventListener("click", () => {
  running = !running;
  toggle.textContent = running ? "Pause" : "Resume";
});

document.getElementById("download").addEventListener("click", () => {
  if (!demo) return;
  const blob = new Blob([demo.diagnosticsCsv()], { type: "text/csv" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "diagnostics.csv";
  a.click();
  URL.revokeObjectURL(a.href);
});

await init();
start();
requestAnimationFrame(frame);
