// Glue for the wasm explorer. Expects the wasm-bindgen web-target bundle in
// ./pkg (see the README for the build command).

import init, {
  optimize_and_curve,
  response_curve_for,
  dephased_curve_for,
} from "./pkg/gqspi_wasm.js";

const KAPPA = 0.25;
const POINTS = 512;

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");

let lastAngles = null; // JSON string of the optimized angles
let lastCurve = null;
let lastBands = null;

function readBands() {
  let lo = parseFloat($("lo").value);
  let hi = parseFloat($("hi").value);
  if (hi <= lo + 0.05) hi = lo + 0.05;
  return [[lo, hi]];
}

function syncLabels() {
  $("degreeVal").textContent = $("degree").value;
  $("loVal").textContent = Number($("lo").value).toFixed(3);
  $("hiVal").textContent = Number($("hi").value).toFixed(3);
  $("gammaVal").textContent = Number($("gamma").value).toFixed(2);
  $("restartsVal").textContent = $("restarts").value;
}

function plot(curve, bands, noisy) {
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const period = curve.period;
  const x = (beta) => ((beta + period / 2) / period) * (w - 60) + 45;
  const y = (p) => h - 30 - p * (h - 60);

  // Band shading.
  ctx.fillStyle = "rgba(100, 160, 255, 0.18)";
  for (const [lo, hi] of bands) {
    ctx.fillRect(x(lo), y(1), x(hi) - x(lo), y(0) - y(1));
  }

  // Axes and the ideal indicator.
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(45, y(1), w - 105, y(0) - y(1));
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "rgba(100, 160, 255, 0.8)";
  ctx.beginPath();
  ctx.moveTo(x(-period / 2), y(0));
  for (const [lo, hi] of bands) {
    ctx.lineTo(x(lo), y(0));
    ctx.lineTo(x(lo), y(1));
    ctx.lineTo(x(hi), y(1));
    ctx.lineTo(x(hi), y(0));
  }
  ctx.lineTo(x(period / 2), y(0));
  ctx.stroke();
  ctx.setLineDash([]);

  // Labels.
  ctx.fillStyle = "#888";
  ctx.font = "12px system-ui";
  ctx.fillText("1", 30, y(1) + 4);
  ctx.fillText("0", 30, y(0) + 4);
  ctx.fillText("-π/2κ", 45, h - 10);
  ctx.fillText("0", x(0) - 3, h - 10);
  ctx.fillText("+π/2κ", w - 85, h - 10);

  const trace = (pts, style, width) => {
    ctx.strokeStyle = style;
    ctx.lineWidth = width;
    ctx.beginPath();
    pts.forEach(([b, p], i) => {
      if (i === 0) ctx.moveTo(x(b), y(p));
      else ctx.lineTo(x(b), y(p));
    });
    ctx.stroke();
  };

  trace(curve.points, "#e0483e", 2);
  if (noisy) trace(noisy.points, "rgba(240, 160, 40, 0.9)", 1.5);
}

function refreshOverlay() {
  if (!lastAngles || !lastCurve) return;
  const gamma = parseFloat($("gamma").value);
  const degree = JSON.parse(lastAngles).theta.length - 1;
  let noisy = null;
  if (gamma > 0 && degree <= 3) {
    const res = JSON.parse(dephased_curve_for(lastAngles, KAPPA, gamma, 256));
    if (!res.error) noisy = res;
    $("status").textContent = res.error ? res.error : `γ = ${gamma.toFixed(2)} overlay`;
  } else if (gamma > 0) {
    $("status").textContent = "dephasing overlay needs degree ≤ 3";
  }
  plot(lastCurve, lastBands, noisy);
}

async function optimize() {
  syncLabels();
  const degree = parseInt($("degree").value, 10);
  const restarts = parseInt($("restarts").value, 10);
  const seed = BigInt($("seed").value || "0");
  const bands = readBands();
  $("status").textContent = "optimizing…";
  $("perr").textContent = "";
  // Let the browser paint before the synchronous wasm call.
  await new Promise((r) => setTimeout(r, 20));
  const t0 = performance.now();
  const res = JSON.parse(
    optimize_and_curve(degree, KAPPA, JSON.stringify(bands), seed, restarts, POINTS),
  );
  if (res.error) {
    $("status").textContent = res.error;
    return;
  }
  lastAngles = JSON.stringify(res.angles);
  lastCurve = res;
  lastBands = res.bands;
  $("perr").textContent = `p_err = ${res.p_err.toPrecision(4)}`;
  $("status").textContent = `degree ${degree}, ${(performance.now() - t0).toFixed(0)} ms`;
  refreshOverlay();
}

async function main() {
  await init();
  $("status").textContent = "ready";
  $("optimize").addEventListener("click", optimize);
  $("gamma").addEventListener("input", () => {
    syncLabels();
    refreshOverlay();
  });
  for (const id of ["degree", "lo", "hi", "restarts"]) {
    $(id).addEventListener("input", syncLabels);
  }
  syncLabels();
  // Initial demo: a quick degree-5 optimization.
  optimize();
}

main();
