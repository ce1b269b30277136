import init, { diffusionCurve, wignerSnapshot, posteriorDemo } from "./pkg/macroscope_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(40, 10, w - 50, h - 40);
}

function plotLine(canvas, xs, ys, logx, logy, marker) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  axes(ctx, w, h);
  const tx = logx ? xs.map((x) => Math.log10(Math.max(x, 1e-300))) : xs;
  const ty = logy ? ys.map((y) => Math.log10(Math.max(y, 1e-300))) : ys;
  const ok = (v) => Number.isFinite(v);
  const xmin = Math.min(...tx.filter(ok)), xmax = Math.max(...tx.filter(ok));
  const ymin = Math.min(...ty.filter(ok)), ymax = Math.max(...ty.filter(ok));
  const px = (x) => 40 + ((x - xmin) / (xmax - xmin || 1)) * (w - 50);
  const py = (y) => 10 + (1 - (y - ymin) / (ymax - ymin || 1)) * (h - 40);
  ctx.strokeStyle = "#1f5fa8";
  ctx.beginPath();
  tx.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ty[i])) : ctx.moveTo(px(x), py(ty[i]))));
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  const fmt = (v, log) => (log ? "1e" + v.toFixed(1) : v.toPrecision(3));
  ctx.fillText(fmt(xmin, logx), 40, h - 15);
  ctx.fillText(fmt(xmax, logx), w - 60, h - 15);
  ctx.fillText(fmt(ymax, logy), 2, 20);
  ctx.fillText(fmt(ymin, logy), 2, h - 32);
  if (marker !== undefined) {
    const mx = px(logx ? Math.log10(marker) : marker);
    ctx.strokeStyle = "#c33";
    ctx.beginPath(); ctx.moveTo(mx, 10); ctx.lineTo(mx, h - 30); ctx.stroke();
  }
}

function runCurve() {
  try {
    const r = JSON.parse(diffusionCurve($("dev").value, 1e-9, 1e-3, 129, num("gth")));
    plotLine($("curve"), r.lengths, r.gamma_tau, true, true, r.critical_length);
    $("curve-out").textContent =
      `x-axis: ħ/σq [m], y-axis: Γτe\nmax Γτe = ${r.gamma_tau_star.toExponential(4)} at ${r.critical_length.toExponential(3)} m\n` +
      `τe excluded below ${r.tau_e_excluded.toExponential(3)} s,  μ = ${r.mu.toFixed(3)}`;
  } catch (e) { $("curve-out").textContent = String(e); }
}

function runWigner() {
  const n = 121, extent = 3;
  $("wt-val").textContent = $("wt").value;
  try {
    const w = wignerSnapshot($("state").value, num("wg"), num("wt1"), num("wt"), extent, n);
    const canvas = $("wigner"), ctx = canvas.getContext("2d");
    const img = ctx.createImageData(n, n);
    const scale = 1 / Math.PI;
    let min = Infinity;
    for (let ip = 0; ip < n; ip++) for (let ix = 0; ix < n; ix++) {
      const v = w[ip * n + ix] / scale; min = Math.min(min, w[ip * n + ix]);
      const k = 4 * ((n - 1 - ip) * n + ix);
      const a = Math.min(1, Math.abs(v));
      img.data[k] = v < 0 ? 255 * (1 - a * 0.2) : 255 * (1 - a);
      img.data[k + 1] = 255 * (1 - a);
      img.data[k + 2] = v < 0 ? 255 * (1 - a) : 255 * (1 - a * 0.2);
      img.data[k + 3] = 255;
    }
    const tmp = new OffscreenCanvas(n, n);
    tmp.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
    $("wigner-out").textContent = `X, P in [-${extent}, ${extent}]   min W = ${min.toFixed(5)} (red is negative)`;
  } catch (e) { $("wigner-out").textContent = String(e); }
}

function runPosterior() {
  $("post-out").textContent = "running...";
  setTimeout(() => {
    try {
      const r = JSON.parse(posteriorDemo(num("pg"), num("ps"), parseInt($("pseed").value, 10) >>> 0, 85.8));
      const keep = r.gamma.map((g, i) => [g, r.density[i]]).filter(([g]) => g > 0);
      plotLine($("post"), keep.map((p) => p[0]), keep.map((p) => p[1]), true, false, r.q95);
      $("post-out").textContent =
        `x-axis: Γ [1/s] (log), y-axis: posterior density\nmode ${r.mode.toPrecision(4)} /s, 95% upper bound ${r.q95.toPrecision(4)} /s (red line)`;
    } catch (e) { $("post-out").textContent = String(e); }
  }, 10);
}

await init();
$("run-curve").onclick = runCurve;
$("run-post").onclick = runPosterior;
for (const id of ["state", "wg", "wt1", "wt"]) $(id).oninput = runWigner;
runCurve();
runWigner();
