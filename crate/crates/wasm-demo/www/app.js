import init, { DemoRun, extent_box } from "./pkg/radar_mot_wasm.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg; };

// Forward (x) points up the canvas, left (+y) points left; 8 px per metre.
const PX = 8;
const bev = $("bev").getContext("2d");
const toScreen = ([x, y]) => [320 - y * PX, 480 - x * PX];

let run = null;

function polygon(ctx, pts, color, map) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  pts.map(map).forEach(([u, v], i) => (i ? ctx.lineTo(u, v) : ctx.moveTo(u, v)));
  ctx.closePath();
  ctx.stroke();
}

function drawFrame(k) {
  const f = JSON.parse(run.frame(k));
  bev.clearRect(0, 0, 640, 480);
  bev.fillStyle = "#999";
  for (const p of f.points) {
    const [u, v] = toScreen(p);
    bev.fillRect(u - 1, v - 1, 2, 2);
  }
  bev.lineWidth = 1;
  f.detections.forEach((b) => polygon(bev, b.corners, "#c80", toScreen));
  bev.lineWidth = 2;
  f.ground_truth.forEach((b) => polygon(bev, b.corners, "#2a7", toScreen));
  bev.font = "11px sans-serif";
  for (const t of f.tracks) {
    polygon(bev, t.corners, "#24c", toScreen);
    const [u, v] = toScreen(t.corners[0]);
    bev.fillStyle = "#24c";
    bev.fillText(String(t.id), u + 3, v - 3);
  }
  $("frame-label").textContent = `frame ${k + 1} / ${run.frame_count}`;
}

function drawScores() {
  const pct = (x) => (100 * x).toFixed(1);
  const rows = JSON.parse(run.scores());
  $("scores").innerHTML =
    "<tr><th>class</th><th>HOTA</th><th>DetA</th><th>AssA</th><th>LocA</th><th>MOTA</th><th>IDS</th></tr>" +
    rows
      .map((r) => `<tr><td>${r.class}</td><td>${pct(r.hota)}</td><td>${pct(r.det_a)}</td>` +
        `<td>${pct(r.ass_a)}</td><td>${pct(r.loc_a)}</td><td>${pct(r.mota)}</td><td>${r.ids}</td></tr>`)
      .join("");
}

function drawSweep() {
  const pts = JSON.parse(run.sweep($("sweep-class").value));
  const ctx = $("sweep").getContext("2d");
  const [w, h, m] = [360, 200, 30];
  ctx.clearRect(0, 0, w, h);
  // MOTA can be negative; the axis spans [min(0, lowest), 1]
  const lo = Math.min(0, ...pts.map((p) => p.mota));
  const sx = (a) => m + a * (w - 2 * m);
  const sy = (v) => h - m - ((v - lo) / (1 - lo)) * (h - 2 * m);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(m, m, w - 2 * m, h - 2 * m);
  ctx.fillStyle = "#444";
  ctx.font = "10px sans-serif";
  ctx.fillText("α 0", m - 4, h - m + 12);
  ctx.fillText("1", w - m - 2, h - m + 12);
  ctx.fillText("1", m - 12, m + 4);
  ctx.fillText(lo.toFixed(1), 2, h - m + 4);
  ctx.strokeStyle = "#24c";
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach((p, i) => (i ? ctx.lineTo(sx(p.alpha), sy(p.mota)) : ctx.moveTo(sx(p.alpha), sy(p.mota))));
  ctx.stroke();
}

function runTracker() {
  status("running...");
  // let the status paint before the synchronous run
  setTimeout(() => {
    try {
      if (run) run.free();
      run = new DemoRun($("preset").value, $("framework").value, BigInt($("seed").value || 0),
        Number($("skew").value), 0n);
      $("frame").max = run.frame_count - 1;
      $("frame").value = 0;
      drawFrame(0);
      drawScores();
      drawSweep();
      status("");
    } catch (e) {
      status(String(e));
    }
  }, 10);
}

function drawExtent() {
  const [xx, xy, yy, scale] = ["xx", "xy", "yy", "scale"].map((id) => Number($(id).value));
  const ctx = $("extent").getContext("2d");
  ctx.clearRect(0, 0, 300, 300);
  const k = 20;
  const map = ([x, y]) => [150 - y * k, 150 - x * k];
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(150, 0); ctx.lineTo(150, 300); ctx.moveTo(0, 150); ctx.lineTo(300, 150);
  ctx.stroke();
  try {
    const b = JSON.parse(extent_box(xx, xy, yy, scale));
    ctx.lineWidth = 2;
    polygon(ctx, b.corners, "#24c", map);
    $("extent-text").textContent =
      `length ${b.length.toFixed(2)} m, width ${b.width.toFixed(2)} m, yaw ${(b.yaw * 180 / Math.PI).toFixed(1)}°`;
  } catch (e) {
    $("extent-text").textContent = String(e);
  }
}

await init();
$("run").addEventListener("click", runTracker);
$("frame").addEventListener("input", (e) => run && drawFrame(Number(e.target.value)));
$("sweep-class").addEventListener("change", () => run && drawSweep());
["xx", "xy", "yy", "scale"].forEach((id) => $(id).addEventListener("input", drawExtent));
drawExtent();
runTracker();
